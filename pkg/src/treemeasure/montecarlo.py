"""Monte Carlo oracle: sample branching plays to a finite depth and bracket the value.

A cutoff leaf is resolved in favour of ∃ (optimistic) or ∀ (pessimistic).
This brackets the true winner only when every non-sink state has the same
priority parity, so other MBPs are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mbp import EXISTS, FORALL, MBP, PROBABILISTIC, can_reach, largest_closed

OPTIMISTIC = "optimistic"
PESSIMISTIC = "pessimistic"
Z95 = 1.959963984540054
_BLOCK = 128


class UnsupportedMBP(ValueError):
    pass


@dataclass(frozen=True)
class PlayNode:
    state: str
    children: tuple["PlayNode", ...] = ()


@dataclass(frozen=True)
class TruncatedPlay:
    root: PlayNode
    depth: int

    def nodes(self):
        stack = [(self.root, 0)]
        while stack:
            node, d = stack.pop()
            yield node, d
            stack.extend((c, d + 1) for c in node.children)

    def size(self) -> int:
        return sum(1 for _ in self.nodes())


# static analysis ----------------------------------------------------------------

class _Regions:
    """Sink regions and per-state facts used to resolve subtrees without sampling."""

    def __init__(self, m: MBP):
        self.win = largest_closed(m, 0)
        self.lose = largest_closed(m, 1)
        inner = [s for s in m.states if s.id not in self.win and s.id not in self.lose]
        self.parities = {s.priority % 2 for s in inner}
        if self.parities == {1}:
            # infinite plays avoiding the sinks are lost by ∃
            self.lose |= {s.id for s in m.states} - can_reach(m, self.win)
        elif self.parities == {0}:
            self.win |= {s.id for s in m.states} - can_reach(m, self.lose)
        reach_lose = can_reach(m, self.lose)
        reach_win = can_reach(m, self.win)
        # optimistic value is forced to true if no ∀-win can ever be reached, and dually
        self.opt_true = {s.id for s in m.states} - reach_lose
        self.pess_false = {s.id for s in m.states} - reach_win

    def check(self) -> None:
        if len(self.parities) > 1:
            raise UnsupportedMBP(
                "bracketing unsupported: non-sink states carry both priority parities; "
                "use the numeric or exact solver")


@lru_cache(maxsize=64)
def _regions(m: MBP) -> _Regions:
    return _Regions(m)


def _regions_for(m: MBP) -> _Regions:
    try:
        return _regions(m)
    except TypeError:  # unhashable MBP subclass
        return _Regions(m)


# randomness ---------------------------------------------------------------------

class _Stream:
    """Uniforms from Philox keyed by (seed, sample index), drawn in blocks."""

    def __init__(self, seed: int, index: int):
        if not 0 <= seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.gen = np.random.Generator(np.random.Philox(key=seed + (index << 64)))
        self.buf = self.gen.random(_BLOCK).tolist()
        self.pos = 0

    def uniform(self) -> float:
        if self.pos == _BLOCK:
            self.buf = self.gen.random(_BLOCK).tolist()
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u


class _Sampler:
    def __init__(self, m: MBP):
        self.succ = {s.id: m.successors(s.id) for s in m.states}
        self.kind = {s.id: s.kind for s in m.states}
        self.cdf = {}
        for s in m.states:
            if s.kind == PROBABILISTIC:
                acc, cum = 0.0, []
                for t in m.successors(s.id):
                    acc += float(m.prob[s.id][t])
                    cum.append(acc)
                self.cdf[s.id] = cum

    def pick(self, sid: str, stream: _Stream) -> str:
        u = stream.uniform()
        cum = self.cdf[sid]
        for t, c in zip(self.succ[sid], cum):
            if u < c:
                return t
        return self.succ[sid][-1]


def sample_branching_play(m: MBP, s: str, depth: int, seed: int = 0, index: int = 0) -> TruncatedPlay:
    """Sample the branching play from ``s`` down to ``depth`` (root at depth 0).

    Nodes inside a closed single-parity sink region are leaves.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if s not in m:
        raise KeyError(f"unknown state {s!r}")
    sinks = largest_closed(m, 0) | largest_closed(m, 1)
    sampler = _Sampler(m)
    stream = _Stream(seed, index)

    def grow(sid: str, d: int) -> PlayNode:
        if d == depth or sid in sinks:
            return PlayNode(sid)
        if sampler.kind[sid] == PROBABILISTIC:
            return PlayNode(sid, (grow(sampler.pick(sid, stream), d + 1),))
        return PlayNode(sid, tuple(grow(t, d + 1) for t in sampler.succ[sid]))

    return TruncatedPlay(grow(s, 0), depth)


def evaluate_truncated(t: TruncatedPlay, m: MBP, mode: str) -> bool:
    """Winner of the finite game on ``t``: True when ∃ wins."""
    if mode not in (OPTIMISTIC, PESSIMISTIC):
        raise ValueError(f"mode must be {OPTIMISTIC!r} or {PESSIMISTIC!r}")
    reg = _regions_for(m)
    reg.check()
    cutoff = mode == OPTIMISTIC

    def win(node: PlayNode) -> bool:
        if node.state in reg.win:
            return True
        if node.state in reg.lose:
            return False
        if not node.children:
            return cutoff
        kind = m[node.state].kind
        if kind == EXISTS:
            return any(win(c) for c in node.children)
        if kind == FORALL:
            return all(win(c) for c in node.children)
        return win(node.children[0])

    return win(t.root)


# estimation ---------------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    optimistic_mean: float
    pessimistic_mean: float
    n: int
    depth: int
    ci_halfwidth: float
    seed: int
    lo: float  # lower 95% bound on the pessimistic probability
    hi: float  # upper 95% bound on the optimistic probability
    sigma_pessimistic: float
    sigma_optimistic: float

    def bracket(self, k_sigma: float = 3.0) -> tuple[float, float]:
        return (max(0.0, self.pessimistic_mean - k_sigma * self.sigma_pessimistic),
                min(1.0, self.optimistic_mean + k_sigma * self.sigma_optimistic))

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


def _wilson(p: float, n: int, z: float = Z95) -> tuple[float, float]:
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if p == 0 else max(0.0, centre - half)
    hi = 1.0 if p == 1 else min(1.0, centre + half)
    return lo, hi


def _interval(p: float, n: int) -> tuple[float, float, float]:
    """95% interval (lo, hi) and a standard error; Wilson near 0 or 1."""
    if n * p < 10 or n * (1 - p) < 10:
        lo, hi = _wilson(p, n)
        return lo, hi, (hi - lo) / (2 * Z95)
    se = math.sqrt(p * (1 - p) / n)
    return max(0.0, p - Z95 * se), min(1.0, p + Z95 * se), se


def _play_value(sampler: _Sampler, reg: _Regions, s: str, depth: int, stream: _Stream) -> tuple[bool, bool]:
    """(optimistic, pessimistic) outcome of one lazily sampled play."""
    kind, succ = sampler.kind, sampler.succ
    win, lose, opt_true, pess_false = reg.win, reg.lose, reg.opt_true, reg.pess_false

    def ev(sid: str, d: int) -> tuple[bool, bool]:
        if sid in win:
            return True, True
        if sid in lose:
            return False, False
        if d == 0:
            return True, False
        k = kind[sid]
        if k == PROBABILISTIC:
            return ev(sampler.pick(sid, stream), d - 1)
        if k == FORALL:
            o = p = True
            for t in succ[sid]:
                co, cp = ev(t, d - 1)
                o, p = o and co, p and cp
                if not p and (not o or sid in opt_true):
                    break
            return o, p
        o = p = False
        for t in succ[sid]:
            co, cp = ev(t, d - 1)
            o, p = o or co, p or cp
            if o and (p or sid in pess_false):
                break
        return o, p

    return ev(s, depth)


def estimate(m: MBP, s: str, depth: int, n: int, seed: int = 0) -> Estimate:
    """Means of the optimistic and pessimistic outcomes over ``n`` plays.

    Sample ``i`` draws from its own Philox stream keyed by ``(seed, i)`` and
    subtrees are sampled only as far as the outcome needs them.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if s not in m:
        raise KeyError(f"unknown state {s!r}")
    reg = _regions_for(m)
    reg.check()
    sampler = _Sampler(m)
    n_opt = n_pess = 0
    for i in range(n):
        o, p = _play_value(sampler, reg, s, depth, _Stream(seed, i))
        n_opt += o
        n_pess += p
    po, pp = n_opt / n, n_pess / n
    lo_p, hi_p, se_p = _interval(pp, n)
    lo_o, hi_o, se_o = _interval(po, n)
    half = max(hi_p - lo_p, hi_o - lo_o) / 2
    return Estimate(po, pp, n, depth, half, seed, lo_p, hi_o, se_p, se_o)
