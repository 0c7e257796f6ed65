"""Markov branching plays and the reduction from game automata."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping

from .automata import AND, AutomatonError, Diagnostics, GameAutomaton, has_distinct_children, validate

PROBABILISTIC = "Probabilistic"
EXISTS = "ExistsBranching"
FORALL = "ForallBranching"
KINDS = (PROBABILISTIC, EXISTS, FORALL)


@dataclass(frozen=True)
class MbpState:
    id: str
    kind: str
    priority: int


class MBP:
    """A Markov branching play ``<(S,E), (S_P, B_∃, B_∀), p, Par>``.

    Successor lists are ordered and may repeat a state: a branching state whose
    two children coincide simply lists that child twice.  ``prob`` is keyed by
    probabilistic state, then by successor.
    """

    __slots__ = ("states", "edges", "prob", "_by_id")

    def __init__(self, states: Iterable[MbpState], edges: Mapping[str, Iterable[str]],
                 prob: Mapping[str, Mapping[str, Fraction]]):
        states = tuple(states)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "edges", MappingProxyType({k: tuple(v) for k, v in edges.items()}))
        object.__setattr__(self, "prob", MappingProxyType(
            {k: MappingProxyType({s: Fraction(p) for s, p in v.items()}) for k, v in prob.items()}))
        object.__setattr__(self, "_by_id", {s.id: s for s in states})

    def __setattr__(self, name, value):
        raise AttributeError("MBP is immutable")

    def __getitem__(self, sid: str) -> MbpState:
        return self._by_id[sid]

    def __contains__(self, sid: str) -> bool:
        return sid in self._by_id

    def __len__(self):
        return len(self.states)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.states]

    def successors(self, sid: str) -> tuple[str, ...]:
        return self.edges.get(sid, ())

    def dump(self) -> str:
        """Deterministic text listing used for golden comparisons and debugging."""
        lines = [f"state {s.id} {s.kind} {s.priority}" for s in self.states]
        for s in self.states:
            succ = self.successors(s.id)
            if s.kind == PROBABILISTIC:
                lines.append(f"edge {s.id} -> " + " ".join(f"{t}:{self.prob[s.id][t]}" for t in succ))
            else:
                lines.append(f"edge {s.id} -> " + " ".join(succ))
        return "\n".join(lines) + "\n"


def prob_state(q: str) -> str:
    return q


def branch_state(q: str, letter: str) -> str:
    return f"{q}:{letter}"


def build_mbp(a: GameAutomaton, *, strict: bool = False) -> MBP:
    """Reduce a game automaton to its MBP.

    With ``strict=True`` transitions with equal children are rejected, as they
    would be if one insisted on :func:`normalize_distinct_children` first.  By
    default they produce a branching state listing the same successor twice,
    which describes the same stochastic process.
    """
    diags = validate(a)
    if diags.errors:
        raise AutomatonError("; ".join(str(d) for d in diags.errors), diags)
    if strict and not has_distinct_children(a):
        raise AutomatonError("automaton not normalized: some transition has equal children")
    p = Fraction(1, len(a.alphabet))
    states, edges, prob = [], {}, {}
    for q in a.states:
        pr = a.priority[q]
        sq = prob_state(q)
        states.append(MbpState(sq, PROBABILISTIC, pr))
        succ = [branch_state(q, x) for x in a.alphabet]
        edges[sq] = succ
        prob[sq] = {s: p for s in succ}
        for x in a.alphabet:
            t = a.delta[(q, x)]
            sqa = branch_state(q, x)
            states.append(MbpState(sqa, FORALL if t.mode == AND else EXISTS, pr))
            edges[sqa] = [prob_state(t.left), prob_state(t.right)]
    return MBP(states, edges, prob)


def validate_mbp(m: MBP) -> Diagnostics:
    d = Diagnostics()
    seen = set()
    for s in m.states:
        if s.id in seen:
            d.error("duplicate state", f"state {s.id!r} listed twice", s.id)
        seen.add(s.id)
        if s.kind not in KINDS:
            d.error("bad kind", f"state {s.id!r} has unknown kind {s.kind!r}", s.id)
        if not isinstance(s.priority, int) or s.priority < 0:
            d.error("bad priority", f"state {s.id!r} needs a nonnegative integer priority", s.id)
    for src in m.edges:
        if src not in seen:
            d.error("undefined state", f"edges given for unknown state {src!r}", src)
    for s in m.states:
        succ = m.successors(s.id)
        if not succ:
            d.error("no successor", f"state {s.id!r} has no successor", s.id)
        for t in succ:
            if t not in seen:
                d.error("undefined state", f"{s.id!r} has unknown successor {t!r}", s.id)
        if s.kind == PROBABILISTIC:
            dist = m.prob.get(s.id)
            if dist is None:
                d.error("missing distribution", f"probabilistic state {s.id!r} has no distribution", s.id)
                continue
            if set(dist) != set(succ) or len(set(succ)) != len(succ):
                d.error("bad support", f"distribution of {s.id!r} must cover exactly its distinct successors", s.id)
            if any(not (0 < p <= 1) for p in dist.values()):
                d.error("bad probability", f"probabilities of {s.id!r} must lie in (0,1]", s.id)
            if sum(dist.values(), Fraction(0)) != 1:
                d.error("distribution not normalized", f"probabilities of {s.id!r} sum to {sum(dist.values())}",
                        s.id)
        elif s.id in m.prob:
            d.error("bad distribution", f"branching state {s.id!r} must not carry probabilities", s.id)
    return d


def reachable_from(m: MBP, s: str) -> set[str]:
    if s not in m:
        raise KeyError(f"unknown state {s!r}")
    seen = {s}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for v in m.successors(u):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def largest_closed(m: MBP, parity: int) -> set[str]:
    """Largest set of states with priority of the given parity closed under successors.

    Every play from such a set sees only that parity, so even sets are won by
    ∃ and odd sets by ∀ no matter what happens inside.
    """
    current = {s.id for s in m.states if s.priority % 2 == parity}
    changed = True
    while changed:
        changed = False
        for sid in list(current):
            if any(t not in current for t in m.successors(sid)):
                current.discard(sid)
                changed = True
    return current


def can_reach(m: MBP, targets: set[str]) -> set[str]:
    """States with a path into ``targets`` (including the targets themselves)."""
    preds: dict[str, list[str]] = {s.id: [] for s in m.states}
    for s in m.states:
        for t in m.successors(s.id):
            preds[t].append(s.id)
    seen = set(targets)
    queue = deque(targets)
    while queue:
        u = queue.popleft()
        for v in preds[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen
