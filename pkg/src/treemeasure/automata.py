"""Game automata: data model, the ``.gta`` text format, validation and builders."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

AND = "AND"
OR = "OR"

TOP_NAMES = ("top", "⊤")
BOT_NAMES = ("bot", "⊥")
ACCEPT_PRIORITY = 2
REJECT_PRIORITY = 1

_IDENT = re.compile(r"[A-Za-z0-9_∃∀,⊤⊥']+")


@dataclass(frozen=True)
class Transition:
    mode: str
    left: str
    right: str

    def __post_init__(self):
        if self.mode not in (AND, OR):
            raise ValueError(f"mode must be AND or OR, got {self.mode!r}")


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    location: str | None = None

    def __str__(self):
        where = f" ({self.location})" if self.location else ""
        return f"{self.code}: {self.message}{where}"


@dataclass
class Diagnostics:
    errors: list[Diagnostic] = field(default_factory=list)
    warnings: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, code, message, location=None):
        self.errors.append(Diagnostic(code, message, location))

    def warn(self, code, message, location=None):
        self.warnings.append(Diagnostic(code, message, location))


class AutomatonError(ValueError):
    """Raised for malformed automata; carries the diagnostics that caused it."""

    def __init__(self, message: str, diagnostics: Diagnostics | None = None, line: int | None = None,
                 column: int | None = None):
        self.line = line
        self.column = column
        self.diagnostics = diagnostics
        loc = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(loc + message)


class ParseError(AutomatonError):
    pass


class GameAutomaton:
    """An immutable game automaton ``<Σ, Q, q0, δ, π>``.

    ``delta`` maps ``(state, letter)`` to a :class:`Transition`.  Construction
    does not validate; call :func:`validate` or use :meth:`checked`.
    """

    __slots__ = ("alphabet", "states", "initial", "priority", "delta")

    def __init__(self, alphabet: Iterable[str], states: Iterable[str], initial: str,
                 priority: Mapping[str, int], delta: Mapping[tuple[str, str], Transition]):
        object.__setattr__(self, "alphabet", tuple(alphabet))
        object.__setattr__(self, "states", tuple(states))
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "priority", MappingProxyType(dict(priority)))
        object.__setattr__(self, "delta", MappingProxyType(dict(delta)))

    def __setattr__(self, name, value):
        raise AttributeError("GameAutomaton is immutable")

    def checked(self) -> "GameAutomaton":
        diags = validate(self)
        if not diags.ok:
            raise AutomatonError("; ".join(str(d) for d in diags.errors), diags)
        return self

    def __eq__(self, other):
        if not isinstance(other, GameAutomaton):
            return NotImplemented
        return (self.alphabet == other.alphabet and self.states == other.states
                and self.initial == other.initial and dict(self.priority) == dict(other.priority)
                and dict(self.delta) == dict(other.delta))

    def __hash__(self):
        return hash((self.alphabet, self.states, self.initial))

    def __repr__(self):
        return f"GameAutomaton(|Q|={len(self.states)}, Σ={list(self.alphabet)}, initial={self.initial!r})"


def is_sink(a: GameAutomaton, q: str) -> bool:
    return all(a.delta.get((q, x)) == Transition(AND, q, q) for x in a.alphabet)


def sink_kind(a: GameAutomaton, q: str) -> str | None:
    """'ACCEPT' / 'REJECT' for self-looping states with priority 2 / 1."""
    if not is_sink(a, q):
        return None
    p = a.priority.get(q)
    if p == ACCEPT_PRIORITY:
        return "ACCEPT"
    if p == REJECT_PRIORITY:
        return "REJECT"
    return None


def _sink_like(a: GameAutomaton, q: str) -> bool:
    # a normalized sink loops into itself and its own copies
    def family(t):
        return t == q or t.startswith(q + "__dup")
    return all((t := a.delta.get((q, x))) is not None and t.mode == AND and family(t.left) and family(t.right)
               for x in a.alphabet)


def validate(a: GameAutomaton) -> Diagnostics:
    d = Diagnostics()
    if not a.alphabet:
        d.error("empty alphabet", "the alphabet must contain at least one letter")
    if len(set(a.alphabet)) != len(a.alphabet):
        d.error("duplicate letter", "alphabet letters must be distinct")
    if not a.states:
        d.error("no states", "the automaton must have at least one state")
    if len(set(a.states)) != len(a.states):
        d.error("duplicate state", "state ids must be distinct")
    for name in list(a.alphabet) + list(a.states):
        if not _IDENT.fullmatch(name):
            d.error("bad identifier", f"{name!r} is not a valid identifier")
    known = set(a.states)
    if a.initial not in known:
        d.error("undefined state", f"initial state {a.initial!r} is not declared")
    for q in a.states:
        p = a.priority.get(q)
        if p is None:
            d.error("missing priority", f"state {q!r} has no priority", q)
        elif not isinstance(p, int) or p < 0:
            d.error("bad priority", f"priority of {q!r} must be a nonnegative integer", q)
    for q in a.priority:
        if q not in known:
            d.error("undefined state", f"priority given for undeclared state {q!r}", q)
    letters = set(a.alphabet)
    for (q, x), t in a.delta.items():
        loc = f"{q},{x}"
        if q not in known:
            d.error("undefined state", f"transition from undeclared state {q!r}", loc)
        if x not in letters:
            d.error("undefined letter", f"transition on undeclared letter {x!r}", loc)
        for child in (t.left, t.right):
            if child not in known:
                d.error("undefined state", f"transition targets undeclared state {child!r}", loc)
        if t.left == t.right and not (t.mode == AND and t.left == q and q in TOP_NAMES + BOT_NAMES):
            d.warn("equal children", f"δ({q},{x}) has both children {t.left!r}; normalization will duplicate it", loc)
    for q in a.states:
        for x in a.alphabet:
            if (q, x) not in a.delta:
                d.error("missing transition", f"no transition for ({q}, {x})", f"{q},{x}")
    for q in a.states:
        if q in TOP_NAMES + BOT_NAMES:
            want = ACCEPT_PRIORITY % 2 if q in TOP_NAMES else REJECT_PRIORITY % 2
            if not _sink_like(a, q):
                d.error("bad sink", f"sink {q!r} must have AND self-loops on every letter", q)
            p = a.priority.get(q)
            if isinstance(p, int) and p % 2 != want:
                d.error("bad sink", f"sink {q!r} has priority of the wrong parity", q)
    return d


def is_deterministic(a: GameAutomaton) -> bool:
    return all(t.mode == AND for t in a.delta.values())


# text format -------------------------------------------------------------

def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def parse_automaton(text: str) -> GameAutomaton:
    """Parse a ``.gta`` document.  Raises :class:`ParseError` on any problem."""
    alphabet: list[str] | None = None
    states: list[str] | None = None
    initial: str | None = None
    priority: dict[str, int] = {}
    delta: dict[tuple[str, str], Transition] = {}
    sinks: list[tuple[str, str, int]] = []
    seen_at: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw)
        tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", body)]
        if not tokens:
            continue
        for tok, col in tokens:
            if not _IDENT.fullmatch(tok):
                raise ParseError(f"unexpected token {tok!r}", line=lineno, column=col)
        kw, col = tokens[0]
        args = [t for t, _ in tokens[1:]]

        def need(n, what):
            if len(args) != n:
                raise ParseError(f"'{kw}' expects {what}", line=lineno, column=col)

        if kw == "alphabet":
            if alphabet is not None:
                raise ParseError("alphabet declared twice", line=lineno, column=col)
            if not args:
                raise ParseError("empty alphabet", line=lineno, column=col)
            if len(set(args)) != len(args):
                raise ParseError("duplicate letter", line=lineno, column=col)
            alphabet = args
        elif kw == "states":
            if states is not None:
                raise ParseError("states declared twice", line=lineno, column=col)
            if not args:
                raise ParseError("no states declared", line=lineno, column=col)
            if len(set(args)) != len(args):
                raise ParseError("duplicate state", line=lineno, column=col)
            states = args
        elif kw == "initial":
            need(1, "one state")
            if initial is not None:
                raise ParseError("initial state declared twice", line=lineno, column=col)
            initial = args[0]
            seen_at[initial] = lineno
        elif kw == "priority":
            need(2, "a state and a number")
            q, p = args
            if not p.isdigit():
                raise ParseError(f"priority must be a nonnegative integer, got {p!r}", line=lineno,
                                 column=tokens[2][1])
            if q in priority:
                raise ParseError(f"duplicate priority declaration for {q!r}", line=lineno, column=col)
            priority[q] = int(p)
            seen_at.setdefault(q, lineno)
        elif kw == "trans":
            need(5, "state letter mode left right")
            q, x, mode, left, right = args
            if mode not in (AND, OR):
                raise ParseError(f"mode must be AND or OR, got {mode!r}", line=lineno, column=tokens[3][1])
            if (q, x) in delta:
                raise ParseError(f"duplicate transition for ({q}, {x})", line=lineno, column=col)
            delta[(q, x)] = Transition(mode, left, right)
            for s in (q, left, right):
                seen_at.setdefault(s, lineno)
        elif kw == "sink":
            need(2, "a state and ACCEPT or REJECT")
            q, kind = args
            if kind not in ("ACCEPT", "REJECT"):
                raise ParseError(f"sink kind must be ACCEPT or REJECT, got {kind!r}", line=lineno,
                                 column=tokens[2][1])
            sinks.append((q, kind, lineno))
            seen_at.setdefault(q, lineno)
        else:
            raise ParseError(f"unknown keyword {kw!r}", line=lineno, column=col)

    if alphabet is None:
        raise ParseError("missing 'alphabet' line")
    if states is None:
        raise ParseError("missing 'states' line")
    if initial is None:
        raise ParseError("missing 'initial' line")

    for q, kind, lineno in sinks:
        p = ACCEPT_PRIORITY if kind == "ACCEPT" else REJECT_PRIORITY
        if q in priority:
            raise ParseError(f"duplicate priority declaration for {q!r}", line=lineno)
        priority[q] = p
        for x in alphabet:
            if (q, x) in delta:
                raise ParseError(f"sink {q!r} also has an explicit transition on {x!r}", line=lineno)
            delta[(q, x)] = Transition(AND, q, q)

    a = GameAutomaton(alphabet, states, initial, priority, delta)
    diags = validate(a)
    if diags.errors:
        first = diags.errors[0]
        name = (first.location or "").split(",")[0]
        raise ParseError(f"{first.code}: {first.message}", diags, line=seen_at.get(name))
    return a


def render_automaton(a: GameAutomaton) -> str:
    """Canonical text form.  Sink states use the ``sink`` shorthand."""
    lines = [
        "alphabet " + " ".join(a.alphabet),
        "states " + " ".join(a.states),
        "initial " + a.initial,
    ]
    sinks = {q: sink_kind(a, q) for q in a.states}
    for q in a.states:
        if not sinks[q]:
            lines.append(f"priority {q} {a.priority[q]}")
    for q in a.states:
        if sinks[q]:
            continue
        for x in a.alphabet:
            t = a.delta[(q, x)]
            lines.append(f"trans {q} {x} {t.mode} {t.left} {t.right}")
    for q in a.states:
        if sinks[q]:
            lines.append(f"sink {q} {sinks[q]}")
    return "\n".join(lines) + "\n"


# builders ----------------------------------------------------------------

def _sink_delta(q: str, alphabet) -> dict:
    return {(q, x): Transition(AND, q, q) for x in alphabet}


def language_ln(n: int) -> GameAutomaton:
    """Trees where ``a`` occurs at least ``n`` times on every branch."""
    if n < 1:
        raise ValueError("L(n) needs n >= 1")
    sigma = ("a", "b", "c")
    names = [f"q{j}" for j in range(1, n + 1)]
    delta = _sink_delta("top", sigma)
    for j, q in enumerate(names, start=1):
        below = "top" if j == 1 else f"q{j - 1}"
        delta[(q, "a")] = Transition(AND, below, below)
        for x in ("b", "c"):
            delta[(q, x)] = Transition(AND, q, q)
    prio = {q: 1 for q in names} | {"top": ACCEPT_PRIORITY}
    return GameAutomaton(sigma, names + ["top"], names[-1], prio, delta)


def language_linf() -> GameAutomaton:
    """Trees with infinitely many ``a`` on every branch."""
    sigma = ("a", "b", "c")
    delta = {}
    for q in ("q1", "q2"):
        delta[(q, "a")] = Transition(AND, "q2", "q2")
        delta[(q, "b")] = Transition(AND, "q1", "q1")
        delta[(q, "c")] = Transition(AND, "q1", "q1")
    return GameAutomaton(sigma, ["q1", "q2"], "q1", {"q1": 1, "q2": 2}, delta)


def language_w(i: int, k: int) -> GameAutomaton:
    """The game language automaton over priorities ``i..k``."""
    if not (0 <= i < k):
        raise ValueError("W(i,k) needs 0 <= i < k")
    js = range(i, k + 1)
    sigma = [f"{p},{j}" for j in js for p in ("∃", "∀")]
    names = [f"q{j}" for j in js]
    delta = {}
    for q in names:
        for j in js:
            delta[(q, f"∃,{j}")] = Transition(OR, f"q{j}", f"q{j}")
            delta[(q, f"∀,{j}")] = Transition(AND, f"q{j}", f"q{j}")
    return GameAutomaton(sigma, names, f"q{i}", {f"q{j}": j for j in js}, delta)


def builtin(name: str, *params: int) -> GameAutomaton:
    """Named example automata: ``L`` (with n), ``L<n>``, ``Linf``, ``W`` (with i, k)."""
    m = re.fullmatch(r"L(\d+)", name)
    if m and not params:
        return language_ln(int(m.group(1)))
    if name == "L":
        if len(params) != 1:
            raise ValueError("builtin L takes exactly one parameter n")
        return language_ln(params[0])
    if name in ("Linf", "L∞"):
        if params:
            raise ValueError("builtin Linf takes no parameters")
        return language_linf()
    if name == "W":
        if len(params) != 2:
            raise ValueError("builtin W takes parameters i and k")
        return language_w(*params)
    raise ValueError(f"unknown builtin automaton {name!r}")


# normalization -----------------------------------------------------------

def normalize_distinct_children(a: GameAutomaton) -> GameAutomaton:
    """Rewrite every ``(t, t)`` transition into ``(t, t')`` with a fresh copy ``t'``.

    Each duplicated target gets a single copy (``t__dup1``, or a higher counter
    on a name clash) that behaves exactly like ``t``.  Sink self-loops count as
    duplicated targets too.
    """
    targets = []
    for q in a.states:
        for x in a.alphabet:
            t = a.delta[(q, x)]
            if t.left == t.right and t.left not in targets:
                targets.append(t.left)
    if not targets:
        return a
    taken = set(a.states)
    copy_of: dict[str, str] = {}
    for t in targets:
        n = 1
        while f"{t}__dup{n}" in taken:
            n += 1
        copy_of[t] = f"{t}__dup{n}"
        taken.add(copy_of[t])

    def fix(tr: Transition) -> Transition:
        if tr.left == tr.right:
            return Transition(tr.mode, tr.left, copy_of[tr.left])
        return tr

    states = list(a.states)
    delta = {key: fix(tr) for key, tr in a.delta.items()}
    prio = dict(a.priority)
    for t, c in copy_of.items():
        states.append(c)
        prio[c] = a.priority[t]
        for x in a.alphabet:
            delta[(c, x)] = fix(a.delta[(t, x)])
    return GameAutomaton(a.alphabet, states, a.initial, prio, delta)


def has_distinct_children(a: GameAutomaton) -> bool:
    return all(t.left != t.right for t in a.delta.values())
