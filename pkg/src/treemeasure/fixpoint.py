"""Nested fixed-point equation systems built from MBPs, and their simplification."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import networkx as nx

from .mbp import EXISTS, FORALL, MBP, PROBABILISTIC
from .poly import Poly, coproduct

MU = "MU"
NU = "NU"
HAND = "hand"  # variables of hand-authored systems

_SYMBOL = {MU: "≛μ", NU: "≛ν"}


def quantifier_of(priority: int) -> str:
    return MU if priority % 2 else NU


@dataclass(frozen=True)
class Equation:
    lhs: str
    rhs: Poly
    priority: int
    quantifier: str = ""

    def __post_init__(self):
        q = quantifier_of(self.priority)
        if self.quantifier and self.quantifier != q:
            raise ValueError(f"{self.lhs}: quantifier {self.quantifier} does not match priority {self.priority}")
        object.__setattr__(self, "quantifier", q)

    def format(self) -> str:
        return f"{self.lhs} {_SYMBOL[self.quantifier]} {self.rhs.format()}"


class FixpointSystem:
    """One equation per variable, nested by priority (highest basket outermost).

    ``kinds`` records where each variable came from (an MBP state kind, or
    ``"hand"``).  ``bindings`` expresses every variable of the system this one
    was derived from as a polynomial over the current variables, so values of
    eliminated states stay recoverable.  ``target`` is the variable whose value
    is wanted; simplification never eliminates it.
    """

    def __init__(self, equations: Iterable[Equation], *, kinds: Mapping[str, str] | None = None,
                 bindings: Mapping[str, Poly] | None = None, target: str | None = None,
                 origin: Mapping[str, str] | None = None):
        self.equations: tuple[Equation, ...] = tuple(equations)
        self.var_index = {e.lhs: i for i, e in enumerate(self.equations)}
        if len(self.var_index) != len(self.equations):
            raise ValueError("one equation per variable is required")
        for e in self.equations:
            unknown = e.rhs.variables() - self.var_index.keys()
            if unknown:
                raise ValueError(f"equation for {e.lhs} mentions undefined variables {sorted(unknown)}")
        self.kinds = {e.lhs: HAND for e in self.equations} | dict(kinds or {})
        self.bindings = dict(bindings) if bindings is not None else {v: Poly.var(v) for v in self.var_index}
        self.target = target
        self.origin = dict(origin) if origin is not None else {v: v for v in self.var_index}

    @classmethod
    def from_rows(cls, rows: Sequence[tuple[str, Poly | int | Fraction, int]], target: str | None = None):
        """Hand-authored system from ``(var, rhs, priority)`` triples."""
        return cls([Equation(v, Poly.coerce(r), p) for v, r, p in rows], target=target)

    @property
    def variables(self) -> list[str]:
        return [e.lhs for e in self.equations]

    @property
    def basket_order(self) -> list[int]:
        return sorted({e.priority for e in self.equations}, reverse=True)

    def __len__(self):
        return len(self.equations)

    def __getitem__(self, var: str) -> Equation:
        return self.equations[self.var_index[var]]

    def baskets(self) -> list[tuple[int, list[str]]]:
        return [(p, [e.lhs for e in self.equations if e.priority == p]) for p in self.basket_order]

    def dependency_graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.variables)
        for e in self.equations:
            for v in e.rhs.variables():
                g.add_edge(e.lhs, v)
        return g

    def scc_order(self) -> list[list[str]]:
        """SCCs with dependencies first; ties broken by equation order."""
        g = self.dependency_graph()
        cond = nx.condensation(g)
        members = {c: sorted(cond.nodes[c]["members"], key=self.var_index.__getitem__) for c in cond.nodes}
        rev = cond.reverse(copy=True)
        order = nx.lexicographical_topological_sort(rev, key=lambda c: self.var_index[members[c][0]])
        return [members[c] for c in order]

    def value_of(self, var: str, values: Mapping[str, object]):
        """Evaluate the binding of an original variable at the given solution."""
        return self.bindings[var].evaluate(values)

    def format(self) -> str:
        return "\n".join(e.format() for e in self.equations)

    def __eq__(self, other):
        if not isinstance(other, FixpointSystem):
            return NotImplemented
        return self.equations == other.equations

    def __repr__(self):
        return f"FixpointSystem({len(self)} equations, baskets={self.basket_order})"


def build_system(m: MBP, target: str | None = None) -> FixpointSystem:
    eqs, kinds = [], {}
    for s in m.states:
        succ = m.successors(s.id)
        if s.kind == PROBABILISTIC:
            rhs = Poly([(((t, 1),), m.prob[s.id][t]) for t in succ])
        elif s.kind == FORALL:
            rhs = Poly.const(1)
            for t in succ:
                rhs = rhs * Poly.var(t)
        elif s.kind == EXISTS:
            rhs = coproduct(*(Poly.var(t) for t in succ))
        else:
            raise ValueError(f"unknown state kind {s.kind!r}")
        eqs.append(Equation(s.id, rhs, s.priority))
        kinds[s.id] = s.kind
    if target is None and m.states:
        target = m.states[0].id
    return FixpointSystem(eqs, kinds=kinds, target=target)


def apply_g(sys: FixpointSystem, v: Sequence) -> list:
    if len(v) != len(sys):
        raise ValueError(f"expected a vector of length {len(sys)}, got {len(v)}")
    env = dict(zip(sys.variables, v))
    return [e.rhs.evaluate(env) for e in sys.equations]


# simplification ----------------------------------------------------------

def _rebuild(sys: FixpointSystem, eqs: list[Equation], subst: Mapping[str, Poly]) -> FixpointSystem:
    bindings = {k: b.substitute(subst) for k, b in sys.bindings.items()}
    keep = {e.lhs for e in eqs}
    kinds = {k: v for k, v in sys.kinds.items() if k in keep}
    origin = {k: v for k, v in sys.origin.items() if k in keep}
    return FixpointSystem(eqs, kinds=kinds, bindings=bindings, target=sys.target, origin=origin)


def _substitute_all(sys: FixpointSystem, subst: Mapping[str, Poly]) -> FixpointSystem:
    eqs = [Equation(e.lhs, e.rhs.substitute(subst), e.priority) for e in sys.equations if e.lhs not in subst]
    return _rebuild(sys, eqs, subst)


def _closed_set(sys: FixpointSystem, parity: int) -> set[str]:
    current = {e.lhs for e in sys.equations if e.priority % 2 == parity}
    changed = True
    while changed:
        changed = False
        for v in list(current):
            if not sys[v].rhs.variables() <= current:
                current.discard(v)
                changed = True
    return current


def _fold_constants(sys: FixpointSystem) -> FixpointSystem | None:
    subst: dict[str, Poly] = {}
    for parity, c in ((0, 1), (1, 0)):
        block = _closed_set(sys, parity)
        if block and all(sys[v].rhs.evaluate(dict.fromkeys(block, Fraction(c))) == c for v in block):
            subst.update({v: Poly.const(c) for v in block})
    for e in sys.equations:
        if e.lhs not in subst and e.rhs.is_constant():
            subst[e.lhs] = e.rhs
    if not subst:
        return None
    # resolve chains of constants before substituting everywhere
    out = _substitute_all(sys, subst)
    while True:
        more = {e.lhs: e.rhs for e in out.equations if e.rhs.is_constant()}
        if not more:
            return out
        out = _substitute_all(out, more)


def _merge_bisimilar(sys: FixpointSystem) -> FixpointSystem | None:
    mergeable = {v for v in sys.variables if sys.kinds.get(v) in (PROBABILISTIC, HAND)}
    block: dict[str, tuple] = {}
    for v in sys.variables:
        block[v] = (sys[v].priority, "m") if v in mergeable else ("solo", v)
    while True:
        rep = {}
        for v in sys.variables:
            rep.setdefault(block[v], v)
        sig = {}
        for v in sys.variables:
            renamed = sys[v].rhs.rename({u: rep[block[u]] for u in sys[v].rhs.variables()})
            sig[v] = (block[v], frozenset(renamed.terms.items()))
        ids: dict = {}
        new_block = {v: ids.setdefault(sig[v], len(ids)) for v in sys.variables}
        if len(ids) == len(set(block.values())):
            break
        block = {v: ("b", new_block[v]) for v in sys.variables}
    members: dict = {}
    for v in sys.variables:
        members.setdefault(block[v], []).append(v)
    subst = {}
    for group in members.values():
        rep = sys.target if sys.target in group else group[0]
        subst.update({v: Poly.var(rep) for v in group if v != rep})
    if not subst:
        return None
    return _substitute_all(sys, subst)


def _eliminate_branching(sys: FixpointSystem) -> FixpointSystem | None:
    dependents: dict[str, list[str]] = {v: [] for v in sys.variables}
    for e in sys.equations:
        for u in e.rhs.variables():
            if u != e.lhs:
                dependents[u].append(e.lhs)
    for e in sys.equations:
        v = e.lhs
        if v == sys.target or sys.kinds.get(v) not in (EXISTS, FORALL):
            continue
        if v in e.rhs.variables():
            continue
        deps = dependents[v]
        if len(deps) > 1:
            continue
        if len(deps) == 1 and sys[deps[0]].priority != e.priority:
            continue
        return _substitute_all(sys, {v: e.rhs})
    return None


def _rename(sys: FixpointSystem) -> FixpointSystem:
    order = [v for comp in sys.scc_order() for v in comp]
    names = {v: f"x{i}" for i, v in enumerate(order, start=1)}
    if all(names[v] == v for v in order) and sys.variables == order:
        return sys
    eqs = [Equation(names[v], sys[v].rhs.rename(names), sys[v].priority) for v in order]
    subst = {v: Poly.var(n) for v, n in names.items()}
    bindings = {k: b.substitute(subst) for k, b in sys.bindings.items()}
    kinds = {names[v]: sys.kinds[v] for v in order}
    origin = {names[v]: sys.origin[v] for v in order}
    target = names.get(sys.target, sys.target)
    return FixpointSystem(eqs, kinds=kinds, bindings=bindings, target=target, origin=origin)


def simplify(sys: FixpointSystem) -> FixpointSystem:
    """Fold sink components, merge duplicated states, inline branching rows, rename.

    Closed all-even components whose rows fix 1 become the constant 1, closed
    all-odd ones fixing 0 become 0.  Bisimilar probabilistic (or hand-written)
    variables of equal priority are merged.  Branching variables without self
    reference are inlined into their single dependent when priorities match.
    Survivors are renamed ``x1..xn`` with dependencies first.
    """
    cur = sys
    while True:
        for step in (_fold_constants, _merge_bisimilar, _eliminate_branching):
            nxt = step(cur)
            if nxt is not None:
                cur = nxt
                break
        else:
            break
    if not cur.equations:
        return cur
    return _rename(cur)


# classification ----------------------------------------------------------

TRIANGULAR = "triangular"
LINEAR = "linear"
GENERAL = "general"


@dataclass(frozen=True)
class SystemClass:
    all_mu: bool
    all_nu: bool
    mixed: bool
    structure: str

    @property
    def flags(self) -> str:
        return "all_mu" if self.all_mu else "all_nu" if self.all_nu else "mixed"

    def __str__(self):
        return f"{self.flags}, {self.structure}"


def classify(sys: FixpointSystem) -> SystemClass:
    qs = {e.quantifier for e in sys.equations}
    all_mu = qs <= {MU}
    all_nu = qs <= {NU}
    mixed = not (all_mu or all_nu)
    if all(len(c) == 1 for c in sys.scc_order()):
        structure = TRIANGULAR
    elif all(e.rhs.degree() <= 1 for e in sys.equations):
        structure = LINEAR
    else:
        structure = GENERAL
    return SystemClass(all_mu, all_nu, mixed, structure)
