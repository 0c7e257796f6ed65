"""First-order formulas over the reals, staged per variable, in qepcad syntax.

Each stage characterizes one variable as the least (μ) or greatest (ν)
solution of its equation, given quantifier-free characterizations of the
variables solved before it.  Those characterizations come from qepcad answer
files, an external qepcad run, the exact backend, or (for one-parameter
quadratics) a closed-form template.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Sequence, Union

from .fixpoint import MU, FixpointSystem
from .poly import Poly, var_key

RELATIONS = ("<=", ">=", "/=", "=", "<", ">")
QEPCAD_ENV = "TREEMEASURE_QEPCAD"
PRIME = "prime"


class QEError(ValueError):
    pass


class QEParseError(QEError):
    pass


class NotStageable(QEError):
    pass


# formula syntax ----------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    lhs: Poly
    rel: str
    rhs: Poly

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")

    def variables(self) -> set[str]:
        return self.lhs.variables() | self.rhs.variables()


@dataclass(frozen=True)
class And:
    parts: tuple

    def __init__(self, parts: Sequence):
        object.__setattr__(self, "parts", tuple(parts))


@dataclass(frozen=True)
class Implies:
    premise: object
    conclusion: object


@dataclass(frozen=True)
class Group:
    """A bracketed subformula, ``[ ... ]``."""

    body: object


Node = Union[Atom, And, Implies, Group]


def render(node: Node) -> str:
    if isinstance(node, Atom):
        return f"{node.lhs.format()} {node.rel} {node.rhs.format()}"
    if isinstance(node, And):
        return " /\\ ".join(render(p) for p in node.parts)
    if isinstance(node, Implies):
        return f"{render(node.premise)} ==> {render(node.conclusion)}"
    if isinstance(node, Group):
        return f"[{render(node.body)}]"
    raise TypeError(f"not a formula node: {node!r}")


def node_variables(node: Node) -> set[str]:
    if isinstance(node, Atom):
        return node.variables()
    if isinstance(node, And):
        return set().union(*(node_variables(p) for p in node.parts)) if node.parts else set()
    if isinstance(node, Implies):
        return node_variables(node.premise) | node_variables(node.conclusion)
    if isinstance(node, Group):
        return node_variables(node.body)
    raise TypeError(node)


def rename_node(node: Node, mapping: Mapping[str, str]) -> Node:
    if isinstance(node, Atom):
        return Atom(node.lhs.rename(mapping), node.rel, node.rhs.rename(mapping))
    if isinstance(node, And):
        return And([rename_node(p, mapping) for p in node.parts])
    if isinstance(node, Implies):
        return Implies(rename_node(node.premise, mapping), rename_node(node.conclusion, mapping))
    if isinstance(node, Group):
        return Group(rename_node(node.body, mapping))
    raise TypeError(node)


@dataclass(frozen=True)
class FOFormula:
    prefix: tuple[tuple[str, str], ...]  # ("A" | "E", variable)
    matrix: Node

    def free_variables(self) -> set[str]:
        bound = {v for _, v in self.prefix}
        return node_variables(self.matrix) - bound


def emit_qepcad(f: FOFormula) -> str:
    """The formula in qepcad's input syntax, terminated by a period."""
    prefix = "".join(f"({q} {v})" for q, v in f.prefix)
    body = render(f.matrix)
    return f"{prefix} {body}." if prefix else f"{body}."


def qepcad_input(f: FOFormula, comment: str) -> str:
    """A complete qepcad session input: description, variables, free count, formula."""
    free = sorted(f.free_variables(), key=var_key)
    order = free + [v for _, v in f.prefix]
    return "\n".join([
        f"[{comment}]",
        "(" + ",".join(order) + ")",
        str(len(free)),
        emit_qepcad(f),
        "finish",
    ]) + "\n"


def formula_from_input(text: str) -> str:
    """Extract the formula line(s) from a file written by :func:`qepcad_input`."""
    lines = text.splitlines()
    body = []
    for line in lines[3:]:
        if line.strip() == "finish":
            break
        body.append(line)
    return "\n".join(body)


def normalize_ws(text: str) -> str:
    return re.sub(r"\s+", "", text)


# parsing quantifier-free answers ---------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z0-9_]*)|(<=|>=|/=|==>|/\\|\\/|[=<>+\-*^()\[\]]))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise QEParseError(f"unparseable token at {text[pos:pos + 12]!r}")
        out.append(m.group(m.lastindex))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class _PolyParser:
    def __init__(self, tokens: list[str]):
        self.t = tokens
        self.i = 0

    def peek(self):
        return self.t[self.i] if self.i < len(self.t) else None

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expr(self) -> Poly:
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take() == "-" else 1
        acc = self.term() * sign
        while self.peek() in ("+", "-"):
            op = self.take()
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> Poly:
        acc = self.factor()
        while True:
            nxt = self.peek()
            if nxt == "*":
                self.take()
                acc = acc * self.factor()
            elif nxt is not None and (nxt == "(" or nxt[0].isalnum() or nxt[0] == "_"):
                acc = acc * self.factor()
            else:
                return acc

    def factor(self) -> Poly:
        base = self.base()
        if self.peek() == "^":
            self.take()
            e = self.take()
            if e is None or not e.isdigit():
                raise QEParseError(f"bad exponent {e!r}")
            base = base ** int(e)
        return base

    def base(self) -> Poly:
        tok = self.take()
        if tok is None:
            raise QEParseError("unexpected end of input")
        if tok == "(":
            inner = self.expr()
            if self.take() != ")":
                raise QEParseError("missing ')'")
            return inner
        if tok[0].isdigit():
            return Poly.const(Fraction(tok))
        if tok[0].isalpha() or tok[0] == "_":
            return Poly.var(tok)
        raise QEParseError(f"unexpected token {tok!r}")


def parse_atom(text: str) -> Atom:
    tokens = _tokenize(text)
    rel_pos = [i for i, t in enumerate(tokens) if t in RELATIONS]
    if len(rel_pos) != 1:
        raise QEParseError(f"expected exactly one relation in {text!r}")
    k = rel_pos[0]
    sides = []
    for part in (tokens[:k], tokens[k + 1:]):
        p = _PolyParser(part)
        poly = p.expr()
        if p.peek() is not None:
            raise QEParseError(f"trailing tokens in {text!r}")
        sides.append(poly)
    return Atom(sides[0], tokens[k], sides[1])


def ingest_qf_answer(text: str, allowed: set[str] | None = None) -> And:
    """Parse a conjunction of (in)equalities such as ``x2 - 1 < 0 /\\ 8 x2^2 - 12 x2 + 1 = 0``.

    Answers must be univariate unless ``allowed`` lists the permitted variables.
    """
    text = text.strip().rstrip(".").strip()
    if not text:
        raise QEParseError("empty answer")
    if text.upper() in ("TRUE", "FALSE"):
        raise QEParseError(f"answer {text!r} carries no characterization")
    if "\\/" in text or "==>" in text:
        raise QEParseError("only conjunctions of atoms are supported")
    chunks = [c.strip().strip("[]").strip() for c in text.split("/\\")]
    atoms = [parse_atom(c) for c in chunks]
    vs = set().union(*(a.variables() for a in atoms))
    if allowed is None:
        if len(vs) > 1:
            raise QEParseError(f"multivariate answer over {sorted(vs, key=var_key)} is not supported")
    elif not vs <= allowed:
        raise QEParseError(f"answer mentions unexpected variables {sorted(vs - allowed, key=var_key)}")
    return And(atoms)


# staging -----------------------------------------------------------------------

@dataclass(frozen=True)
class Stage:
    index: int  # 1-based
    target: str
    quantifier: str
    priors: tuple[str, ...]  # earlier targets appearing in the equation
    params: tuple[str, ...]  # later targets of the same component (left free)


@dataclass(frozen=True)
class StagePlan:
    stages: tuple[Stage, ...]

    def __len__(self):
        return len(self.stages)

    def __getitem__(self, i: int) -> Stage:
        return self.stages[i - 1]

    def position(self, var: str) -> int:
        for s in self.stages:
            if s.target == var:
                return s.index
        raise KeyError(var)


def build_stage_plan(sys: FixpointSystem) -> StagePlan:
    order: list[str] = []
    comp_of: dict[str, int] = {}
    for ci, comp in enumerate(sys.scc_order()):
        for v in sorted(comp, key=lambda v: (sys[v].priority, sys.var_index[v])):
            order.append(v)
            comp_of[v] = ci
    stages = []
    for i, v in enumerate(order):
        used = sys[v].rhs.variables()
        earlier = set(order[:i])
        priors = tuple(u for u in order[:i] if u in used)
        params = tuple(u for u in order[i + 1:] if u in used and comp_of[u] == comp_of[v])
        if not (used - {v}) <= earlier | set(params):
            raise NotStageable(f"equation for {v} depends on unsolved variables")
        stages.append(Stage(i + 1, v, sys[v].quantifier, priors, params))
    return StagePlan(tuple(stages))


def _primed(v: str) -> str:
    return v + PRIME


def build_stage_formula(sys: FixpointSystem, plan: StagePlan, stage: int,
                        prior_qf: Mapping[str, Node] | Sequence[Node]) -> FOFormula:
    """Formula whose free variable is the stage target (plus any later parameters)."""
    if not 1 <= stage <= len(plan):
        raise QEError(f"stage {stage} out of range 1..{len(plan)}")
    st = plan[stage]
    if not isinstance(prior_qf, Mapping):
        prior_qf = {plan[i + 1].target: m for i, m in enumerate(prior_qf)}
    x = st.target
    later = {s.target for s in plan.stages[stage:]}
    # priors, closed under the variables their characterizations mention
    needed: list[str] = []
    todo = list(st.priors)
    while todo:
        u = todo.pop(0)
        if u in needed:
            continue
        if u not in prior_qf:
            raise QEError(f"missing characterization for {u}")
        needed.append(u)
        for w in sorted(node_variables(prior_qf[u]), key=var_key):
            if w != u and w != x and w not in later and w not in needed:
                todo.append(w)
    needed.sort(key=plan.position)

    rhs = sys[x].rhs
    mu = st.quantifier == MU
    eq = Atom(Poly.var(x), "=", rhs)
    prime_map = {v: _primed(v) for v in [x, *needed]}
    eq_p = rename_node(eq, prime_map)
    xp = _primed(x)
    cmp = Atom(Poly.var(xp), ">=" if mu else "<=", Poly.var(x))

    if not needed:
        matrix = Group(And([Group(eq), Group(Implies(eq_p, cmp))]))
        return FOFormula((("A", xp),), matrix)

    chars = [Group(prior_qf[u]) for u in needed]
    chars_p = [Group(rename_node(prior_qf[u], prime_map)) for u in needed]
    outer = list(chars) + [Group(eq)]
    premise = list(chars_p)
    if mu:
        outer.append(Group(Atom(Poly.var(x), "<=", Poly.const(1))))
        premise.append(Group(Atom(Poly.var(xp), "<=", Poly.const(1))))
    premise.append(Group(eq_p))
    outer.append(Group(Implies(Group(And(premise)), Group(cmp))))
    prefix = tuple([("E", u) for u in needed] + [("A", xp)] + [("A", _primed(u)) for u in needed])
    return FOFormula(prefix, Group(And(outer)))


# characterizations -------------------------------------------------------------

def simplest_between(above: Callable[[Fraction], bool], below: Callable[[Fraction], bool],
                     max_steps: int = 100_000) -> Fraction:
    """Simplest rational q with ``above(q)`` (q > lo) and ``below(q)`` (q < hi).

    Stern-Brocot descent on the sign-adjusted half line.
    """
    if above(Fraction(0)) and below(Fraction(0)):
        return Fraction(0)
    if not above(Fraction(0)):  # interval lies in the positives
        sign = 1
    else:
        sign = -1
    lo_pred = (lambda q: above(q)) if sign > 0 else (lambda q: below(-q))
    hi_pred = (lambda q: below(q)) if sign > 0 else (lambda q: above(-q))
    # integers first
    n = 1
    while not lo_pred(Fraction(n)):
        n *= 2
    lo_int = n // 2
    hi_int = n
    while hi_int - lo_int > 1:
        mid = (lo_int + hi_int) // 2
        if lo_pred(Fraction(mid)):
            hi_int = mid
        else:
            lo_int = mid
    if hi_pred(Fraction(hi_int)):
        return sign * Fraction(hi_int)
    a, b, c, d = lo_int, 1, lo_int + 1, 1  # bracket a/b < interval < c/d
    for _ in range(max_steps):
        m = Fraction(a + c, b + d)
        if not lo_pred(m):
            a, b = a + c, b + d
        elif not hi_pred(m):
            c, d = a + c, b + d
        else:
            return sign * m
    raise ArithmeticError("interval too narrow for a simple separating rational")


def exact_characterization(var: str, value) -> And:
    """``x - b < 0 /\\ m(x) = 0`` style characterization of an algebraic number."""
    from .exact.algebraic import AlgebraicNumber

    m = value.minimal_polynomial()
    x = Poly.var(var)
    atoms: list[Atom] = []
    if m.degree > 1:
        roots = [AlgebraicNumber.from_isolation(m, pr) for pr in m.isolate()]
        idx = next(i for i, r in enumerate(roots) if r == value)
        if idx > 0:
            lo = roots[idx - 1]
            b = simplest_between(lambda q: q > lo, lambda q: q < value)
            atoms.append(Atom(x - b, ">", Poly()))
        if idx + 1 < len(roots):
            hi = roots[idx + 1]
            b = simplest_between(lambda q: q > value, lambda q: q < hi)
            atoms.append(Atom(x - b, "<", Poly()))
    atoms.append(Atom(m.to_poly(var), "=", Poly()))
    return And(atoms)


def quadratic_characterization(sys: FixpointSystem, var: str) -> And:
    """Least (μ) / greatest (ν) root of a quadratic whose coefficients hold parameters.

    With ``E = a x^2 + b x + c`` and constant ``a > 0``, the least root is the
    one where ``dE/dx <= 0`` and the greatest where ``dE/dx >= 0``.
    """
    e = (sys[var].rhs - Poly.var(var)).integer_scaled()
    deg = e.degree(var)
    coeffs = e.coefficients(var)
    if deg == 1:
        return And([Atom(e, "=", Poly())])
    if deg != 2 or not coeffs[2].is_constant():
        raise NotStageable(f"no closed-form characterization for {var}")
    if coeffs[2].constant_term() < 0:
        e = -e
    rel = "<=" if sys[var].quantifier == MU else ">="
    return And([Atom(e.diff(var), rel, Poly()), Atom(e, "=", Poly())])


def run_qepcad(path: Path, command: str | None = None, timeout: float = 60.0) -> str | None:
    """Run an external qepcad on an input file and return its quantifier-free answer."""
    command = command or os.environ.get(QEPCAD_ENV)
    if not command:
        return None
    try:
        proc = subprocess.run(shlex.split(command), input=path.read_text(), capture_output=True,
                              text=True, timeout=timeout, check=False)
    except (OSError, subprocess.TimeoutExpired):
        return None
    lines = proc.stdout.splitlines()
    for i, line in enumerate(lines):
        if "An equivalent quantifier-free formula" in line:
            body = []
            for nxt in lines[i + 1:]:
                if nxt.strip().startswith("====="):
                    break
                if nxt.strip():
                    body.append(nxt.strip())
                elif body:
                    break
            return " ".join(body) or None
    return None


@dataclass
class ExportResult:
    files: list[Path]
    plan: StagePlan
    formulas: list[FOFormula]
    characterizations: dict[str, And]
    sources: dict[str, str]


def export_qe(sys: FixpointSystem, name: str, out_dir: Path | str, *, run: bool = False,
              command: str | None = None, timeout: float = 60.0) -> ExportResult:
    """Write ``<name>_stage<i>.qe`` for every stage.

    Characterizations of earlier stages are taken, in order of preference,
    from ``<name>_stage<i>.ans`` next to the output, from the external qepcad
    (only with ``run=True``), from the exact backend, or from the quadratic template.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plan = build_stage_plan(sys)
    chars: dict[str, And] = {}
    sources: dict[str, str] = {}
    files, formulas = [], []
    exact_values = {}

    def characterize(st: Stage, path: Path) -> None:
        allowed = {st.target, *st.params, *st.priors}
        ans = path.with_suffix(".ans")
        if ans.exists():
            chars[st.target] = ingest_qf_answer(ans.read_text(), allowed)
            sources[st.target] = "answer file"
            return
        text = run_qepcad(path, command, timeout) if run else None
        if text:
            chars[st.target] = ingest_qf_answer(text, allowed)
            sources[st.target] = "qepcad"
            return
        if not st.params:
            try:
                if not exact_values:
                    from .exact.solve import solve_exact
                    exact_values.update(solve_exact(sys).values)
                chars[st.target] = exact_characterization(st.target, exact_values[st.target])
                sources[st.target] = "exact backend"
                return
            except Exception as exc:  # fall through to the template
                last = exc
        else:
            last = None
        try:
            chars[st.target] = quadratic_characterization(sys, st.target)
            sources[st.target] = "quadratic template"
        except NotStageable as exc:
            raise NotStageable(f"cannot characterize {st.target}: {last or exc}") from exc

    for st in plan.stages:
        f = build_stage_formula(sys, plan, st.index, chars)
        path = out / f"{name}_stage{st.index}.qe"
        kind = "least" if st.quantifier == MU else "greatest"
        path.write_text(qepcad_input(f, f"{name} stage {st.index}: {kind} solution for {st.target}"))
        files.append(path)
        formulas.append(f)
        if st.index < len(plan):
            characterize(st, path)
    return ExportResult(files, plan, formulas, chars, sources)
