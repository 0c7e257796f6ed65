"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL`` line with its measured
runtime.  Run ``python tests/test_acceptance.py`` for the bare table.
"""

import math
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import CORPUS, GOLDEN, pipeline_for  # noqa: E402
from randomgen import random_deterministic  # noqa: E402
from treemeasure.automata import builtin  # noqa: E402
from treemeasure.exact import (AlgebraicNumber, IntPoly, solve_exact, wik_determinant,  # noqa: E402
                               wik_pipeline_value, wik_value)
from treemeasure.fixpoint import apply_g  # noqa: E402
from treemeasure.mbp import build_mbp  # noqa: E402
from treemeasure.montecarlo import estimate  # noqa: E402
from treemeasure.numeric import solve_numeric  # noqa: E402
from treemeasure.pipeline import run_pipeline  # noqa: E402
from treemeasure.qe import export_qe, formula_from_input, normalize_ws  # noqa: E402

L2_VALUE = (3 - math.sqrt(7)) / 4
L3_VALUE = (3 - math.sqrt(1 + 3 * math.sqrt(7))) / 4


def _solve(name):
    p = run_pipeline(builtin(name))
    ex = solve_exact(p.system).evaluate(p.target_binding)
    num = solve_numeric(p.system)
    return ex, float(p.value_from(num.as_dict())), num.converged


def criterion_1():
    ex, num, conv = _solve("L1")
    ok = ex == Fraction(1, 2) and ex.minimal_polynomial() == IntPoly([-1, 2]) and conv and abs(num - 0.5) <= 1e-9
    return ok, f"exact {ex.format()}, numeric {num:.12g}", 1.0


def criterion_2():
    ex, num, conv = _solve("L2")
    ok = (ex.minimal_polynomial() == IntPoly([1, -12, 8]) and abs(float(ex) - L2_VALUE) <= 1e-9
          and conv and abs(num - L2_VALUE) <= 1e-9)
    return ok, f"{ex.format()}, numeric {num:.12g}", 1.0


def criterion_3():
    ex, num, conv = _solve("L3")
    quartic = IntPoly([1, -384, 832, -768, 256])
    m = ex.minimal_polynomial()
    irreducible = [f.degree for f in m.factors()] == [4]
    ok = m == quartic and irreducible and abs(float(ex) - L3_VALUE) <= 1e-9 and conv and abs(num - L3_VALUE) <= 1e-9
    return ok, f"{ex.format()}, degree-4 irreducible: {irreducible}", 5.0


def criterion_4():
    p = run_pipeline(builtin("Linf"))
    mixed = p.classification.mixed
    ex = solve_exact(p.system).evaluate(p.target_binding)
    num = float(p.value_from(solve_numeric(p.system).as_dict()))
    ok = mixed and ex == 0 and ex.is_rational and num <= 1e-9
    return ok, f"class {p.classification}, exact {ex.format()}, numeric {num:.3g}", 5.0


def criterion_5():
    cases = [(1, 3, 0), (1, 5, 0), (0, 3, 0), (0, 2, 1), (1, 2, 1), (1, 4, 1)]
    bad = [(i, k) for i, k, want in cases if not (wik_value(i, k) == want == wik_pipeline_value(i, k))]
    return not bad, "all six cases agree" if not bad else f"mismatch {bad}", 10.0


def criterion_6():
    bad = [k for k in range(3, 13) if wik_determinant(k) != Fraction((-1) ** (k - 1), k)]
    return not bad, f"det A_3 = {wik_determinant(3)}, det A_12 = {wik_determinant(12)}", 1.0


def criterion_7():
    cases = [("L2", 1, "L2_phi1"), ("L2", 2, "L2_phi2"), ("L3", 3, "L3_phi3"),
             ("Linf", 1, "Linf_psi1"), ("Linf", 2, "Linf_psi2")]
    bad = []
    with tempfile.TemporaryDirectory() as tmp:
        for name, stage, golden in cases:
            res = export_qe(run_pipeline(builtin(name)).system, name, Path(tmp) / name)
            got = formula_from_input(res.files[stage - 1].read_text())
            if normalize_ws(got) != normalize_ws((GOLDEN / f"{golden}.qe").read_text()):
                bad.append(golden)
    return not bad, "5 golden formulas match" if not bad else f"mismatch {bad}", None


def criterion_8():
    m1, m2 = build_mbp(builtin("L1")), build_mbp(builtin("L2"))
    e1 = estimate(m1, "q1", 30, 100_000, seed=0)
    e2 = estimate(m2, "q2", 40, 100_000, seed=0)
    width = e1.optimistic_mean - e1.pessimistic_mean
    contains1 = e1.contains(0.5)
    narrow = width < 0.05
    contains2 = e2.contains(0.0886)
    ok = contains1 and narrow and contains2
    detail = (f"M1 [{e1.lo:.4f}, {e1.hi:.4f}] contains 0.5: {contains1}, "
              f"width {width:.4f} < 0.05: {narrow}; M2 [{e2.lo:.4f}, {e2.hi:.4f}] contains 0.0886: {contains2}")
    return ok, detail, 30.0


def criterion_9():
    failures = []
    for entry in CORPUS:
        p = pipeline_for(entry)
        raw = p.raw
        compiled = [e.rhs.compile(raw.var_index) for e in raw.equations]
        rng = np.random.default_rng(9)
        for _ in range(1000):
            u = rng.random(len(raw))
            v = np.minimum(1.0, u + rng.random(len(raw)))
            if any(f(list(u)) > f(list(v)) + 1e-12 for f in compiled):
                failures.append(f"g-monotonicity {entry}")
                break
        if abs(float(p.value_from(solve_numeric(p.system).as_dict())) - solve_numeric(raw)[p.start]) > 1e-8:
            failures.append(f"simplify {entry}")
        ex = solve_exact(p.system)
        num = solve_numeric(p.system).as_dict()
        if any(abs(float(ex[v]) - num[v]) > 1e-9 for v in p.system.variables):
            failures.append(f"exact-vs-numeric {entry}")
    for name in ("L1", "L2", "L3"):
        s = pipeline_for(name).system
        x = [Fraction(0)] * len(s)
        for _ in range(10):
            nxt = apply_g(s, x)
            if any(a > b for a, b in zip(x, nxt)):
                failures.append(f"mu-iterates {name}")
            x = nxt
    f = IntPoly([1, -384, 832, -768, 256])
    for pair in f.isolate():
        a = AlgebraicNumber.from_isolation(f, pair)
        prev = a.interval
        for k in range(2, 120, 7):
            cur = a.refine(Fraction(1, 2 ** k))
            if not (prev[0] <= cur[0] <= cur[1] <= prev[1]):
                failures.append("refine nesting")
            prev = cur
    return not failures, "all property checks hold" if not failures else ", ".join(failures), None


def criterion_10():
    rng = np.random.default_rng(10)
    outside = []
    for j in range(50):
        a = random_deterministic(rng, max_states=3, alphabet=("a", "b"), odd_only=True)
        p = run_pipeline(a)
        value = float(p.value_from(solve_numeric(p.system).as_dict()))
        lo, hi = estimate(p.mbp, p.start, 30, 2000, seed=j).bracket(3.0)
        if not lo <= value <= hi:
            outside.append((j, value, lo, hi))
    return not outside, "50/50 inside the 3-sigma bracket" if not outside else f"outside: {outside}", 120.0


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def run_criterion(n: int):
    t0 = time.perf_counter()
    ok, detail, budget = CRITERIA[n - 1]()
    elapsed = time.perf_counter() - t0
    in_time = budget is None or elapsed < budget
    limit = f" (limit {budget:g}s)" if budget else ""
    line = f"criterion {n}: {'PASS' if ok and in_time else 'FAIL'}  {elapsed:.2f}s{limit}  {detail}"
    return ok, in_time, line


@pytest.mark.parametrize("n", range(1, len(CRITERIA) + 1))
def test_criterion(n, capsys):
    ok, in_time, line = run_criterion(n)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line
    assert in_time, line


if __name__ == "__main__":
    results = [run_criterion(n) for n in range(1, len(CRITERIA) + 1)]
    for _, _, line in results:
        print(line)
    sys.exit(0 if all(ok and t for ok, t, _ in results) else 1)
