from fractions import Fraction

import pytest

from treemeasure.automata import builtin, normalize_distinct_children
from treemeasure.fixpoint import (GENERAL, LINEAR, MU, NU, TRIANGULAR, Equation, FixpointSystem, apply_g,
                                  build_system, classify, simplify)
from treemeasure.mbp import build_mbp
from treemeasure.pipeline import run_pipeline
from treemeasure.poly import X

EXPECTED = {
    "L1": ["x1 ≛μ 1/3 + 2/3 x1^2"],
    "L2": ["x1 ≛μ 1/3 + 2/3 x1^2", "x2 ≛μ 1/3 x1^2 + 2/3 x2^2"],
    "L3": ["x1 ≛μ 1/3 + 2/3 x1^2", "x2 ≛μ 1/3 x1^2 + 2/3 x2^2", "x3 ≛μ 1/3 x2^2 + 2/3 x3^2"],
    "Linf": ["x1 ≛μ 1/3 x2^2 + 2/3 x1^2", "x2 ≛ν 1/3 x2^2 + 2/3 x1^2"],
}


@pytest.mark.parametrize("name", list(EXPECTED))
def test_simplified_systems(name):
    assert run_pipeline(builtin(name)).system.format().splitlines() == EXPECTED[name]


@pytest.mark.parametrize("name", list(EXPECTED))
def test_normalization_does_not_change_the_system(name):
    a = normalize_distinct_children(builtin(name))
    assert run_pipeline(a).system.format().splitlines() == EXPECTED[name]


def test_w_system_is_linear_and_mixed():
    p = run_pipeline(builtin("W", 1, 3))
    rhs = {e.rhs.format() for e in p.system.equations}
    assert rhs == {"1/3 x1 + 1/3 x2 + 1/3 x3"}
    c = classify(p.system)
    assert c.mixed and c.structure == LINEAR


def test_classification():
    assert classify(run_pipeline(builtin("L3")).system).structure == TRIANGULAR
    c = classify(run_pipeline(builtin("Linf")).system)
    assert c.mixed and c.structure == GENERAL
    assert str(classify(run_pipeline(builtin("L1")).system)) == "all_mu, triangular"


def test_raw_system_quantifiers_follow_priority():
    raw = build_system(build_mbp(builtin("Linf")))
    for e in raw.equations:
        assert e.quantifier == (MU if e.priority % 2 else NU)
    assert raw.basket_order == [2, 1]


def test_equation_rejects_wrong_quantifier():
    with pytest.raises(ValueError):
        Equation("x", X("x"), 1, NU)


def test_undefined_variable_rejected():
    with pytest.raises(ValueError):
        FixpointSystem.from_rows([("x", X("y"), 1)])


def test_bindings_recover_every_state(corpus_pipeline):
    from treemeasure.numeric import solve_numeric
    p = corpus_pipeline
    simple = solve_numeric(p.system).as_dict()
    raw = solve_numeric(p.raw).as_dict()
    for state, binding in p.system.bindings.items():
        assert float(binding.evaluate(simple)) == pytest.approx(raw[state], abs=1e-7), state


def test_apply_g_dimension_check():
    sys = run_pipeline(builtin("L1")).system
    assert apply_g(sys, [Fraction(1, 2)]) == [Fraction(1, 2)]
    with pytest.raises(ValueError):
        apply_g(sys, [0, 0])


def test_simplify_is_idempotent(corpus_pipeline):
    s = corpus_pipeline.system
    assert simplify(s) == s


def test_hand_written_degenerate_system():
    s = simplify(FixpointSystem.from_rows([("x", 0, 1)], target="x"))
    assert len(s) == 0
    assert s.bindings["x"].constant_term() == 0


def test_scc_order_dependencies_first():
    s = FixpointSystem.from_rows([("a", X("b") * X("a"), 1), ("b", X("b") ** 2, 1)])
    assert s.scc_order() == [["b"], ["a"]]
