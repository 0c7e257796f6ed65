from fractions import Fraction

import pytest

from treemeasure.automata import AutomatonError, builtin, normalize_distinct_children
from treemeasure.mbp import (EXISTS, FORALL, MBP, PROBABILISTIC, MbpState, build_mbp, can_reach,
                             largest_closed, reachable_from, validate_mbp)


def test_l1_structure():
    m = build_mbp(builtin("L1"))
    assert m["q1"].kind == PROBABILISTIC
    assert m.successors("q1") == ("q1:a", "q1:b", "q1:c")
    assert all(p == Fraction(1, 3) for p in m.prob["q1"].values())
    assert m["q1:a"].kind == FORALL and m.successors("q1:a") == ("top", "top")
    assert m["q1:b"].priority == 1
    assert validate_mbp(m).ok


def test_or_transitions_make_exists_states():
    m = build_mbp(builtin("W", 0, 2))
    assert m["q0:∃,1"].kind == EXISTS
    assert m["q0:∀,1"].kind == FORALL
    assert validate_mbp(m).ok


def test_strict_requires_normalized():
    with pytest.raises(AutomatonError):
        build_mbp(builtin("L1"), strict=True)
    m = build_mbp(normalize_distinct_children(builtin("L1")), strict=True)
    assert validate_mbp(m).ok


def test_every_state_has_a_successor(corpus_pipeline):
    m = corpus_pipeline.mbp
    assert all(m.successors(s.id) for s in m.states)
    assert validate_mbp(m).ok


def test_validate_mbp_errors():
    states = [MbpState("p", PROBABILISTIC, 1), MbpState("b", FORALL, 1)]
    m = MBP(states, {"p": ["b"], "b": []}, {"p": {"b": Fraction(1, 2)}})
    codes = {e.code for e in validate_mbp(m).errors}
    assert {"no successor", "distribution not normalized"} <= codes


def test_reachability_helpers():
    m = build_mbp(builtin("L2"))
    assert "top" in reachable_from(m, "q2")
    assert "q2" not in reachable_from(m, "q1")
    with pytest.raises(KeyError):
        reachable_from(m, "nope")
    even = largest_closed(m, 0)
    assert "top" in even and "top:a" in even and "q1" not in even
    assert "q2" in can_reach(m, even)
    assert largest_closed(m, 1) == set()


def test_dump_is_deterministic():
    assert build_mbp(builtin("L1")).dump() == build_mbp(builtin("L1")).dump()
    assert "edge q1 -> q1:a:1/3 q1:b:1/3 q1:c:1/3" in build_mbp(builtin("L1")).dump()
