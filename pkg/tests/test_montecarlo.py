import math
from collections import Counter

import pytest

from treemeasure.automata import builtin
from treemeasure.mbp import FORALL, build_mbp
from treemeasure.montecarlo import (OPTIMISTIC, PESSIMISTIC, PlayNode, TruncatedPlay, UnsupportedMBP, estimate,
                                    evaluate_truncated, sample_branching_play)

M1 = build_mbp(builtin("L1"))
M2 = build_mbp(builtin("L2"))
L2_VALUE = (3 - math.sqrt(7)) / 4


def test_depth_one_distribution():
    n = 30_000
    counts = Counter(sample_branching_play(M1, "q1", 1, seed=7, index=i).root.children[0].state for i in range(n))
    assert set(counts) == {"q1:a", "q1:b", "q1:c"}
    chi2 = sum((c - n / 3) ** 2 / (n / 3) for c in counts.values())
    assert chi2 < 13.82  # 0.1% critical value, two degrees of freedom


def test_depth_zero_is_single_node():
    t = sample_branching_play(M1, "q1", 0)
    assert t.size() == 1 and t.root.state == "q1"


def test_branching_nodes_keep_all_children():
    m = build_mbp(builtin("Linf"))
    for i in range(20):
        t = sample_branching_play(m, "q1", 3, seed=3, index=i)
        for node, d in t.nodes():
            if m[node.state].kind == FORALL and d < 3:
                assert len(node.children) == 2
            if m[node.state].kind != FORALL and node.children:
                assert len(node.children) == 1


def test_sampling_is_deterministic():
    assert sample_branching_play(M2, "q2", 6, seed=11, index=4) == sample_branching_play(M2, "q2", 6, seed=11, index=4)


def test_leaf_resolution():
    top = TruncatedPlay(PlayNode("top"), 0)
    assert evaluate_truncated(top, M1, OPTIMISTIC) and evaluate_truncated(top, M1, PESSIMISTIC)
    cut = TruncatedPlay(PlayNode("q1"), 0)
    assert evaluate_truncated(cut, M1, OPTIMISTIC)
    assert not evaluate_truncated(cut, M1, PESSIMISTIC)
    with pytest.raises(ValueError):
        evaluate_truncated(cut, M1, "neutral")


def test_mixed_parity_rejected():
    m = build_mbp(builtin("Linf"))
    with pytest.raises(UnsupportedMBP, match="bracketing unsupported"):
        estimate(m, "q1", 5, 10)
    with pytest.raises(UnsupportedMBP):
        evaluate_truncated(sample_branching_play(m, "q1", 2), m, OPTIMISTIC)


def test_optimistic_dominates_pessimistic_per_play():
    for i in range(300):
        t = sample_branching_play(M2, "q2", 10, seed=5, index=i)
        assert evaluate_truncated(t, M2, OPTIMISTIC) >= evaluate_truncated(t, M2, PESSIMISTIC)


def test_trivial_estimate():
    e = estimate(M1, "q1", 0, 1, seed=0)
    assert e.optimistic_mean in (0.0, 1.0) and e.pessimistic_mean in (0.0, 1.0)
    assert e.optimistic_mean >= e.pessimistic_mean


def test_estimate_is_reproducible():
    assert estimate(M2, "q2", 12, 500, seed=9) == estimate(M2, "q2", 12, 500, seed=9)
    assert estimate(M2, "q2", 12, 500, seed=9) != estimate(M2, "q2", 12, 500, seed=10)


def test_argument_checks():
    with pytest.raises(ValueError):
        estimate(M1, "q1", 3, 0)
    with pytest.raises(ValueError):
        estimate(M1, "q1", 3, 5, seed=-1)
    with pytest.raises(ValueError):
        sample_branching_play(M1, "q1", -1)
    with pytest.raises(KeyError):
        estimate(M1, "nope", 3, 5)


def test_lazy_estimate_matches_full_trees():
    n, depth = 4000, 8
    full = [sample_branching_play(M2, "q2", depth, seed=21, index=i) for i in range(n)]
    p_full = sum(evaluate_truncated(t, M2, PESSIMISTIC) for t in full) / n
    e = estimate(M2, "q2", depth, n, seed=22)
    sigma = math.sqrt(max(p_full * (1 - p_full), 1e-4) * 2 / n)
    assert abs(e.pessimistic_mean - p_full) < 4 * sigma
    assert e.optimistic_mean == 1.0


def test_depth_monotonicity_with_paired_seeds():
    for d in (4, 10, 16):
        a = estimate(M1, "q1", d, 4000, seed=31)
        b = estimate(M1, "q1", d + 5, 4000, seed=31)
        sigma = math.sqrt(a.sigma_pessimistic ** 2 + b.sigma_pessimistic ** 2)
        assert b.pessimistic_mean >= a.pessimistic_mean - 3 * sigma
        assert b.optimistic_mean <= a.optimistic_mean + 3 * sigma + 1e-12


def test_pessimistic_approaches_half_from_below():
    means = [estimate(M1, "q1", d, 20_000, seed=1).pessimistic_mean for d in (6, 14, 30)]
    assert means[0] < means[1] < 0.5 + 0.01
    assert means[2] == pytest.approx(0.5, abs=0.01)


@pytest.mark.parametrize("m, s, value", [(M1, "q1", 0.5), (M2, "q2", L2_VALUE)])
def test_bracket_coverage_over_trials(m, s, value):
    hits = 0
    for trial in range(100):
        lo, hi = estimate(m, s, 24, 400, seed=1000 + trial).bracket(3.0)
        hits += lo <= value <= hi
    assert hits >= 99


def test_wilson_interval_near_zero():
    e = estimate(build_mbp(builtin("L3")), "q3", 6, 200, seed=2)
    assert e.pessimistic_mean == 0.0
    assert e.lo == 0.0 and e.ci_halfwidth > 0
