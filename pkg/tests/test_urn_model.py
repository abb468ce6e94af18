"""Exact urn DP identities and the equivalence with the partition statistics."""

from fractions import Fraction

import pytest

from dpqcount import exact_analysis, harness, urn_model
from dpqcount.urn_model import UrnComposition


def test_initial_and_first_step():
    dist = urn_model.initial_distribution()
    assert dist.step == 0
    assert dist.table == {UrnComposition(0, 0, 0): Fraction(1)}
    one = urn_model.dp_step(dist)
    assert one.step == 1
    assert one.table == {
        UrnComposition(1, 0, 0): Fraction(1, 3),
        UrnComposition(0, 1, 0): Fraction(1, 3),
        UrnComposition(0, 0, 1): Fraction(1, 3),
    }


def test_step_two_uniform_one_sixth():
    two = urn_model.distribution_at(2)
    assert len(two.table) == 6
    assert all(p == Fraction(1, 6) for p in two.table.values())


def test_uniformity_and_mass_conservation():
    dist = urn_model.initial_distribution()
    for i in range(31):
        dist.check()  # support shape and exact unit mass
        target = urn_model.uniform_probability(i)
        assert all(p == target for p in dist.table.values()), i
        dist = urn_model.dp_step(dist)


def test_prob_l_gt_s_values():
    assert urn_model.prob_L_gt_S(0) == 0
    assert urn_model.prob_L_gt_S(1) == Fraction(1, 3)
    assert urn_model.prob_L_gt_S(2) == Fraction(1, 3)
    for i in range(0, 61):
        if i % 2 == 0:
            expected = Fraction(i, 2 * (i + 1))
        else:
            expected = Fraction(i + 1, 2 * (i + 2))
        assert urn_model.prob_L_gt_S(i) == expected, i


def test_prob_up_and_l_gt_s_values():
    assert urn_model.prob_up_and_L_gt_S(1) == Fraction(1, 6)
    assert urn_model.prob_up_and_L_gt_S(2) == Fraction(1, 6)
    for i in range(1, 61):
        if i % 2 == 0:
            expected = Fraction(i, 4 * (i + 1))
        else:
            expected = Fraction(i + 1, 4 * (i + 2))
        assert urn_model.prob_up_and_L_gt_S(i) == expected, i
    with pytest.raises(ValueError):
        urn_model.prob_up_and_L_gt_S(0)


def test_conditional_probability_is_one_half():
    for i in range(1, 61):
        joint = urn_model.prob_up_and_L_gt_S(i)
        marginal = urn_model.prob_L_gt_S(i)
        assert joint / marginal == Fraction(1, 2), i


def test_prob_smallup_values():
    assert urn_model.prob_smallup_and_L_gt_S(1) == Fraction(1, 12)
    assert urn_model.prob_smallup_and_L_gt_S(2) == Fraction(1, 15)
    assert urn_model.prob_smallup_and_L_gt_S(3) == Fraction(1, 12)
    for i in range(1, 61):
        if i % 2 == 0:
            expected = Fraction(i * (i + 4), 12 * (i + 1) * (i + 3))
        else:
            expected = Fraction(1, 12)
        assert urn_model.prob_smallup_and_L_gt_S(i) == expected, i
    with pytest.raises(ValueError):
        urn_model.prob_smallup_and_L_gt_S(0)


def test_expected_splus():
    assert urn_model.expected_splus(2) == 0
    assert urn_model.expected_splus(3) == 0
    assert urn_model.expected_splus(4) == Fraction(1, 12)
    assert urn_model.expected_splus(10) == exact_analysis.mean_splus(10)
    for n in range(2, 81):
        assert urn_model.expected_splus(n) == exact_analysis.mean_splus(n), n
    with pytest.raises(ValueError):
        urn_model.expected_splus(1)


def test_expected_lplus_minus_mplus_equals_splus():
    assert urn_model.expected_lplus_minus_mplus(3) == 0
    assert urn_model.expected_lplus_minus_mplus(4) == Fraction(1, 12)
    for n in range(2, 201):
        assert (urn_model.expected_lplus_minus_mplus(n)
                == urn_model.expected_splus(n)), n


def test_aggregates_match_direct_dp_chain():
    # the cached sweep agrees with quantities recomputed from the public
    # dp_step chain plus the transition kernel, at a few steps
    for i in (1, 2, 5, 8, 13):
        dist = urn_model.distribution_at(i)
        balls = i + 3
        lgs = sum((p for (s, m, l), p in dist.table.items() if l > s), Fraction(0))
        up_l = sum((p * Fraction(l + 1, balls) for (s, m, l), p in dist.table.items() if l > s),
                   Fraction(0))
        up_s = sum((p * Fraction(s + 1, balls) for (s, m, l), p in dist.table.items() if l > s),
                   Fraction(0))
        assert urn_model.prob_L_gt_S(i) == lgs
        assert urn_model.prob_up_and_L_gt_S(i) == up_l
        assert urn_model.prob_smallup_and_L_gt_S(i) == up_s


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8])
def test_sublist_sizes_match_urn_distribution(n):
    # exhaustive distribution of the first-partition sublist sizes equals the
    # urn composition distribution after n-2 steps, exactly
    sort_dist = harness.exhaustive_partition_distribution(n)
    urn_dist = urn_model.distribution_at(n - 2).table
    assert sort_dist == urn_dist
