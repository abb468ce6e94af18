"""Exact dynamic programming for a three-color urn with identity replacement.

The urn starts with one ball of each of three types (small, medium, large).
Each step draws a ball uniformly and returns it together with one extra ball
of the same type.  The composition after i steps, counted as balls *added*
per type, is distributed exactly like the class counts of the first i
elements classified by the dual-pivot partition stage, which is what makes
this module an independent oracle for the partition statistics.

Everything here is exact rational arithmetic; there is no sampling.  The
public ``dp_step`` works on ``Fraction`` tables.  The identity queries are
backed by an incremental sweep that stores integer numerators over the known
common denominator (i+2)!/2, which keeps the big-number work cheap, and
converts to ``Fraction`` at the boundary.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, NamedTuple

__all__ = [
    "UrnComposition",
    "StateDistribution",
    "initial_distribution",
    "dp_step",
    "distribution_at",
    "uniform_probability",
    "prob_L_gt_S",
    "prob_up_and_L_gt_S",
    "prob_smallup_and_L_gt_S",
    "expected_splus",
    "expected_lplus",
    "expected_lplus_minus_mplus",
]


class UrnComposition(NamedTuple):
    """Balls added per type after some number of steps (urn holds one more of each)."""

    s: int
    m: int
    l: int


@dataclass(frozen=True)
class StateDistribution:
    """Exact probability table over compositions at a fixed step."""

    step: int
    table: Dict[UrnComposition, Fraction]

    def total_mass(self) -> Fraction:
        return sum(self.table.values(), Fraction(0))

    def check(self) -> None:
        """Verify the support is exactly {s+m+l = step, all >= 0} with mass one."""
        for comp in self.table:
            if comp.s < 0 or comp.m < 0 or comp.l < 0 or comp.s + comp.m + comp.l != self.step:
                raise AssertionError(f"invalid composition {comp} at step {self.step}")
        expected_support = (self.step + 1) * (self.step + 2) // 2
        if len(self.table) != expected_support:
            raise AssertionError(
                f"support size {len(self.table)} != {expected_support} at step {self.step}")
        if self.total_mass() != 1:
            raise AssertionError(f"probability mass {self.total_mass()} != 1")


def initial_distribution() -> StateDistribution:
    """Step-0 distribution: nothing added yet, with certainty."""
    return StateDistribution(0, {UrnComposition(0, 0, 0): Fraction(1)})


def dp_step(dist: StateDistribution) -> StateDistribution:
    """Advance the exact distribution by one draw.

    From (s, m, l) at step i the urn holds i+3 balls, so a ball of the small
    type is added with probability (s+1)/(i+3), and likewise for the others.
    """
    i = dist.step
    balls = i + 3
    table: Dict[UrnComposition, Fraction] = {}
    for (s, m, l), pr in dist.table.items():
        for target, weight in (
            (UrnComposition(s + 1, m, l), s + 1),
            (UrnComposition(s, m + 1, l), m + 1),
            (UrnComposition(s, m, l + 1), l + 1),
        ):
            contribution = pr * Fraction(weight, balls)
            if target in table:
                table[target] += contribution
            else:
                table[target] = contribution
    return StateDistribution(i + 1, table)


def distribution_at(i: int) -> StateDistribution:
    """The exact distribution after i steps, built by repeated dp_step."""
    if i < 0:
        raise ValueError("step must be non-negative")
    dist = initial_distribution()
    for _ in range(i):
        dist = dp_step(dist)
    return dist


def uniform_probability(i: int) -> Fraction:
    """Common probability 2/((i+1)(i+2)) of every composition at step i."""
    return Fraction(2, (i + 1) * (i + 2))


class _AggregateSweep:
    """Incremental exact sweep caching the per-step joint probabilities.

    State probabilities at step i are integer numerators over (i+2)!/2.  The
    cached aggregates per step i are

        p_lgs[i]   = P(L_i > S_i)
        p_s_up[i]  = P(L_i > S_i, a small ball is added at step i+1)
        p_m_up[i]  = the same for a medium ball
        p_l_up[i]  = the same for a large ball

    where the joint events use the transition kernel on the step-i table, so
    no state augmentation is needed.
    """

    def __init__(self) -> None:
        self.lock = threading.Lock()
        self.step = 0
        self.denom = 1
        self.table: Dict[UrnComposition, int] = {UrnComposition(0, 0, 0): 1}
        self.p_lgs: list[Fraction] = []
        self.p_s_up: list[Fraction] = []
        self.p_m_up: list[Fraction] = []
        self.p_l_up: list[Fraction] = []
        self._cum_s_up: list[Fraction] = [Fraction(0)]   # prefix sums over i >= 1
        self._cum_l_up: list[Fraction] = [Fraction(0)]
        self._cum_m_up: list[Fraction] = [Fraction(0)]
        self._aggregate(0)

    def _aggregate(self, step: int) -> None:
        balls = step + 3
        lgs = 0
        s_up = 0
        m_up = 0
        l_up = 0
        for (s, m, l), w in self.table.items():
            if l > s:
                lgs += w
                s_up += w * (s + 1)
                m_up += w * (m + 1)
                l_up += w * (l + 1)
        joint_denom = self.denom * balls
        self.p_lgs.append(Fraction(lgs, self.denom))
        self.p_s_up.append(Fraction(s_up, joint_denom))
        self.p_m_up.append(Fraction(m_up, joint_denom))
        self.p_l_up.append(Fraction(l_up, joint_denom))
        if step >= 1:
            self._cum_s_up.append(self._cum_s_up[-1] + self.p_s_up[step])
            self._cum_m_up.append(self._cum_m_up[-1] + self.p_m_up[step])
            self._cum_l_up.append(self._cum_l_up[-1] + self.p_l_up[step])

    def _advance(self) -> None:
        balls = self.step + 3
        new: Dict[UrnComposition, int] = {}
        for (s, m, l), w in self.table.items():
            for target, weight in (
                (UrnComposition(s + 1, m, l), s + 1),
                (UrnComposition(s, m + 1, l), m + 1),
                (UrnComposition(s, m, l + 1), l + 1),
            ):
                contribution = w * weight
                if target in new:
                    new[target] += contribution
                else:
                    new[target] = contribution
        self.table = new
        self.denom *= balls
        self._aggregate(self.step + 1)
        # published last: readers gate on step, so every aggregate up to the
        # new value must already be in place
        self.step += 1

    def ensure(self, i: int) -> None:
        if self.step >= i:
            return
        with self.lock:
            while self.step < i:
                self._advance()


_SWEEP = _AggregateSweep()


def prob_L_gt_S(i: int) -> Fraction:
    """P(more large than small balls added after i steps)."""
    if i < 0:
        raise ValueError("step must be non-negative")
    _SWEEP.ensure(i)
    return _SWEEP.p_lgs[i]


def prob_up_and_L_gt_S(i: int) -> Fraction:
    """P(large leads small at step i and the step-(i+1) draw adds a large ball)."""
    if i < 1:
        raise ValueError("the joint probability is defined for i >= 1")
    _SWEEP.ensure(i)
    return _SWEEP.p_l_up[i]


def prob_smallup_and_L_gt_S(i: int) -> Fraction:
    """P(large leads small at step i and the step-(i+1) draw adds a small ball)."""
    if i < 1:
        raise ValueError("the joint probability is defined for i >= 1")
    _SWEEP.ensure(i)
    return _SWEEP.p_s_up[i]


def _prob_medup_and_L_gt_S(i: int) -> Fraction:
    if i < 1:
        raise ValueError("the joint probability is defined for i >= 1")
    _SWEEP.ensure(i)
    return _SWEEP.p_m_up[i]


def expected_splus(n: int) -> Fraction:
    """Expected small-classified-q-first count for input size n, as a DP sum.

    Sums the joint small-up probabilities over steps 1..n-3 (empty for
    n <= 3).  Must agree with the closed form ``exact_analysis.mean_splus``.
    """
    if n < 2:
        raise ValueError("expected_splus requires n >= 2")
    if n <= 3:
        return Fraction(0)
    _SWEEP.ensure(n - 3)
    return _SWEEP._cum_s_up[n - 3]


def expected_lplus(n: int) -> Fraction:
    """Expected large-classified-q-first count for input size n (DP sum)."""
    if n < 2:
        raise ValueError("expected_lplus requires n >= 2")
    if n <= 3:
        return Fraction(0)
    _SWEEP.ensure(n - 3)
    return _SWEEP._cum_l_up[n - 3]


def expected_lplus_minus_mplus(n: int) -> Fraction:
    """DP value of E[(large q-first) - (medium q-first)]; equals expected_splus."""
    if n < 2:
        raise ValueError("expected_lplus_minus_mplus requires n >= 2")
    if n <= 3:
        return Fraction(0)
    _SWEEP.ensure(n - 3)
    return _SWEEP._cum_l_up[n - 3] - _SWEEP._cum_m_up[n - 3]
