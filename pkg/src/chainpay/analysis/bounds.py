"""Objective bounds, sampled dominance tests, ratio bounds and partial sums."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from ..errors import ParameterOutOfRange
from ..mechanisms import DeltaGeom, GammaDeltaGeom
from ..properties import SampleClass, sample_mechanism
from ..rational import RationalLike, to_rational

__all__ = [
    "Objective",
    "objective_bound",
    "DominanceReport",
    "dominance_test",
    "BoundPair",
    "bound_pair",
    "RatioBoundsReport",
    "ratio_bounds_check",
    "PartialSumReport",
    "partial_sum_check",
]


class Objective(str, enum.Enum):
    MINCOST = "MINCOST"
    MAXLEAF = "MAXLEAF"


def _delta(delta: RationalLike) -> Fraction:
    delta = to_rational(delta)
    if not 0 < delta < 1:
        raise ParameterOutOfRange(f"delta must lie in (0, 1), got {delta}")
    return delta


def objective_bound(
    objective: Objective | str,
    delta: RationalLike,
    t: int,
    gamma: RationalLike | None = None,
    r_max: RationalLike = 1,
) -> Fraction:
    """MINCOST: least possible chain total. MAXLEAF: largest possible leaf reward.

    The MINCOST floor follows from delta-SCR and gamma-SEC, the MAXLEAF
    ceiling from delta-SCR and BB.
    """
    objective = Objective(objective)
    delta, r_max = _delta(delta), to_rational(r_max)
    if t < 1:
        raise ParameterOutOfRange("t must be >= 1")
    if objective is Objective.MINCOST:
        if gamma is None:
            raise ParameterOutOfRange("MINCOST bound needs gamma")
        gamma = to_rational(gamma)
        if not 0 < gamma <= 1:
            raise ParameterOutOfRange(f"gamma must lie in (0, 1], got {gamma}")
        return gamma * r_max * (1 - delta**t) / (1 - delta)
    return (1 - delta) / (1 - delta**t) * r_max


@dataclass
class DominanceReport:
    objective: Objective
    delta: Fraction
    gamma: Optional[Fraction]
    t_max: int
    samples: int
    counterexamples: list[tuple[int, int, Fraction, Fraction]] = field(default_factory=list)
    tight: list[tuple[int, int]] = field(default_factory=list)
    tight_geometric: bool = True
    best_leaf: dict[int, Fraction] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.counterexamples


def dominance_test(
    objective: Objective | str,
    delta: RationalLike,
    gamma: RationalLike | None = None,
    t_max: int = 20,
    samples: int = 1000,
    seed: int = 0,
    epsilon: RationalLike | None = None,
    reference: Optional[Callable[[int], Fraction]] = None,
    r_max: RationalLike = 1,
) -> DominanceReport:
    """Compare sampled mechanisms against the geometric optimum, exactly.

    MINCOST samples {delta-SCR, gamma-SEC, BB} and requires every chain total
    to be at least the reference. MAXLEAF samples {delta-SCR, BB} and requires
    every leaf to be at most the reference. ``reference`` overrides the
    geometric value per ``t`` (used to self-test the harness). Each entry of
    ``counterexamples`` is ``(sample, t, sample_value, reference_value)``.
    """
    objective = Objective(objective)
    delta, r_max = _delta(delta), to_rational(r_max)
    if epsilon is not None:
        epsilon = to_rational(epsilon)
        if delta > epsilon / (1 + epsilon):
            raise ParameterOutOfRange(
                f"delta={delta} exceeds epsilon/(1+epsilon)={epsilon / (1 + epsilon)}"
            )
    if objective is Objective.MINCOST:
        if gamma is None:
            raise ParameterOutOfRange("MINCOST dominance needs gamma")
        gamma = to_rational(gamma)
        cls = SampleClass(delta, gamma, budget_balanced=True)
        geom = GammaDeltaGeom(r_max, gamma=gamma, delta=delta)
        ref = reference or geom.chain_total
    else:
        cls = SampleClass(delta, None, budget_balanced=True)
        geom = DeltaGeom(r_max, delta=delta)
        ref = reference or geom.leaf

    refs = {t: ref(t) for t in range(1, t_max + 1)}
    report = DominanceReport(objective, delta, gamma, t_max, samples)
    for i in range(samples):
        mech = sample_mechanism(cls, t_max, seed=(seed << 32) + i, r_max=r_max)
        for t in range(1, t_max + 1):
            if objective is Objective.MINCOST:
                value = mech.chain_total(t)
                bad = value < refs[t]
            else:
                value = mech.reward(t, t)
                bad = value > refs[t]
                if t not in report.best_leaf or value > report.best_leaf[t]:
                    report.best_leaf[t] = value
            if bad:
                report.counterexamples.append((i, t, value, refs[t]))
            elif value == refs[t]:
                report.tight.append((i, t))
                if mech.chain_payments(t) != geom.chain_payments(t):
                    report.tight_geometric = False
    return report


@dataclass(frozen=True)
class BoundPair:
    a: Fraction
    b: Fraction


def bound_pair(
    delta: RationalLike, epsilon: RationalLike, n: int, t: int, r_max: RationalLike = 1
) -> BoundPair:
    """The two ceilings on ``R(t+n, t+n)``: via eps-DSP from ``R(t,t)`` (a) and directly (b)."""
    d, e, r = _delta(delta), to_rational(epsilon), to_rational(r_max)
    a = (1 + e) * (1 - d) ** 2 / ((1 - d ** (n + 1)) * (1 - d**t)) * r
    b = (1 - d) / (1 - d ** (t + n)) * r
    return BoundPair(a, b)


@dataclass
class RatioBoundsReport:
    delta: Fraction
    epsilon: Fraction
    n_max: int
    t_max: int
    checked: int = 0
    bound_violations: list[tuple[int, int, Fraction]] = field(default_factory=list)
    dominance_failures: list[tuple[int, int]] = field(default_factory=list)

    @property
    def dominance_expected(self) -> bool:
        return self.delta <= self.epsilon / (1 + self.epsilon)

    @property
    def passed(self) -> bool:
        if self.bound_violations:
            return False
        return not (self.dominance_expected and self.dominance_failures)


def ratio_bounds_check(
    delta: RationalLike, epsilon: RationalLike, n_max: int, t_max: int
) -> RatioBoundsReport:
    """Check ``1/(1+e) <= B/A <= 1/((1+e)(1-d))`` and ``A >= B`` over ``n <= n_max, t <= t_max``."""
    d, e = _delta(delta), to_rational(epsilon)
    if e <= 0:
        raise ParameterOutOfRange("epsilon must be positive")
    lo, hi = 1 / (1 + e), 1 / ((1 + e) * (1 - d))
    report = RatioBoundsReport(d, e, n_max, t_max)
    for n in range(1, n_max + 1):
        for t in range(1, t_max + 1):
            pair = bound_pair(d, e, n, t)
            ratio = pair.b / pair.a
            report.checked += 1
            if not lo <= ratio <= hi:
                report.bound_violations.append((n, t, ratio))
            if pair.a < pair.b:
                report.dominance_failures.append((n, t))
    return report


@dataclass(frozen=True)
class PartialSumReport:
    delta: Fraction
    t: int
    terms: tuple[Fraction, ...]
    partial_sums: tuple[Fraction, ...]

    @property
    def total_zero(self) -> bool:
        return sum(self.terms, Fraction(0)) == 0

    @property
    def partial_nonnegative(self) -> bool:
        return all(s >= 0 for s in self.partial_sums)

    @property
    def sign_pattern(self) -> bool:
        half = self.t // 2
        return all(
            (a >= 0) if k <= half else (a <= 0)
            for k, a in enumerate(self.terms, start=1)
        )

    @property
    def passed(self) -> bool:
        return self.total_zero and self.partial_nonnegative and self.sign_pattern


def partial_sum_check(delta: RationalLike, t: int, p: Optional[int] = None) -> PartialSumReport:
    """Terms ``a_k = d^k - d^(t-k)`` for ``k < t`` and their partial sums.

    With ``p`` given only the partial sums up to ``p`` are kept.
    """
    d = _delta(delta)
    if t < 1:
        raise ParameterOutOfRange("t must be >= 1")
    if p is not None and not 1 <= p <= t - 1:
        raise ParameterOutOfRange(f"need 1 <= p <= t-1, got p={p}, t={t}")
    terms = tuple(d**k - d ** (t - k) for k in range(1, t))
    sums = []
    running = Fraction(0)
    for a in terms[: p if p is not None else len(terms)]:
        running += a
        sums.append(running)
    return PartialSumReport(d, t, terms, tuple(sums))
