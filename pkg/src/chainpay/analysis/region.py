"""Membership in the (delta, epsilon, gamma) region where the MINCOST characterization holds."""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..errors import ParameterOutOfRange
from ..mechanisms import WTA, GammaDeltaGeom, Mechanism
from ..properties import CheckReport, Kind, PropertySpec, certify_geometric
from ..rational import RationalLike, fmt, to_rational

__all__ = [
    "RegionPoint",
    "RegionVerdict",
    "RegionGrid",
    "in_region",
    "region_mechanism",
    "certify_suite",
    "region_membership",
    "region_scan",
    "grid_values",
]


@dataclass(frozen=True)
class RegionPoint:
    """``delta = 0`` is accepted and stands for the winner-takes-all floor."""

    delta: Fraction
    epsilon: Fraction
    gamma: Fraction

    def __post_init__(self) -> None:
        for name in ("delta", "epsilon", "gamma"):
            object.__setattr__(self, name, to_rational(getattr(self, name)))
        if not 0 <= self.delta < 1:
            raise ParameterOutOfRange(f"delta must lie in [0, 1), got {self.delta}")
        if not self.epsilon > 0:
            raise ParameterOutOfRange(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.gamma <= 1:
            raise ParameterOutOfRange(f"gamma must lie in (0, 1], got {self.gamma}")


def in_region(pt: RegionPoint) -> bool:
    return pt.delta <= min(1 - pt.gamma, pt.epsilon / (1 + pt.epsilon))


def region_mechanism(pt: RegionPoint, r_max: RationalLike = 1) -> Mechanism:
    if pt.delta == 0:
        return WTA(r_max, payout=pt.gamma * to_rational(r_max))
    return GammaDeltaGeom(r_max, gamma=pt.gamma, delta=pt.delta)


def certify_suite(pt: RegionPoint) -> dict[str, CheckReport]:
    """Closed-form verdicts for the cost-critical property suite at ``pt``."""
    mech = region_mechanism(pt)
    props = [
        PropertySpec(Kind.EPS_DSP, epsilon=pt.epsilon),
        # at delta = 0 the recruiter condition degenerates to WCR
        PropertySpec(Kind.DELTA_SCR, delta=pt.delta) if pt.delta > 0 else PropertySpec(Kind.WCR),
        PropertySpec(Kind.GAMMA_SEC, gamma=pt.gamma),
        PropertySpec(Kind.BB),
        PropertySpec(Kind.CP),
    ]
    return {p.kind.value: certify_geometric(mech, p) for p in props}


@dataclass(frozen=True)
class RegionVerdict:
    point: RegionPoint
    inside: bool
    violation: Optional[CheckReport]

    @property
    def witness_property(self) -> Optional[str]:
        return None if self.violation is None else self.violation.property.kind.value

    @property
    def witness_t(self) -> Optional[int]:
        return None if self.violation is None else self.violation.witness.t

    @property
    def witness_n(self) -> Optional[int]:
        return None if self.violation is None else self.violation.witness.n


def region_membership(pt: RegionPoint) -> RegionVerdict:
    """Analytic verdict, plus a certified violation of the geometric mechanism when outside."""
    if in_region(pt):
        return RegionVerdict(pt, True, None)
    mech = region_mechanism(pt)
    if pt.delta > 1 - pt.gamma:
        violation = certify_geometric(mech, PropertySpec(Kind.BB))
    else:
        violation = certify_geometric(mech, PropertySpec(Kind.EPS_DSP, epsilon=pt.epsilon))
    return RegionVerdict(pt, False, violation)


@dataclass(frozen=True)
class RegionGrid:
    cells: tuple[RegionVerdict, ...]

    HEADER = "delta,epsilon,gamma,inside,witness_property,witness_t,witness_n"

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(self.HEADER + "\n")
        for c in self.cells:
            p = c.point
            fields = [
                fmt(p.delta),
                fmt(p.epsilon),
                fmt(p.gamma),
                "true" if c.inside else "false",
                c.witness_property or "",
                "" if c.witness_t is None else str(c.witness_t),
                "" if c.witness_n is None else str(c.witness_n),
            ]
            out.write(",".join(fields) + "\n")
        return out.getvalue()


def grid_values(step: Fraction, upper: Fraction, include_upper: bool) -> list[Fraction]:
    """``step, 2*step, ...`` up to ``upper``; zero is never included."""
    if step <= 0:
        raise ParameterOutOfRange(f"grid step must be positive, got {step}")
    values = []
    j = 1
    while j * step < upper or (include_upper and j * step == upper):
        values.append(j * step)
        j += 1
    return values


def region_scan(
    step_delta: RationalLike,
    step_eps: RationalLike,
    step_gamma: RationalLike,
    eps_max: RationalLike = 2,
    threads: int = 1,
) -> RegionGrid:
    """Classify every cell of the grid ``delta in (0,1)``, ``epsilon in (0, eps_max]``, ``gamma in (0,1]``."""
    deltas = grid_values(to_rational(step_delta), Fraction(1), include_upper=False)
    epsilons = grid_values(to_rational(step_eps), to_rational(eps_max), include_upper=True)
    gammas = grid_values(to_rational(step_gamma), Fraction(1), include_upper=True)
    points = [RegionPoint(d, e, g) for d in deltas for e in epsilons for g in gammas]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(region_membership, points))
    else:
        cells = [region_membership(p) for p in points]
    return RegionGrid(tuple(cells))
