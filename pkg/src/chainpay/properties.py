"""Exact and approximate incentive properties, with witnesses.

:func:`check_property` scans every instance of a property's inequality up to
finite bounds and reports the lexicographically smallest violation in
``(t, k, n-or-p)`` order. For the closed-form families,
:func:`certify_geometric` settles the unbounded statement (all ``t, n, p``)
and upgrades a bounded pass to ``certified``.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterator, Optional

from .errors import InfeasibleClass, NotApplicable, ParameterOutOfRange
from .mechanisms import (
    WTA,
    DeltaGeom,
    GammaDeltaGeom,
    Mechanism,
    Tabular,
    TopDownGeom,
)
from .rational import RationalLike, fmt, to_rational

__all__ = [
    "Kind",
    "Verdict",
    "PropertySpec",
    "CheckBounds",
    "Witness",
    "CheckReport",
    "SampleClass",
    "check_property",
    "certify_geometric",
    "sample_mechanism",
    "ChainSums",
]


class Kind(str, enum.Enum):
    DSP = "DSP"
    EPS_DSP = "EpsDSP"
    CP = "CP"
    BB = "BB"
    SCR = "SCR"
    WCR = "WCR"
    DELTA_SCR = "DeltaSCR"
    GAMMA_SEC = "GammaSEC"


class Verdict(str, enum.Enum):
    CERTIFIED = "certified"
    PASS_BOUNDED = "pass_bounded"
    FAIL = "fail"

    @property
    def passed(self) -> bool:
        return self is not Verdict.FAIL


_ALIASES = {
    "dsp": Kind.DSP,
    "epsdsp": Kind.EPS_DSP,
    "cp": Kind.CP,
    "bb": Kind.BB,
    "scr": Kind.SCR,
    "wcr": Kind.WCR,
    "deltascr": Kind.DELTA_SCR,
    "gammasec": Kind.GAMMA_SEC,
}


@dataclass(frozen=True)
class PropertySpec:
    kind: Kind
    epsilon: Optional[Fraction] = None
    delta: Optional[Fraction] = None
    gamma: Optional[Fraction] = None

    def __post_init__(self) -> None:
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        for name in ("epsilon", "delta", "gamma"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, to_rational(value))
        needs = {Kind.EPS_DSP: "epsilon", Kind.DELTA_SCR: "delta", Kind.GAMMA_SEC: "gamma"}
        if kind in needs and getattr(self, needs[kind]) is None:
            raise ParameterOutOfRange(f"{kind.value} needs {needs[kind]}")
        if kind is Kind.EPS_DSP and not self.epsilon > 0:
            raise ParameterOutOfRange(f"epsilon must be positive, got {self.epsilon}")
        if kind is Kind.DELTA_SCR and not 0 < self.delta < 1:
            raise ParameterOutOfRange(f"delta must lie in (0, 1), got {self.delta}")
        if kind is Kind.GAMMA_SEC and not 0 < self.gamma <= 1:
            raise ParameterOutOfRange(f"gamma must lie in (0, 1], got {self.gamma}")

    @classmethod
    def parse(
        cls,
        name: str,
        epsilon: RationalLike | None = None,
        delta: RationalLike | None = None,
        gamma: RationalLike | None = None,
    ) -> "PropertySpec":
        key = name.replace("-", "").replace("_", "").lower()
        if key not in _ALIASES:
            raise ParameterOutOfRange(f"unknown property {name!r}")
        kind = _ALIASES[key]
        return cls(
            kind,
            epsilon=epsilon if kind is Kind.EPS_DSP else None,
            delta=delta if kind is Kind.DELTA_SCR else None,
            gamma=gamma if kind is Kind.GAMMA_SEC else None,
        )

    def params(self) -> dict[str, str]:
        out = {}
        for name in ("epsilon", "delta", "gamma"):
            value = getattr(self, name)
            if value is not None:
                out[name] = fmt(value)
        return out

    def __str__(self) -> str:
        args = ",".join(self.params().values())
        return f"{self.kind.value}({args})" if args else self.kind.value


@dataclass(frozen=True)
class CheckBounds:
    t_max: int = 10
    n_max: int = 10
    p_max: int = 10

    def __post_init__(self) -> None:
        if min(self.t_max, self.n_max, self.p_max) < 1:
            raise ParameterOutOfRange("all check bounds must be >= 1")

    def to_dict(self) -> dict[str, int]:
        return {"t_max": self.t_max, "n_max": self.n_max, "p_max": self.p_max}


@dataclass(frozen=True)
class Witness:
    k: Optional[int]
    t: int
    n: Optional[int] = None
    p: Optional[int] = None

    def to_dict(self) -> dict[str, Optional[int]]:
        return {"k": self.k, "t": self.t, "n": self.n, "p": self.p}

    def as_tuple(self) -> tuple:
        third = self.n if self.n is not None else self.p
        return (self.k, self.t, third)


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one property check.

    ``margin`` is the violation amount at the witness on failure and the
    minimum slack on a pass. Strict inequalities fail at slack ``<= 0``, so a
    strict failure may carry margin 0.
    """

    property: PropertySpec
    verdict: Verdict
    witness: Optional[Witness]
    margin: Fraction
    bounds: Optional[CheckBounds]

    @property
    def passed(self) -> bool:
        return self.verdict.passed

    def to_dict(self) -> dict:
        return {
            "property": self.property.kind.value,
            "params": self.property.params(),
            "verdict": self.verdict.value,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "margin": fmt(self.margin),
            "bounds": None if self.bounds is None else self.bounds.to_dict(),
        }


class ChainSums:
    """Cached prefix sums of chain payments, so segment sums are O(1)."""

    def __init__(self, mech: Mechanism) -> None:
        self.mech = mech
        self._prefix: dict[int, list[Fraction]] = {}

    def prefix(self, t: int) -> list[Fraction]:
        cached = self._prefix.get(t)
        if cached is None:
            cached = [Fraction(0)]
            for value in self.mech.chain_payments(t):
                cached.append(cached[-1] + value)
            self._prefix[t] = cached
        return cached

    def r(self, k: int, t: int) -> Fraction:
        pre = self.prefix(t)
        return pre[k] - pre[k - 1]

    def segment(self, t: int, first: int, last: int) -> Fraction:
        """Sum of ``R(j, t)`` for ``first <= j <= last``."""
        pre = self.prefix(t)
        return pre[last] - pre[first - 1]

    def total(self, t: int) -> Fraction:
        return self.prefix(t)[t]


# Each instance is (witness, slack, strict). slack = lhs - rhs of the
# property's inequality; non-strict instances hold iff slack >= 0, strict
# ones iff slack > 0.
Instance = tuple[Witness, Fraction, bool]


def _instances(
    mech: Mechanism, prop: PropertySpec, bounds: CheckBounds
) -> Iterator[Instance]:
    sums = ChainSums(mech)
    kind = prop.kind
    if kind in (Kind.DSP, Kind.EPS_DSP):
        factor = 1 if kind is Kind.DSP else 1 + prop.epsilon
        mech.require(bounds.t_max + bounds.n_max)
        for t in range(1, bounds.t_max + 1):
            for k in range(1, t + 1):
                base = factor * sums.r(k, t)
                for n in range(1, bounds.n_max + 1):
                    yield Witness(k, t, n=n), base - sums.segment(t + n, k, k + n), False
    elif kind is Kind.CP:
        mech.require(bounds.t_max)
        for t in range(2, bounds.t_max + 1):
            for k in range(1, t):
                for p in range(1, min(bounds.p_max, t - k) + 1):
                    slack = sums.segment(t, k, k + p) - sums.r(k, t - p)
                    yield Witness(k, t, p=p), slack, False
    elif kind is Kind.BB:
        mech.require(bounds.t_max)
        for t in range(1, bounds.t_max + 1):
            yield Witness(None, t), mech.r_max - sums.total(t), False
    elif kind is Kind.SCR:
        mech.require(bounds.t_max)
        for t in range(1, bounds.t_max + 1):
            for k in range(1, t + 1):
                yield Witness(k, t), sums.r(k, t), True
    elif kind is Kind.WCR:
        mech.require(bounds.t_max)
        for t in range(1, bounds.t_max + 1):
            for k in range(1, t):
                yield Witness(k, t), sums.r(k, t), False
            yield Witness(t, t), sums.r(t, t), True
    elif kind is Kind.DELTA_SCR:
        mech.require(bounds.t_max)
        for t in range(1, bounds.t_max + 1):
            for k in range(1, t):
                yield Witness(k, t), sums.r(k, t) - prop.delta * sums.r(k + 1, t), False
            yield Witness(t, t), sums.r(t, t), True
    elif kind is Kind.GAMMA_SEC:
        mech.require(bounds.t_max)
        for t in range(1, bounds.t_max + 1):
            yield Witness(t, t), sums.r(t, t) - prop.gamma * mech.r_max, False
    else:  # pragma: no cover
        raise AssertionError(kind)


def _violated(slack: Fraction, strict: bool) -> bool:
    return slack <= 0 if strict else slack < 0


def scan_property(mech: Mechanism, prop: PropertySpec, bounds: CheckBounds) -> CheckReport:
    """Bounded enumeration only, without closed-form certification."""
    min_slack: Optional[Fraction] = None
    for witness, slack, strict in _instances(mech, prop, bounds):
        if _violated(slack, strict):
            return CheckReport(prop, Verdict.FAIL, witness, -slack, bounds)
        if min_slack is None or slack < min_slack:
            min_slack = slack
    return CheckReport(
        prop, Verdict.PASS_BOUNDED, None, min_slack if min_slack is not None else Fraction(0), bounds
    )


def check_property(mech: Mechanism, prop: PropertySpec, bounds: CheckBounds) -> CheckReport:
    """Check ``prop`` on ``mech`` over ``bounds``.

    A closed-form family whose certificate holds gets ``certified``. If the
    scan passes but the certificate finds a violation past the bounds, the
    certificate's finite witness is reported instead.
    """
    report = scan_property(mech, prop, bounds)
    if report.verdict is Verdict.FAIL:
        return report
    try:
        cert = certify_geometric(mech, prop)
    except NotApplicable:
        return report
    if cert.verdict is Verdict.CERTIFIED:
        return replace(report, verdict=Verdict.CERTIFIED)
    return replace(cert, bounds=bounds)


# -- closed-form certification ------------------------------------------------

def _certified(prop: PropertySpec, margin: Fraction) -> CheckReport:
    return CheckReport(prop, Verdict.CERTIFIED, None, margin, None)


def _fail_at(mech: Mechanism, prop: PropertySpec, witness: Witness) -> CheckReport:
    """Failure report with the margin evaluated directly at ``witness``."""
    slack, strict = _slack_at(mech, prop, witness)
    assert _violated(slack, strict), (prop, witness, slack)
    return CheckReport(prop, Verdict.FAIL, witness, -slack, None)


def _slack_at(mech: Mechanism, prop: PropertySpec, w: Witness) -> tuple[Fraction, bool]:
    r = mech.reward
    kind = prop.kind
    if kind in (Kind.DSP, Kind.EPS_DSP):
        factor = 1 if kind is Kind.DSP else 1 + prop.epsilon
        rhs = sum((r(w.k + i, w.t + w.n) for i in range(w.n + 1)), Fraction(0))
        return factor * r(w.k, w.t) - rhs, False
    if kind is Kind.CP:
        lhs = sum((r(w.k + i, w.t) for i in range(w.p + 1)), Fraction(0))
        return lhs - r(w.k, w.t - w.p), False
    if kind is Kind.BB:
        return mech.r_max - mech.chain_total(w.t), False
    if kind is Kind.SCR:
        return r(w.k, w.t), True
    if kind in (Kind.WCR, Kind.DELTA_SCR):
        if w.k == w.t:
            return r(w.t, w.t), True
        delta = prop.delta if kind is Kind.DELTA_SCR else 0
        return r(w.k, w.t) - delta * r(w.k + 1, w.t), False
    if kind is Kind.GAMMA_SEC:
        return r(w.t, w.t) - prop.gamma * mech.r_max, False
    raise AssertionError(kind)  # pragma: no cover


def _first_t(predicate, start: int = 1) -> int:
    """Smallest ``t >= start`` satisfying ``predicate``; callers guarantee one exists."""
    t = start
    while not predicate(t):
        t += 1
    return t


def _certify_wta(mech: WTA, prop: PropertySpec) -> CheckReport:
    a, rmax = mech.payout, mech.r_max
    kind = prop.kind
    if kind in (Kind.DSP, Kind.EPS_DSP, Kind.CP, Kind.WCR):
        # k < t instances compare 0 with 0; the winner instance is a vs a.
        return _certified(prop, Fraction(0))
    if kind is Kind.BB:
        return _certified(prop, rmax - a)
    if kind is Kind.SCR:
        return _fail_at(mech, prop, Witness(1, 2))
    if kind is Kind.DELTA_SCR:
        return _fail_at(mech, prop, Witness(1, 2))
    if kind is Kind.GAMMA_SEC:
        if a >= prop.gamma * rmax:
            return _certified(prop, a - prop.gamma * rmax)
        return _fail_at(mech, prop, Witness(1, 1))
    raise AssertionError(kind)  # pragma: no cover


def _geom_sum(delta: Fraction, terms: int) -> Fraction:
    """``1 + delta + ... + delta**(terms-1)``."""
    return (1 - delta**terms) / (1 - delta)


def _certify_gdgeom(mech: GammaDeltaGeom, prop: PropertySpec) -> CheckReport:
    g, d, rmax = mech.gamma, mech.delta, mech.r_max
    kind = prop.kind
    if kind is Kind.DSP:
        # sybil ratio 1 + d + ... + d**n > 1 already at n = 1
        return _fail_at(mech, prop, Witness(1, 1, n=1))
    if kind is Kind.EPS_DSP:
        # ratio is independent of (k, t) and increases to 1/(1-d)
        if 1 / (1 - d) <= 1 + prop.epsilon:
            return _certified(prop, Fraction(0))
        n = _first_t(lambda n: _geom_sum(d, n + 1) > 1 + prop.epsilon)
        return _fail_at(mech, prop, Witness(1, 1, n=n))
    if kind is Kind.CP:
        # leaf reward is independent of t, so the collapsed node's reward
        # reappears as the last summand of the uncollapsed subchain
        return _certified(prop, Fraction(0))
    if kind is Kind.BB:
        limit = g / (1 - d)
        if limit <= 1:
            return _certified(prop, rmax * (1 - limit))
        t = _first_t(lambda t: mech.chain_total(t) > rmax)
        return _fail_at(mech, prop, Witness(None, t))
    if kind in (Kind.SCR, Kind.WCR):
        return _certified(prop, Fraction(0))
    if kind is Kind.DELTA_SCR:
        if prop.delta <= d:
            return _certified(prop, Fraction(0))
        return _fail_at(mech, prop, Witness(1, 2))
    if kind is Kind.GAMMA_SEC:
        if g >= prop.gamma:
            return _certified(prop, (g - prop.gamma) * rmax)
        return _fail_at(mech, prop, Witness(1, 1))
    raise AssertionError(kind)  # pragma: no cover


def _certify_dgeom(mech: DeltaGeom, prop: PropertySpec) -> CheckReport:
    d, rmax = mech.delta, mech.r_max
    kind = prop.kind
    if kind is Kind.DSP:
        # t = 1 is an identity; at t = 2, n = 1 the ratio is (1+d)^2/(1+d+d^2) > 1
        return _fail_at(mech, prop, Witness(1, 2, n=1))
    if kind is Kind.EPS_DSP:
        # ratio = (1-d^(n+1))/(1-d^(t+n)) * (1-d^t)/(1-d), increasing in n and
        # t, tending to 1/(1-d); for fixed t its n-limit is 1+d+...+d^(t-1).
        cap = 1 + prop.epsilon
        if 1 / (1 - d) <= cap:
            return _certified(prop, Fraction(0))
        t = _first_t(lambda t: _geom_sum(d, t) > cap)

        def ratio(n: int) -> Fraction:
            return (1 - d ** (n + 1)) / (1 - d ** (t + n)) * _geom_sum(d, t)

        n = _first_t(lambda n: ratio(n) > cap)
        return _fail_at(mech, prop, Witness(1, t, n=n))
    if kind is Kind.CP:
        # partial sums of d^j - d^(t-j), j = 1..p, are nonnegative
        return _certified(prop, Fraction(0))
    if kind in (Kind.BB, Kind.SCR, Kind.WCR):
        return _certified(prop, Fraction(0))
    if kind is Kind.DELTA_SCR:
        if prop.delta <= d:
            return _certified(prop, Fraction(0))
        return _fail_at(mech, prop, Witness(1, 2))
    if kind is Kind.GAMMA_SEC:
        # leaf (1-d)/(1-d^t) * rmax decreases to (1-d) * rmax
        if prop.gamma <= 1 - d:
            return _certified(prop, (1 - d - prop.gamma) * rmax)
        t = _first_t(lambda t: mech.leaf(t) < prop.gamma * rmax)
        return _fail_at(mech, prop, Witness(t, t))
    raise AssertionError(kind)  # pragma: no cover


def _certify_topdown(mech: TopDownGeom, prop: PropertySpec) -> CheckReport:
    rmax = mech.r_max
    kind = prop.kind
    if kind in (Kind.DSP, Kind.EPS_DSP):
        # sybil sum is R(k,t) * (2^(1-n) - 4^(-n)) < R(k,t)
        return _certified(prop, Fraction(0))
    if kind is Kind.CP:
        return _fail_at(mech, prop, Witness(1, 2, p=1))
    if kind is Kind.BB:
        # chain total 2^-t (1 - 2^-t) peaks at t = 1 with 1/4
        return _certified(prop, rmax * Fraction(3, 4))
    if kind in (Kind.SCR, Kind.WCR, Kind.DELTA_SCR):
        # consecutive rewards halve towards the leaf, so R(k,t) = 2 R(k+1,t)
        return _certified(prop, Fraction(0))
    if kind is Kind.GAMMA_SEC:
        t = _first_t(lambda t: Fraction(1, 4**t) < prop.gamma)
        return _fail_at(mech, prop, Witness(t, t))
    raise AssertionError(kind)  # pragma: no cover


_CERTIFIERS = {
    WTA: _certify_wta,
    GammaDeltaGeom: _certify_gdgeom,
    DeltaGeom: _certify_dgeom,
    TopDownGeom: _certify_topdown,
}


def certify_geometric(mech: Mechanism, prop: PropertySpec) -> CheckReport:
    """Settle ``prop`` over all ``t, n, p`` using closed forms.

    Returns a ``certified`` report (margin is the infimum slack over the
    unbounded domain) or a ``fail`` report with a finite witness. Raises
    :class:`NotApplicable` for tabular mechanisms.
    """
    certifier = _CERTIFIERS.get(type(mech))
    if certifier is None:
        raise NotApplicable(f"no closed form for {mech.describe()}")
    return certifier(mech, prop)


# -- sampler --------------------------------------------------------------------

_SLACK_GRID = [Fraction(j, 16) for j in range(0, 9)]
_LEAF_GRID = [Fraction(j, 16) for j in range(0, 17)]


@dataclass(frozen=True)
class SampleClass:
    """Constraint class for :func:`sample_mechanism`: delta-SCR, optional gamma-SEC and BB."""

    delta: Fraction
    gamma: Optional[Fraction] = None
    budget_balanced: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", to_rational(self.delta))
        if not 0 < self.delta < 1:
            raise ParameterOutOfRange(f"delta must lie in (0, 1), got {self.delta}")
        if self.gamma is not None:
            object.__setattr__(self, "gamma", to_rational(self.gamma))
            if not 0 < self.gamma <= 1:
                raise ParameterOutOfRange(f"gamma must lie in (0, 1], got {self.gamma}")
            if self.budget_balanced and self.gamma > 1 - self.delta:
                raise InfeasibleClass(
                    f"delta-SCR, gamma-SEC and BB need gamma <= 1 - delta; "
                    f"got gamma={self.gamma}, delta={self.delta}"
                )

    def properties(self) -> list[PropertySpec]:
        props = [PropertySpec(Kind.DELTA_SCR, delta=self.delta)]
        if self.gamma is not None:
            props.append(PropertySpec(Kind.GAMMA_SEC, gamma=self.gamma))
        if self.budget_balanced:
            props.append(PropertySpec(Kind.BB))
        return props


def sample_chain(
    cls: SampleClass, t: int, rng: random.Random, r_max: Fraction
) -> list[Fraction]:
    """One chain of length ``t`` inside ``cls`` (rewards for depths 1..t)."""
    floor = (cls.gamma or 0) * r_max
    leaf_grid = _LEAF_GRID if cls.gamma is not None else _LEAF_GRID[1:]
    chain = [Fraction(0)] * t
    chain[t - 1] = floor + (r_max - floor) * rng.choice(leaf_grid)
    for k in range(t - 2, -1, -1):
        chain[k] = (cls.delta + rng.choice(_SLACK_GRID)) * chain[k + 1]
    total = sum(chain, Fraction(0))
    if cls.budget_balanced and total > r_max:
        # Blend towards the cheapest chain in the class; the constraints are
        # linear, so any convex combination stays inside. Without gamma-SEC
        # the floor chain is zero and this is plain division by total/r_max.
        base = [cls.delta ** (t - 1 - k) * floor for k in range(t)]
        base_total = sum(base, Fraction(0))
        lam = (r_max - base_total) / (total - base_total)
        chain = [b + lam * (c - b) for b, c in zip(base, chain)]
    return chain


def sample_mechanism(
    cls: SampleClass, t_max: int, seed: int, r_max: RationalLike = 1
) -> Tabular:
    """Draw a tabular mechanism satisfying ``cls`` by construction.

    Deterministic in ``(cls, t_max, seed)``.
    """
    if t_max < 1:
        raise ParameterOutOfRange("t_max must be >= 1")
    r_max = to_rational(r_max)
    rng = random.Random(seed)
    table: dict[tuple[int, int], Fraction] = {}
    for t in range(1, t_max + 1):
        for k, value in enumerate(sample_chain(cls, t, rng, r_max), start=1):
            table[(k, t)] = value
    return Tabular(r_max, table=table)
