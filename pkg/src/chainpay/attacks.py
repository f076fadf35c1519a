"""Payoff arithmetic for sybil insertion and node collapse.

Gains are group-level: the attacker pockets every fake identity's reward,
and a collapsing subchain is treated as one coalition. How a coalition
splits its gain is not modelled.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import ParameterOutOfRange
from .mechanisms import Mechanism
from .properties import ChainSums

__all__ = [
    "SybilMove",
    "CollapseMove",
    "AttackResult",
    "sybil_gain",
    "collapse_gain",
    "best_attack",
    "best_sybil",
    "best_collapse",
]


@dataclass(frozen=True)
class SybilMove:
    """Agent at depth ``k`` of a length-``t`` chain inserts ``n`` fakes below itself."""

    k: int
    t: int
    n: int

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.t or self.n < 1:
            raise ParameterOutOfRange(f"invalid sybil move {self}")


@dataclass(frozen=True)
class CollapseMove:
    """Subchain at depths ``k..k+p`` of a length-``t`` chain reports as one node."""

    k: int
    t: int
    p: int

    def __post_init__(self) -> None:
        if self.k < 1 or self.p < 1 or self.k + self.p > self.t:
            raise ParameterOutOfRange(f"invalid collapse move {self}")


Move = Union[SybilMove, CollapseMove]


@dataclass(frozen=True)
class AttackResult:
    move: Move
    before: Fraction
    after: Fraction

    @property
    def gain(self) -> Fraction:
        return self.after - self.before

    @property
    def ratio(self) -> Optional[Fraction]:
        return self.after / self.before if self.before > 0 else None

    @property
    def profitable(self) -> bool:
        return self.gain > 0

    def to_dict(self) -> dict:
        kind = "sybil" if isinstance(self.move, SybilMove) else "collapse"
        move = dict(vars(self.move))
        return {
            "kind": kind,
            "move": move,
            "before": str(self.before),
            "after": str(self.after),
            "gain": str(self.gain),
            "ratio": None if self.ratio is None else str(self.ratio),
        }


def _sybil(sums: ChainSums, move: SybilMove) -> AttackResult:
    k, t, n = move.k, move.t, move.n
    return AttackResult(move, sums.r(k, t), sums.segment(t + n, k, k + n))


def _collapse(sums: ChainSums, move: CollapseMove) -> AttackResult:
    k, t, p = move.k, move.t, move.p
    return AttackResult(move, sums.segment(t, k, k + p), sums.r(k, t - p))


def sybil_gain(mech: Mechanism, move: SybilMove) -> AttackResult:
    """``sum_{i=0..n} R(k+i, t+n)`` against the honest ``R(k, t)``."""
    mech.require(move.t + move.n)
    return _sybil(ChainSums(mech), move)


def collapse_gain(mech: Mechanism, move: CollapseMove) -> AttackResult:
    """``R(k, t-p)`` against the honest ``sum_{i=0..p} R(k+i, t)``."""
    mech.require(move.t)
    return _collapse(ChainSums(mech), move)


def best_sybil(mech: Mechanism, k: int, t: int, n_max: int) -> AttackResult:
    """Most profitable fake count ``n <= n_max`` for the agent at ``(k, t)``; ties keep the smallest ``n``."""
    if n_max < 1:
        raise ParameterOutOfRange("n_max must be >= 1")
    mech.require(t + n_max)
    sums = ChainSums(mech)
    best = None
    for n in range(1, n_max + 1):
        result = _sybil(sums, SybilMove(k, t, n))
        if best is None or result.gain > best.gain:
            best = result
    return best


def best_collapse(mech: Mechanism, t: int, p_max: Optional[int] = None) -> AttackResult:
    """Most profitable collapse within a chain of length ``t``.

    Ties keep the lexicographically smallest ``(k, p)``.
    """
    if t < 2:
        raise ParameterOutOfRange("a collapse needs a chain of length >= 2")
    mech.require(t)
    sums = ChainSums(mech)
    best = None
    for k in range(1, t):
        for p in range(1, t - k + 1):
            if p_max is not None and p > p_max:
                break
            result = _collapse(sums, CollapseMove(k, t, p))
            if best is None or result.gain > best.gain:
                best = result
    return best


def best_attack(
    mech: Mechanism,
    kind: str,
    *,
    t: int,
    k: Optional[int] = None,
    n_max: int = 10,
    p_max: Optional[int] = None,
) -> AttackResult:
    """Exhaustive arg-max over sybil counts (fixed ``(k, t)``) or collapses within ``t``."""
    if kind == "sybil":
        if k is None:
            raise ParameterOutOfRange("sybil search needs the attacker depth k")
        return best_sybil(mech, k, t, n_max)
    if kind == "collapse":
        return best_collapse(mech, t, p_max)
    raise ParameterOutOfRange(f"unknown attack kind {kind!r}")
