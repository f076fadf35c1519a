"""Reward mechanisms over a winning chain.

A mechanism maps a chain position ``(k, t)`` to a nonnegative reward, where
``t`` is the length of the winning chain and ``k`` the depth of the paid
agent (``1 <= k <= t``; the planner sits at depth 0 and is never paid).
Every parameter and reward is an exact :class:`~fractions.Fraction`.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import ClassVar, Iterable, Mapping, TextIO

from .errors import (
    DomainTooSmall,
    DuplicateEntry,
    IncompleteChain,
    MalformedRow,
    NegativeReward,
    ParameterOutOfRange,
    PositionOutOfDomain,
)
from .rational import RationalLike, fmt, to_rational

__all__ = [
    "Mechanism",
    "WTA",
    "GammaDeltaGeom",
    "DeltaGeom",
    "TopDownGeom",
    "Tabular",
    "make_mechanism",
    "reward",
    "chain_payments",
    "chain_total",
    "parse_tabular",
    "check_position",
]


def check_position(k: int, t: int) -> None:
    if not (isinstance(k, int) and isinstance(t, int)):
        raise PositionOutOfDomain(f"positions are integers, got ({k!r}, {t!r})")
    if not 1 <= k <= t:
        raise PositionOutOfDomain(f"need 1 <= k <= t, got k={k}, t={t}")


@dataclass(frozen=True)
class Mechanism:
    """Base class. Subclasses implement :meth:`_reward` for a valid position."""

    r_max: Fraction

    family: ClassVar[str] = "abstract"

    def __post_init__(self) -> None:
        object.__setattr__(self, "r_max", to_rational(self.r_max))
        if self.r_max <= 0:
            raise ParameterOutOfRange(f"r_max must be positive, got {self.r_max}")
        # memo for chain_payments; not a field, so eq/hash/repr ignore it
        object.__setattr__(self, "_payments", {})

    @property
    def t_max(self) -> int | None:
        """Longest chain the mechanism covers; ``None`` means unbounded."""
        return None

    def covers(self, t: int) -> bool:
        return self.t_max is None or t <= self.t_max

    def require(self, t: int) -> None:
        """Raise :class:`DomainTooSmall` unless chains of length ``t`` are covered."""
        if not self.covers(t):
            raise DomainTooSmall(
                f"{self.describe()} covers t <= {self.t_max}, need t = {t}"
            )

    def reward(self, k: int, t: int) -> Fraction:
        check_position(k, t)
        if not self.covers(t):
            raise PositionOutOfDomain(f"t={t} beyond t_max={self.t_max}")
        return self._reward(k, t)

    def _reward(self, k: int, t: int) -> Fraction:
        raise NotImplementedError

    def chain_payments(self, t: int) -> list[Fraction]:
        cached = self._payments.get(t)
        if cached is None:
            cached = tuple(self.reward(k, t) for k in range(1, t + 1))
            self._payments[t] = cached
        return list(cached)

    def chain_total(self, t: int) -> Fraction:
        return sum(self.chain_payments(t), Fraction(0))

    def describe(self) -> str:
        """Mini-spec text accepted by :func:`make_mechanism`."""
        return self.family

    def params(self) -> dict[str, str]:
        return {"r_max": fmt(self.r_max)}


@dataclass(frozen=True)
class WTA(Mechanism):
    """Winner takes all: only the deepest node of the chain is paid."""

    payout: Fraction = None  # type: ignore[assignment]

    family: ClassVar[str] = "wta"

    def __post_init__(self) -> None:
        super().__post_init__()
        payout = self.r_max if self.payout is None else to_rational(self.payout)
        if not 0 < payout <= self.r_max:
            raise ParameterOutOfRange(f"WTA payout must lie in (0, r_max], got {payout}")
        object.__setattr__(self, "payout", payout)

    def _reward(self, k: int, t: int) -> Fraction:
        return self.payout if k == t else Fraction(0)

    def chain_total(self, t: int) -> Fraction:
        check_position(t, t)
        return self.payout

    def describe(self) -> str:
        return f"wta:{fmt(self.payout)}"

    def params(self) -> dict[str, str]:
        return {"payout": fmt(self.payout), **super().params()}


def _check_delta(delta: Fraction) -> None:
    if not 0 < delta < 1:
        raise ParameterOutOfRange(f"delta must lie in (0, 1), got {delta}")


@dataclass(frozen=True)
class GammaDeltaGeom(Mechanism):
    """Winner gets ``gamma * r_max``; each recruiter gets ``delta`` times its successor."""

    gamma: Fraction = None  # type: ignore[assignment]
    delta: Fraction = None  # type: ignore[assignment]

    family: ClassVar[str] = "gdgeom"

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.gamma is None or self.delta is None:
            raise ParameterOutOfRange("gdgeom needs both gamma and delta")
        gamma, delta = to_rational(self.gamma), to_rational(self.delta)
        if not 0 < gamma <= 1:
            raise ParameterOutOfRange(f"gamma must lie in (0, 1], got {gamma}")
        _check_delta(delta)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "delta", delta)

    def _reward(self, k: int, t: int) -> Fraction:
        return self.delta ** (t - k) * self.gamma * self.r_max

    def chain_total(self, t: int) -> Fraction:
        check_position(t, t)
        return self.gamma * self.r_max * (1 - self.delta**t) / (1 - self.delta)

    def describe(self) -> str:
        return f"gdgeom:{fmt(self.gamma)},{fmt(self.delta)}"

    def params(self) -> dict[str, str]:
        return {"gamma": fmt(self.gamma), "delta": fmt(self.delta), **super().params()}


@dataclass(frozen=True)
class DeltaGeom(Mechanism):
    """Geometric profile scaled so every chain exhausts the budget exactly."""

    delta: Fraction = None  # type: ignore[assignment]

    family: ClassVar[str] = "dgeom"

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.delta is None:
            raise ParameterOutOfRange("dgeom needs delta")
        delta = to_rational(self.delta)
        _check_delta(delta)
        object.__setattr__(self, "delta", delta)

    def leaf(self, t: int) -> Fraction:
        return (1 - self.delta) / (1 - self.delta**t) * self.r_max

    def _reward(self, k: int, t: int) -> Fraction:
        return self.delta ** (t - k) * self.leaf(t)

    def chain_total(self, t: int) -> Fraction:
        check_position(t, t)
        return self.r_max

    def describe(self) -> str:
        return f"dgeom:{fmt(self.delta)}"

    def params(self) -> dict[str, str]:
        return {"delta": fmt(self.delta), **super().params()}


@dataclass(frozen=True)
class TopDownGeom(Mechanism):
    """``R(k, t) = 2**-(k+t) * r_max``; pays most near the root."""

    family: ClassVar[str] = "topdown"

    def _reward(self, k: int, t: int) -> Fraction:
        return Fraction(1, 2 ** (k + t)) * self.r_max


@dataclass(frozen=True)
class Tabular(Mechanism):
    """Explicit table of rewards, total on ``1 <= k <= t <= t_max``."""

    table: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)

    family: ClassVar[str] = "table"

    def __post_init__(self) -> None:
        super().__post_init__()
        clean: dict[tuple[int, int], Fraction] = {}
        for key, value in self.table.items():
            k, t = key
            check_position(k, t)
            value = to_rational(value)
            if value < 0:
                raise NegativeReward(f"R({k},{t}) = {value} is negative")
            clean[(k, t)] = value
        if not clean:
            raise IncompleteChain("table is empty")
        t_max = max(t for _, t in clean)
        for t in range(1, t_max + 1):
            for k in range(1, t + 1):
                if (k, t) not in clean:
                    raise IncompleteChain(f"missing entry R({k},{t})")
        object.__setattr__(self, "table", MappingProxyType(clean))
        object.__setattr__(self, "_t_max", t_max)

    @property
    def t_max(self) -> int:
        return self._t_max  # type: ignore[attr-defined]

    def _reward(self, k: int, t: int) -> Fraction:
        try:
            return self.table[(k, t)]
        except KeyError:
            raise PositionOutOfDomain(f"no entry for R({k},{t})") from None

    def describe(self) -> str:
        return f"table[t_max={self.t_max}]"

    def params(self) -> dict[str, str]:
        return {"t_max": str(self.t_max), **super().params()}

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("t,k,reward\n")
        for (k, t), value in sorted(self.table.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            out.write(f"{t},{k},{fmt(value)}\n")
        return out.getvalue()


def make_mechanism(spec: str, r_max: RationalLike = 1) -> Mechanism:
    """Build a mechanism from its mini-spec.

    Grammar: ``wta[:payout]``, ``gdgeom:gamma,delta``, ``dgeom:delta``,
    ``topdown``, ``table:path``.
    """
    name, _, arg = spec.strip().partition(":")
    name = name.strip().lower()
    args = [a.strip() for a in arg.split(",")] if arg.strip() else []
    try:
        if name == "wta":
            if len(args) > 1:
                raise ParameterOutOfRange("wta takes at most one argument")
            return WTA(r_max, payout=args[0] if args else None)
        if name == "gdgeom":
            if len(args) != 2:
                raise ParameterOutOfRange("gdgeom needs gamma,delta")
            return GammaDeltaGeom(r_max, gamma=args[0], delta=args[1])
        if name == "dgeom":
            if len(args) != 1:
                raise ParameterOutOfRange("dgeom needs delta")
            return DeltaGeom(r_max, delta=args[0])
        if name == "topdown":
            if args:
                raise ParameterOutOfRange("topdown takes no arguments")
            return TopDownGeom(r_max)
        if name == "table":
            with open(arg.strip(), encoding="utf-8") as fh:
                return parse_tabular(fh, r_max)
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ParameterOutOfRange | NegativeReward | MalformedRow
                      | DuplicateEntry | IncompleteChain):
            raise
        raise ParameterOutOfRange(f"bad parameter in {spec!r}: {exc}") from exc
    raise ParameterOutOfRange(f"unknown mechanism family {name!r}")


def reward(mech: Mechanism, k: int, t: int) -> Fraction:
    return mech.reward(k, t)


def chain_payments(mech: Mechanism, t: int) -> list[Fraction]:
    """Rewards for depths ``1..t`` of a winning chain of length ``t``."""
    return mech.chain_payments(t)


def chain_total(mech: Mechanism, t: int) -> Fraction:
    return mech.chain_total(t)


def _data_lines(lines: Iterable[str]) -> Iterable[tuple[int, str]]:
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, stripped


def parse_tabular(source: TextIO | Iterable[str], r_max: RationalLike = 1) -> Tabular:
    """Read the ``t,k,reward`` CSV format into a :class:`Tabular` mechanism."""
    rows = _data_lines(source)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise MalformedRow("empty table: missing header") from None
    if [h.strip().lower() for h in header.split(",")] != ["t", "k", "reward"]:
        raise MalformedRow(f"line {lineno}: expected header 't,k,reward', got {header!r}")

    table: dict[tuple[int, int], Fraction] = {}
    for lineno, line in rows:
        fields = next(csv.reader([line]))
        if len(fields) != 3:
            raise MalformedRow(f"line {lineno}: expected 3 fields, got {len(fields)}")
        try:
            t, k = int(fields[0]), int(fields[1])
            value = to_rational(fields[2])
        except (ValueError, ZeroDivisionError) as exc:
            raise MalformedRow(f"line {lineno}: {exc}") from None
        if not 1 <= k <= t:
            raise MalformedRow(f"line {lineno}: need 1 <= k <= t, got k={k}, t={t}")
        if value < 0:
            raise NegativeReward(f"line {lineno}: R({k},{t}) = {value} is negative")
        if (k, t) in table:
            raise DuplicateEntry(f"line {lineno}: duplicate entry for (k={k}, t={t})")
        table[(k, t)] = value
    return Tabular(r_max, table=table)
