"""Exact elimination over the equality system implied by DSP together with CP.

Combining the two inequalities (CP with ``t <- t+n, p <- n`` reverses DSP)
leaves, for every ``k <= t`` and ``n >= 1``::

    R(k, t) = sum_{i=0..n} R(k+i, t+n)

At a finite horizon ``T`` we keep every instance with ``t + n <= T``, one
unknown per position ``(k, t)``, and reduce the system to row echelon form
over the rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from ..errors import ParameterOutOfRange

__all__ = [
    "EliminationSystem",
    "ReducedSystem",
    "ImpossibilityReport",
    "WtaStructureReport",
    "build_system",
    "rref",
    "verify_impossibility",
    "verify_wta_structure",
]

Position = tuple[int, int]
Row = list[Fraction]


@dataclass(frozen=True)
class EliminationSystem:
    horizon: int
    variables: tuple[Position, ...]
    rows: tuple[tuple[Fraction, ...], ...]

    @property
    def index(self) -> dict[Position, int]:
        return {pos: i for i, pos in enumerate(self.variables)}

    def residuals(self, values: Mapping[Position, Fraction]) -> list[Fraction]:
        """Left-hand side of every row under ``values`` (all zero for a solution)."""
        vec = [values[pos] for pos in self.variables]
        return [sum((c * v for c, v in zip(row, vec) if c), Fraction(0)) for row in self.rows]


def build_system(horizon: int) -> EliminationSystem:
    """All in-horizon instances of the DSP+CP equality, variables ordered (t, k) ascending."""
    if horizon < 1:
        raise ParameterOutOfRange("horizon must be >= 1")
    variables = tuple((k, t) for t in range(1, horizon + 1) for k in range(1, t + 1))
    index = {pos: i for i, pos in enumerate(variables)}
    rows = []
    for t in range(1, horizon):
        for k in range(1, t + 1):
            for n in range(1, horizon - t + 1):
                row = [Fraction(0)] * len(variables)
                row[index[(k, t)]] += 1
                for i in range(n + 1):
                    row[index[(k + i, t + n)]] -= 1
                rows.append(tuple(row))
    return EliminationSystem(horizon, variables, tuple(rows))


def rref(rows: Sequence[Sequence[Fraction]], ncols: int) -> tuple[list[Row], list[int]]:
    """Reduced row echelon form with pivots chosen in column order.

    Returns the nonzero reduced rows and their pivot columns.
    """
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        lead = m[r][c]
        if lead != 1:
            m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


@dataclass
class ReducedSystem:
    """RREF of a system plus the queries the theorem checks need."""

    variables: tuple[Position, ...]
    rows: list[Row]
    pivots: list[int]

    @classmethod
    def from_rows(cls, variables: tuple[Position, ...], rows: Sequence[Sequence[Fraction]]):
        reduced, pivots = rref(rows, len(variables))
        return cls(variables, reduced, pivots)

    def reduce(self, vec: Sequence[Fraction]) -> Row:
        out = list(vec)
        for row, c in zip(self.rows, self.pivots):
            if out[c] != 0:
                f = out[c]
                out = [a - f * b for a, b in zip(out, row)]
        return out

    def spans(self, vec: Sequence[Fraction]) -> bool:
        """True iff ``vec . x = 0`` holds for every solution ``x``."""
        return not any(self.reduce(vec))

    def unit(self, j: int) -> Row:
        vec = [Fraction(0)] * len(self.variables)
        vec[j] = Fraction(1)
        return vec

    def forced_zero(self) -> list[Position]:
        return [pos for j, pos in enumerate(self.variables) if self.spans(self.unit(j))]

    def free_parameters(self) -> list[Position]:
        pivots = set(self.pivots)
        return [pos for j, pos in enumerate(self.variables) if j not in pivots]

    def forced_equal(self, a: int, b: int) -> bool:
        vec = self.unit(a)
        vec[b] -= 1
        return self.spans(vec)

    def solve(self, free_values: Mapping[Position, Fraction]) -> dict[Position, Fraction]:
        """Complete a solution from values for :meth:`free_parameters`."""
        values = {pos: Fraction(free_values[pos]) for pos in self.free_parameters()}
        for row, c in zip(self.rows, self.pivots):
            values[self.variables[c]] = -sum(
                (row[j] * values[self.variables[j]] for j in range(len(row)) if j != c and row[j]),
                Fraction(0),
            )
        return values

    def equalities(self) -> list[str]:
        """Each pivot variable as a combination of the free ones."""
        out = []
        for row, c in zip(self.rows, self.pivots):
            terms = []
            for j, coef in enumerate(row):
                if j == c or coef == 0:
                    continue
                value = -coef
                sign = "-" if value < 0 else "+"
                mag = abs(value)
                name = _name(self.variables[j])
                terms.append((sign, name if mag == 1 else f"{mag}*{name}"))
            if not terms:
                rhs = "0"
            else:
                first_sign, first = terms[0]
                rhs = ("-" if first_sign == "-" else "") + first
                rhs += "".join(f" {s} {term}" for s, term in terms[1:])
            out.append(f"{_name(self.variables[c])} = {rhs}")
        return out


def _name(pos: Position) -> str:
    return f"R({pos[0]},{pos[1]})"


def _nonnegative_closure(system: EliminationSystem) -> ReducedSystem:
    """Add ``x_j = 0`` for every variable a sign argument forces to zero.

    A reduced row whose nonzero coefficients share one sign states that a sum
    of nonnegative unknowns is zero, so each of them is. Repeat to a fixpoint.
    """
    rows = [list(r) for r in system.rows]
    reduced = ReducedSystem.from_rows(system.variables, rows)
    while True:
        new_zero = set()
        for row in reduced.rows:
            support = [j for j, c in enumerate(row) if c != 0]
            if all(row[j] > 0 for j in support) or all(row[j] < 0 for j in support):
                new_zero.update(support)
        units = [j for j in sorted(new_zero) if not any(
            r[j] != 0 and sum(1 for c in r if c) == 1 for r in reduced.rows
        )]
        if not units:
            return reduced
        rows = reduced.rows + [reduced.unit(j) for j in units]
        reduced = ReducedSystem.from_rows(system.variables, rows)


@dataclass(frozen=True)
class ImpossibilityReport:
    horizon: int
    forced_zero: tuple[Position, ...]
    free_parameters: tuple[Position, ...]
    equalities: tuple[str, ...]

    @property
    def contradicts_scr(self) -> bool:
        """Every ``(t-1, t)`` with ``3 <= t <= horizon`` is forced to zero."""
        forced = set(self.forced_zero)
        return all((t - 1, t) in forced for t in range(3, self.horizon + 1))

    def to_dict(self) -> dict:
        return {
            "theorem": "impossibility",
            "horizon": self.horizon,
            "forced_zero": [list(p) for p in self.forced_zero],
            "free_parameters": [list(p) for p in self.free_parameters],
            "equalities": list(self.equalities),
            "contradicts_scr": self.contradicts_scr,
        }


def verify_impossibility(horizon: int) -> ImpossibilityReport:
    """Positions the DSP+CP equalities alone force to zero within ``horizon``.

    The result contains ``(t-1, t)`` for every ``3 <= t <= horizon``, so no
    mechanism that is DSP and CP on the horizon can also be SCR.
    """
    if horizon < 3:
        raise ParameterOutOfRange("horizon must be >= 3")
    system = build_system(horizon)
    reduced = ReducedSystem.from_rows(system.variables, system.rows)
    return ImpossibilityReport(
        horizon,
        tuple(reduced.forced_zero()),
        tuple(reduced.free_parameters()),
        tuple(reduced.equalities()),
    )


@dataclass(frozen=True)
class WtaStructureReport:
    horizon: int
    forced_zero: tuple[Position, ...]
    free_parameters: tuple[Position, ...]
    equal_groups: tuple[tuple[Position, ...], ...]
    equalities: tuple[str, ...]

    @property
    def interior_forced(self) -> bool:
        """All ``(k, t)`` with ``2 <= k <= t-1`` are forced to zero."""
        forced = set(self.forced_zero)
        return all(
            (k, t) in forced for t in range(3, self.horizon + 1) for k in range(2, t)
        )

    def to_dict(self) -> dict:
        return {
            "theorem": "wta",
            "horizon": self.horizon,
            "forced_zero": [list(p) for p in self.forced_zero],
            "free_parameters": [list(p) for p in self.free_parameters],
            "equal_groups": [[list(p) for p in g] for g in self.equal_groups],
            "equalities": list(self.equalities),
            "interior_forced": self.interior_forced,
        }


def verify_wta_structure(horizon: int) -> WtaStructureReport:
    """Structure of DSP+CP mechanisms with nonnegative rewards at a finite horizon.

    Reports forced zeros, the residual free parameters, and groups of
    positions that must carry equal rewards.
    """
    if horizon < 3:
        raise ParameterOutOfRange("horizon must be >= 3")
    system = build_system(horizon)
    reduced = _nonnegative_closure(system)
    forced = reduced.forced_zero()
    forced_set = set(forced)

    idx = system.index
    groups: list[list[Position]] = []
    for pos in system.variables:
        if pos in forced_set:
            continue
        for group in groups:
            if reduced.forced_equal(idx[group[0]], idx[pos]):
                group.append(pos)
                break
        else:
            groups.append([pos])
    return WtaStructureReport(
        horizon,
        tuple(forced),
        tuple(reduced.free_parameters()),
        tuple(tuple(g) for g in groups if len(g) > 1),
        tuple(reduced.equalities()),
    )
