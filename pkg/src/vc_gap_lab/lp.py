"""Dense two-phase simplex with Bland's rule, in float or exact rational arithmetic."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from math import comb
from typing import TYPE_CHECKING, Any

import numpy as np

from vc_gap_lab.errors import LpError
from vc_gap_lab.models import LpMode, LpStatus

if TYPE_CHECKING:
    from collections.abc import Sequence

    from vc_gap_lab.numerics import Number

logger = logging.getLogger(__name__)

FLOAT_TOLERANCE = 1e-9
FEASIBILITY_TOLERANCE = 1e-7
MAX_PIVOT_GUARD = 500_000


class Relation(StrEnum):
    """Row relation of a linear constraint."""

    LE = "<="
    EQ = "="
    GE = ">="


class Sense(StrEnum):
    MINIMIZE = "min"
    MAXIMIZE = "max"


@dataclass(frozen=True)
class LinearProgram:
    """``sense c.x`` subject to ``A x (<=|=|>=) b``; variables are >= 0 unless free."""

    objective: tuple[Number | int, ...]
    matrix: tuple[tuple[Number | int, ...], ...]
    relations: tuple[Relation, ...]
    rhs: tuple[Number | int, ...]
    sense: Sense = Sense.MINIMIZE
    free: tuple[bool, ...] = ()

    def __post_init__(self) -> None:
        cols = len(self.objective)
        rows = len(self.matrix)
        if any(len(row) != cols for row in self.matrix):
            raise LpError(f"every constraint row needs {cols} coefficients")
        if len(self.relations) != rows or len(self.rhs) != rows:
            raise LpError(
                f"{rows} rows but {len(self.relations)} relations and {len(self.rhs)} rhs"
            )
        if self.free and len(self.free) != cols:
            raise LpError(f"free flags must cover all {cols} variables")
        for value in (*self.objective, *self.rhs, *(v for row in self.matrix for v in row)):
            if isinstance(value, float) and not np.isfinite(value):
                raise LpError("linear program entries must be finite")

    @classmethod
    def build(
        cls,
        objective: Sequence[Number | int],
        matrix: Sequence[Sequence[Number | int]],
        relations: Sequence[Relation | str],
        rhs: Sequence[Number | int],
        *,
        sense: Sense | str = Sense.MINIMIZE,
        free: Sequence[bool] = (),
    ) -> LinearProgram:
        return cls(
            objective=tuple(objective),
            matrix=tuple(tuple(row) for row in matrix),
            relations=tuple(Relation(r) for r in relations),
            rhs=tuple(rhs),
            sense=Sense(sense),
            free=tuple(free),
        )

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    @property
    def num_rows(self) -> int:
        return len(self.matrix)

    def is_rational(self) -> bool:
        values = (*self.objective, *self.rhs, *(v for row in self.matrix for v in row))
        return all(isinstance(v, int | Fraction) for v in values)

    def is_free(self, var: int) -> bool:
        return bool(self.free) and self.free[var]

    def evaluate(self, x: Sequence[Number]) -> Number:
        return sum((c * v for c, v in zip(self.objective, x, strict=True)), start=0)

    def max_violation(self, x: Sequence[Number]) -> float:
        """Largest constraint or sign violation of ``x`` (0 when feasible)."""
        worst = 0.0
        for var, value in enumerate(x):
            if not self.is_free(var):
                worst = max(worst, float(-value))
        for row, relation, bound in zip(self.matrix, self.relations, self.rhs, strict=True):
            lhs = float(sum(float(a) * float(v) for a, v in zip(row, x, strict=True)))
            gap = lhs - float(bound)
            if relation is Relation.LE:
                worst = max(worst, gap)
            elif relation is Relation.GE:
                worst = max(worst, -gap)
            else:
                worst = max(worst, abs(gap))
        return worst


@dataclass(frozen=True)
class LpSolution:
    """Result of :func:`solve`."""

    status: LpStatus
    mode: LpMode
    value: Number | None = None
    x: tuple[Number, ...] = field(default_factory=tuple)
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass
class _Tableau:
    """Working tableau: constraint rows then the reduced-cost row; last column is the rhs."""

    table: np.ndarray
    basis: list[int]
    tol: Any
    guard: int
    pivots: int = 0

    def pivot(self, row: int, col: int) -> None:
        t = self.table
        t[row] = t[row] / t[row, col]
        factors = t[:, col].copy()
        factors[row] = 0
        t -= factors[:, None] * t[row][None, :]
        self.basis[row] = col
        self.pivots += 1
        if self.pivots > self.guard:
            raise LpError(f"anti-cycling guard tripped after {self.pivots} pivots")

    def run(self, allowed: int) -> bool:
        """Bland's-rule iterations over columns ``< allowed``; False when unbounded."""
        t = self.table
        while True:
            costs = t[-1, :allowed]
            candidates = np.flatnonzero(costs < -self.tol)
            if candidates.size == 0:
                return True
            entering = int(candidates[0])
            column = t[:-1, entering]
            best_row: int | None = None
            best_ratio: Any = None
            for i in range(len(self.basis)):
                if column[i] <= self.tol:
                    continue
                ratio = t[i, -1] / column[i]
                if best_row is None or ratio < best_ratio - self.tol:
                    best_row, best_ratio = i, ratio
                elif ratio <= best_ratio + self.tol and self.basis[i] < self.basis[best_row]:
                    best_row, best_ratio = i, min(ratio, best_ratio)
            if best_row is None:
                return False
            self.pivot(best_row, entering)


def _standard_form(
    lp: LinearProgram, dtype: Any, convert: Any
) -> tuple[np.ndarray, list[int], list[int], int]:
    """Build the phase-one tableau.

    Returns the table, the starting basis, the artificial columns and the
    number of structural plus slack columns.
    """
    split: list[tuple[int, int]] = []
    structural = 0
    for var in range(lp.num_vars):
        split.append((structural, structural + 1 if lp.is_free(var) else -1))
        structural += 2 if lp.is_free(var) else 1

    rows: list[tuple[list[Any], Relation, Any]] = []
    for coeffs, relation, bound in zip(lp.matrix, lp.relations, lp.rhs, strict=True):
        row = [convert(0)] * structural
        for var, value in enumerate(coeffs):
            plus, minus = split[var]
            row[plus] = convert(value)
            if minus >= 0:
                row[minus] = -convert(value)
        b = convert(bound)
        if b < 0:
            row = [-v for v in row]
            b = -b
            relation = {Relation.LE: Relation.GE, Relation.GE: Relation.LE}.get(
                relation, relation
            )
        rows.append((row, relation, b))

    slack_count = sum(1 for _, rel, _ in rows if rel is not Relation.EQ)
    art_count = sum(1 for _, rel, _ in rows if rel is not Relation.LE)
    width = structural + slack_count + art_count
    m = len(rows)
    table = np.empty((m + 1, width + 1), dtype=dtype)
    table[:] = convert(0)

    basis: list[int] = []
    artificials: list[int] = []
    slack_col = structural
    art_col = structural + slack_count
    for i, (row, relation, b) in enumerate(rows):
        table[i, :structural] = row
        table[i, -1] = b
        if relation is Relation.LE:
            table[i, slack_col] = convert(1)
            basis.append(slack_col)
            slack_col += 1
            continue
        if relation is Relation.GE:
            table[i, slack_col] = convert(-1)
            slack_col += 1
        table[i, art_col] = convert(1)
        basis.append(art_col)
        artificials.append(art_col)
        art_col += 1

    for col in artificials:
        table[-1, col] = convert(1)
    for i, col in enumerate(basis):
        if col in artificials:
            table[-1] -= table[i]
    return table, basis, artificials, structural + slack_count


def _recover(
    lp: LinearProgram, table: np.ndarray, basis: list[int], convert: Any
) -> tuple[Any, ...]:
    values = [convert(0)] * (table.shape[1] - 1)
    for i, col in enumerate(basis):
        values[col] = table[i, -1]
    x: list[Any] = []
    position = 0
    for var in range(lp.num_vars):
        if lp.is_free(var):
            x.append(values[position] - values[position + 1])
            position += 2
        else:
            x.append(values[position])
            position += 1
    return tuple(x)


def _solve_once(lp: LinearProgram, mode: LpMode) -> LpSolution:
    if mode is LpMode.RATIONAL:
        dtype: Any = object
        convert: Any = _to_fraction
        tol: Any = Fraction(0)
    else:
        dtype = float
        convert = float
        tol = FLOAT_TOLERANCE

    table, basis, artificials, real_cols = _standard_form(lp, dtype, convert)
    m = len(basis)
    guard = min(MAX_PIVOT_GUARD, 4 * comb(table.shape[1] - 1, m) + 16)
    tableau = _Tableau(table, basis, tol, guard)

    if artificials:
        tableau.run(table.shape[1] - 1)
        if -tableau.table[-1, -1] > tol * max(1, m):
            return LpSolution(LpStatus.INFEASIBLE, mode, pivots=tableau.pivots)
        _drive_out_artificials(tableau, artificials, real_cols)

    table = tableau.table[:, list(range(real_cols)) + [tableau.table.shape[1] - 1]]
    tableau.table = table
    structural_cost = _phase_two_costs(lp, convert, real_cols)
    table[-1, :] = convert(0)
    table[-1, :real_cols] = structural_cost
    for i, col in enumerate(tableau.basis):
        if structural_cost[col] != 0:
            table[-1] -= structural_cost[col] * table[i]

    if not tableau.run(real_cols):
        return LpSolution(LpStatus.UNBOUNDED, mode, pivots=tableau.pivots)

    minimum = -table[-1, -1]
    value = minimum if lp.sense is Sense.MINIMIZE else -minimum
    x = _recover(lp, table, tableau.basis, convert)
    if mode is LpMode.FLOAT:
        value = float(value)
        x = tuple(float(v) for v in x)
    return LpSolution(LpStatus.OPTIMAL, mode, value=value, x=x, pivots=tableau.pivots)


def _drive_out_artificials(tableau: _Tableau, artificials: list[int], real_cols: int) -> None:
    """Pivot basic artificials out at zero level; drop rows that are redundant."""
    art = set(artificials)
    row = 0
    while row < len(tableau.basis):
        if tableau.basis[row] not in art:
            row += 1
            continue
        entries = tableau.table[row, :real_cols]
        col = next((j for j in range(real_cols) if abs(entries[j]) > tableau.tol), None)
        if col is None:
            tableau.table = np.delete(tableau.table, row, axis=0)
            del tableau.basis[row]
            continue
        tableau.pivot(row, col)
        row += 1


def _phase_two_costs(lp: LinearProgram, convert: Any, real_cols: int) -> list[Any]:
    sign = 1 if lp.sense is Sense.MINIMIZE else -1
    costs: list[Any] = []
    for var, c in enumerate(lp.objective):
        value = convert(c) * sign
        costs.append(value)
        if lp.is_free(var):
            costs.append(-value)
    costs.extend(convert(0) for _ in range(real_cols - len(costs)))
    return costs


def _to_fraction(value: Any) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def solve(lp: LinearProgram, mode: LpMode = LpMode.FLOAT) -> LpSolution:
    """Solve ``lp`` with the deterministic two-phase simplex.

    A float solve that breaks down numerically (non-finite values, an optimum
    that violates its own constraints, or a pivot guard trip) is retried in
    rational arithmetic when every input is an integer or Fraction.
    """
    mode = LpMode(mode)
    if mode is LpMode.RATIONAL and not lp.is_rational():
        logger.debug("rational mode on float inputs: converting floats exactly")
    if mode is LpMode.RATIONAL:
        return _solve_once(lp, mode)

    try:
        result = _solve_once(lp, mode)
        breakdown = result.optimal and (
            not all(np.isfinite(result.x))
            or lp.max_violation(result.x) > FEASIBILITY_TOLERANCE * _scale(lp)
        )
    except (LpError, FloatingPointError, ZeroDivisionError) as e:
        if not lp.is_rational():
            raise
        logger.warning("float simplex failed (%s); retrying in rational mode", e)
        return _solve_once(lp, LpMode.RATIONAL)

    if breakdown:
        if not lp.is_rational():
            raise LpError("float simplex returned an infeasible optimum")
        logger.warning("float simplex lost feasibility; retrying in rational mode")
        return _solve_once(lp, LpMode.RATIONAL)
    return result


def _scale(lp: LinearProgram) -> float:
    values = [abs(float(v)) for v in (*lp.rhs, *(v for row in lp.matrix for v in row))]
    return max([1.0, *values])
