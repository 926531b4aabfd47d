"""Exhaustive audits of cube isoperimetry, the cube-plus-point Poincare inequality
and the calculus lemma behind its constant."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from vc_gap_lab.cube import (
    VertexSet,
    antipodal_count,
    edge_boundary,
    enumerate_subsets,
)
from vc_gap_lab.errors import IsoperimetryError
from vc_gap_lab.models import (
    BoundKind,
    IsoperimetryRecord,
    IsoperimetryReport,
    LemmaReport,
    PoincareRecord,
    PoincareReport,
)
from vc_gap_lab.sharding import merge_records

logger = logging.getLogger(__name__)

SLACK_TOLERANCE = 1e-9
EQUALITY_TOLERANCE = 1e-9


def _default_alpha() -> float:
    return math.log(2) / (14 - 8 * math.log(2))


@dataclass(frozen=True)
class PoincareConstants:
    """alpha = ln 2 / (14 - 8 ln 2) and factor = (8/7)(4 alpha + 1/2)."""

    alpha: float = field(default_factory=_default_alpha)

    @property
    def factor(self) -> float:
        return (4 * self.alpha + 0.5) / (7 / 8)


def log2_size(size: int) -> float:
    """log2 of a positive integer, exact at powers of two."""
    if size <= 0:
        raise IsoperimetryError("log2 of a non-positive size")
    if size & (size - 1) == 0:
        return float(size.bit_length() - 1)
    return math.log2(size)


def isoperimetric_bound(n: int, size: int, p: int, kind: BoundKind) -> float:
    """Right-hand side for a set of ``size`` vertices with ``p`` antipodal vertices."""
    if size == 0:
        return 0.0
    x = n - log2_size(size)
    if kind is BoundKind.STANDARD:
        return size * x
    if kind is BoundKind.COROLLARY:
        return size * (x + 1)
    return size * x + p


def check_generalized(s: VertexSet, kind: BoundKind = BoundKind.GENERALIZED) -> IsoperimetryRecord:
    """Boundary, antipodal count, bound and slack for one set."""
    boundary = edge_boundary(s)
    p = antipodal_count(s)
    bound = isoperimetric_bound(s.dim, s.size, p, kind)
    return IsoperimetryRecord(
        n=s.dim,
        set_bits_hex=s.hex(),
        size=s.size,
        boundary=boundary,
        p=p,
        antipodal_pairs=p // 2,
        bound=bound,
        slack=boundary - bound,
    )


def census_generalized(
    n: int,
    restrict_small: bool = False,
    *,
    symmetric: bool = False,
    kind: BoundKind = BoundKind.GENERALIZED,
    shard_index: int = 0,
    shard_count: int = 1,
) -> IsoperimetryReport:
    """Every set with negative slack; ``restrict_small`` judges only |S| <= 2^(n-1)."""
    half = 1 << (n - 1)
    violations: list[IsoperimetryRecord] = []
    checked = 0
    for s in enumerate_subsets(n, symmetric, shard_index=shard_index, shard_count=shard_count):
        size = s.size
        if restrict_small and size > half:
            continue
        checked += 1
        boundary = edge_boundary(s)
        p = antipodal_count(s)
        if boundary - isoperimetric_bound(n, size, p, kind) < -SLACK_TOLERANCE:
            violations.append(check_generalized(s, kind))
    logger.info(
        "isoperimetry census n=%d (%s%s): %d sets, %d violations",
        n,
        kind.value,
        ", symmetric" if symmetric else "",
        checked,
        len(violations),
    )
    return IsoperimetryReport(
        n=n,
        bound=kind,
        symmetric=symmetric,
        restrict_small=restrict_small,
        checked=checked,
        violations=sorted(violations, key=_descriptor),
    )


def _descriptor(record: IsoperimetryRecord | PoincareRecord) -> int:
    return int(record.set_bits_hex, 16)


def merge_isoperimetry(reports: list[IsoperimetryReport]) -> IsoperimetryReport:
    """Concatenate shard results, ordered by set descriptor."""
    violations = merge_records((r.violations for r in reports), key=_descriptor)
    return reports[0].model_copy(
        update={"checked": sum(r.checked for r in reports), "violations": violations}
    )


def poincare_check(s: VertexSet, c: PoincareConstants | None = None) -> PoincareRecord:
    """Both sides of (1/2^n) factor |S||S^c| <= alpha |E(S,S^c)| + |S|/2 for symmetric S."""
    if not s.is_symmetric():
        raise IsoperimetryError("the Poincare check needs an antipodally closed set")
    c = c or PoincareConstants()
    n = s.dim
    size = s.size
    boundary = edge_boundary(s)
    lhs = c.factor * size * ((1 << n) - size) / (1 << n)
    rhs = c.alpha * boundary + size / 2
    return PoincareRecord(
        n=n,
        set_bits_hex=s.hex(),
        size=size,
        boundary=boundary,
        lhs=lhs,
        rhs=rhs,
        slack=rhs - lhs,
    )


def poincare_census(
    n: int,
    c: PoincareConstants | None = None,
    *,
    shard_index: int = 0,
    shard_count: int = 1,
) -> PoincareReport:
    """Check every symmetric set; equality cases are listed among nonempty sets."""
    c = c or PoincareConstants()
    violations: list[PoincareRecord] = []
    equality: list[PoincareRecord] = []
    checked = 0
    for s in enumerate_subsets(n, True, shard_index=shard_index, shard_count=shard_count):
        checked += 1
        record = poincare_check(s, c)
        if record.slack < -SLACK_TOLERANCE:
            violations.append(record)
        elif s.size and abs(record.slack) <= EQUALITY_TOLERANCE:
            equality.append(record)
    logger.info(
        "Poincare census n=%d: %d sets, %d violations, %d equality cases",
        n,
        checked,
        len(violations),
        len(equality),
    )
    return PoincareReport(
        n=n,
        checked=checked,
        violations=sorted(violations, key=_descriptor),
        equality_cases=sorted(equality, key=_descriptor),
    )


def merge_poincare(reports: list[PoincareReport]) -> PoincareReport:
    return PoincareReport(
        n=reports[0].n,
        checked=sum(r.checked for r in reports),
        violations=merge_records((r.violations for r in reports), key=_descriptor),
        equality_cases=merge_records((r.equality_cases for r in reports), key=_descriptor),
    )


def lemma_function(x: float | np.ndarray, c: PoincareConstants | None = None) -> float | np.ndarray:
    """f(x) = (alpha (x + 1) + 1/2) / (1 - 2^-x)."""
    alpha = (c or PoincareConstants()).alpha
    return (alpha * (x + 1) + 0.5) / (1 - np.exp2(-x))


def calculus_lemma_scan(
    grid: int = 1000,
    c: PoincareConstants | None = None,
    lo: float = 1.0,
    hi: float = 64.0,
) -> LemmaReport:
    """Coarse grid minimum of the lemma function refined by golden-section search."""
    if grid < 3:
        raise IsoperimetryError("the grid needs at least 3 points")
    c = c or PoincareConstants()
    xs = np.linspace(lo, hi, grid)
    values = lemma_function(xs, c)
    idx = int(np.argmin(values))

    def f(x: float) -> float:
        return float(lemma_function(x, c))

    if 0 < idx < grid - 1:
        bracket: tuple[float, ...] = (float(xs[idx - 1]), float(xs[idx]), float(xs[idx + 1]))
    else:
        bracket = (float(xs[max(idx - 1, 0)]), float(xs[min(idx + 1, grid - 1)]))
    result = optimize.minimize_scalar(f, bracket=bracket, method="golden", tol=1e-12)
    argmin = float(result.x)
    h = 1e-5
    derivative = (f(3 + h) - f(3 - h)) / (2 * h)
    return LemmaReport(
        alpha=c.alpha,
        grid=grid,
        coarse_argmin=float(xs[idx]),
        argmin=argmin,
        minval=f(argmin),
        expected_minval=c.factor,
        f_at_one=f(1.0),
        derivative_at_three=derivative,
    )
