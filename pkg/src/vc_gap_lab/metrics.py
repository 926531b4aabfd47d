"""Finite metrics, cut decompositions, exact l1 distortion and the tensor metric."""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np
from pydantic import ValidationError

from vc_gap_lab.errors import MetricError
from vc_gap_lab.lp import LinearProgram, Relation, solve
from vc_gap_lab.models import (
    CutModel,
    EmbeddingMethod,
    EmbeddingReport,
    LpMode,
    MetricFile,
    PentagonalWitnessModel,
    TensorReport,
)
from vc_gap_lab.numerics import format_number, is_psd, to_fraction

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from vc_gap_lab.graph import Graph
    from vc_gap_lab.isoperimetry import PoincareConstants
    from vc_gap_lab.numerics import Number
    from vc_gap_lab.relaxations import VectorSolution

logger = logging.getLogger(__name__)

MAX_LP_POINTS = 17
MAX_TENSOR_DIM = 8
SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FiniteMetric:
    """Symmetric nonnegative distance matrix with zero diagonal.

    The triangle inequality is not assumed; see :func:`triangle_census`.
    """

    dist: tuple[tuple[Number, ...], ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        size = len(self.dist)
        if any(len(row) != size for row in self.dist):
            raise MetricError("distance matrix must be square")
        if len(self.labels) != size:
            raise MetricError("labels must match the number of points")
        scale = max((abs(float(v)) for row in self.dist for v in row), default=0.0)
        for i in range(size):
            if self.dist[i][i] != 0:
                raise MetricError(f"d({i},{i}) must be 0")
            for j in range(i + 1, size):
                a, b = self.dist[i][j], self.dist[j][i]
                if a < 0:
                    raise MetricError(f"d({i},{j}) is negative")
                if a != b and abs(float(a) - float(b)) > SYMMETRY_TOLERANCE * max(scale, 1.0):
                    raise MetricError(f"d({i},{j}) != d({j},{i})")

    @classmethod
    def from_matrix(
        cls,
        rows: Sequence[Sequence[int | float | str | Fraction]],
        labels: Sequence[str] | None = None,
    ) -> FiniteMetric:
        """Ints and 'p/q' strings become exact Fractions; floats stay floats."""
        dist = tuple(
            tuple(float(v) if isinstance(v, float) else to_fraction(v) for v in row)
            for row in rows
        )
        names = tuple(labels) if labels is not None else tuple(str(i) for i in range(len(dist)))
        return cls(dist, names)

    @property
    def size(self) -> int:
        return len(self.dist)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for row in self.dist for v in row)

    @property
    def array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.dist], dtype=float).reshape(
            self.size, self.size
        )

    def d(self, i: int, j: int) -> Number:
        return self.dist[i][j]

    def scaled(self, factor: Number | int) -> FiniteMetric:
        return FiniteMetric(tuple(tuple(v * factor for v in row) for row in self.dist), self.labels)

    def permuted(self, order: Sequence[int]) -> FiniteMetric:
        """Relabel points so that new point ``a`` is old point ``order[a]``."""
        if sorted(order) != list(range(self.size)):
            raise MetricError("order must be a permutation of the points")
        dist = tuple(tuple(self.dist[i][j] for j in order) for i in order)
        return FiniteMetric(dist, tuple(self.labels[i] for i in order))


def load_metric(path: Path) -> FiniteMetric:
    """Read ``{"labels": [...], "dist": [[...]]}``."""
    try:
        data = MetricFile.model_validate_json(path.read_text())
    except OSError as e:
        raise MetricError(f"cannot read metric file {path}: {e}") from e
    except ValidationError as e:
        raise MetricError(f"invalid metric file {path}: {e.errors()[0]['msg']}") from e
    try:
        return FiniteMetric.from_matrix(data.dist, data.labels)
    except (ValueError, ZeroDivisionError) as e:
        raise MetricError(f"invalid distance entry in {path}: {e}") from e


def dump_metric(metric: FiniteMetric) -> str:
    rows = [
        [str(v) if isinstance(v, Fraction) and v.denominator != 1 else _json_number(v) for v in r]
        for r in metric.dist
    ]
    return json.dumps({"labels": list(metric.labels), "dist": rows}, indent=2) + "\n"


def _json_number(value: Number) -> int | float:
    if isinstance(value, Fraction):
        return int(value)
    return value


# --- Inequality censuses ---


@dataclass(frozen=True)
class TriangleWitness:
    """Smallest ``d(i,k) + d(k,j) - d(i,j)`` over distinct triples."""

    slack: float
    i: int
    j: int
    k: int
    ratio: float


def triangle_census(metric: FiniteMetric) -> TriangleWitness | None:
    """Worst triangle inequality; ties go to the lexicographically first (k, i, j)."""
    m = metric.size
    if m < 3:
        return None
    dist = metric.array
    best: TriangleWitness | None = None
    upper = np.triu(np.ones((m, m), dtype=bool), k=1)
    for k in range(m):
        slack = dist[:, k][:, None] + dist[k, :][None, :] - dist
        valid = upper.copy()
        valid[k, :] = False
        valid[:, k] = False
        masked = np.where(valid, slack, np.inf)
        flat = int(np.argmin(masked))
        value = float(masked.flat[flat])
        if best is None or value < best.slack:
            i, j = divmod(flat, m)
            through = dist[i, k] + dist[k, j]
            ratio = float(dist[i, j] / through) if through > 0 else 1.0
            best = TriangleWitness(value, i, j, k, ratio)
    return best


# --- Cut measures ---


@dataclass(frozen=True)
class CutMeasure:
    """Weighted cuts over ``size`` points.

    A mask has bit ``i`` set when point ``i`` lies on the far side of the cut.
    Masks never contain point 0, so point 0 always sits on the +1 side. The
    induced distance is the total weight of cuts separating two points.
    """

    size: int
    cuts: tuple[tuple[int, Number], ...]

    def __post_init__(self) -> None:
        full = (1 << self.size) - 1
        for mask, weight in self.cuts:
            if mask & 1 or not 0 < mask <= full:
                raise MetricError(f"cut mask {mask:#x} is not normalized for {self.size} points")
            if weight <= 0:
                raise MetricError("cut weights must be strictly positive")

    @classmethod
    def from_cuts(cls, size: int, cuts: Sequence[tuple[int, Number]]) -> CutMeasure:
        """Normalize masks, merge repeated cuts and drop empty ones."""
        full = (1 << size) - 1
        merged: dict[int, Number] = {}
        for mask, weight in cuts:
            mask &= full
            if mask & 1:
                mask ^= full
            if mask == 0 or weight == 0:
                continue
            merged[mask] = merged.get(mask, 0) + weight
        return cls(size, tuple(sorted((m, w) for m, w in merged.items() if w != 0)))

    def distance(self, i: int, j: int) -> Number:
        total: Number = Fraction(0) if self.exact else 0.0
        for mask, weight in self.cuts:
            if ((mask >> i) ^ (mask >> j)) & 1:
                total += weight
        return total

    @property
    def exact(self) -> bool:
        return all(isinstance(w, Fraction | int) for _, w in self.cuts)

    @property
    def total_weight(self) -> Number:
        return sum((w for _, w in self.cuts), start=Fraction(0) if self.exact else 0.0)

    def to_models(self) -> list[CutModel]:
        return [CutModel(mask=f"{mask:#x}", weight=format_number(w)) for mask, w in self.cuts]


def cut_measure_to_metric(cm: CutMeasure, labels: Sequence[str] | None = None) -> FiniteMetric:
    rows = [[cm.distance(i, j) for j in range(cm.size)] for i in range(cm.size)]
    return FiniteMetric.from_matrix(rows, labels)


def _exact_coords(coords: Sequence[Sequence[Number | int]]) -> bool:
    return all(isinstance(v, int | Fraction) for point in coords for v in point)


def l1_points_to_cut_measure(coords: Sequence[Sequence[Number | int]]) -> CutMeasure:
    """Threshold cuts per coordinate; the induced metric equals the l1 metric of ``coords``."""
    size = len(coords)
    if size == 0:
        return CutMeasure(0, ())
    dims = len(coords[0])
    if any(len(p) != dims for p in coords):
        raise MetricError("all points must have the same dimension")
    exact = _exact_coords(coords)
    points = [[Fraction(v) if exact else float(v) for v in p] for p in coords]
    cuts: list[tuple[int, Number]] = []
    for c in range(dims):
        values = sorted({p[c] for p in points})
        for low, high in itertools.pairwise(values):
            mask = 0
            for idx, p in enumerate(points):
                if p[c] <= low:
                    mask |= 1 << idx
            cuts.append((mask, high - low))
    return CutMeasure.from_cuts(size, cuts)


def two_valued_cut_measure(coords: Sequence[Sequence[Number | int]]) -> CutMeasure:
    """Cut measure of the squared Euclidean metric of two-valued coordinates.

    A coordinate taking values p and q contributes one cut of weight (p - q)^2.
    """
    size = len(coords)
    if size == 0:
        return CutMeasure(0, ())
    dims = len(coords[0])
    exact = _exact_coords(coords)
    points = [[Fraction(v) if exact else float(v) for v in p] for p in coords]
    cuts: list[tuple[int, Number]] = []
    for c in range(dims):
        values = sorted({p[c] for p in points})
        if len(values) > 2:
            raise MetricError(f"coordinate {c} takes {len(values)} values, expected at most 2")
        if len(values) < 2:
            continue
        low, high = values
        mask = 0
        for idx, p in enumerate(points):
            if p[c] == low:
                mask |= 1 << idx
        cuts.append((mask, (high - low) ** 2))
    return CutMeasure.from_cuts(size, cuts)


def is_negative_type(metric: FiniteMetric, base: int = 0) -> bool:
    """True when the Gram form of ``metric`` about ``base`` is PSD."""
    if metric.size == 0:
        return True
    dist = metric.array
    gram = (dist[:, base][:, None] + dist[base, :][None, :] - dist) / 2
    return is_psd(gram)


# --- Exact distortion ---


def _cut_columns(size: int) -> list[int]:
    """One mask per complement class of nonempty proper cuts (point 0 outside)."""
    return [s << 1 for s in range(1, 1 << (size - 1))]


def l1_lower_bound(metric: FiniteMetric) -> tuple[float, PentagonalWitnessModel | None]:
    """Distortion lower bound from the worst triangle and pentagonal inequalities."""
    from vc_gap_lab.pentagon import pentagonal_census

    lower = 1.0
    witness_model: PentagonalWitnessModel | None = None
    triangle = triangle_census(metric)
    if triangle is not None and triangle.slack < 0:
        lower = max(lower, triangle.ratio)
    if metric.size >= 5:
        census = pentagonal_census(metric)
        witness = census.witness
        if witness is not None and witness.slack < 0 and witness.lhs > 0:
            lower = max(lower, witness.rhs / witness.lhs)
            witness_model = witness.to_model()
    return lower, witness_model


def min_distortion_l1(metric: FiniteMetric, mode: LpMode = LpMode.FLOAT) -> EmbeddingReport:
    """Exact c1 of a small metric via the cut-cone LP.

    Variables are one weight per cut class plus the scale D; rows ask
    ``d <= sum(weights * delta) <= D * d`` for every pair and D is minimized.
    The certificate is rescaled to be nonexpanding.
    """
    m = metric.size
    if m > MAX_LP_POINTS:
        raise MetricError(f"cut-cone LP supports at most {MAX_LP_POINTS} points, got {m}")
    lower, witness = l1_lower_bound(metric)
    positive = any(metric.d(i, j) != 0 for i, j in itertools.combinations(range(m), 2))
    if m <= 2 or not positive:
        return EmbeddingReport(
            points=m,
            c1_lower=1.0,
            c1_exact=1.0,
            c1_exact_rational="1",
            method=EmbeddingMethod.CUT_CONE_LP,
            certificate=CutMeasure.from_cuts(
                m, [(2, metric.d(0, 1))] if positive else []
            ).to_models(),
        )

    exact = mode is LpMode.RATIONAL
    convert = to_fraction if exact else float
    masks = _cut_columns(m)
    width = len(masks) + 1
    matrix: list[list[Number]] = []
    relations: list[Relation] = []
    rhs: list[Number] = []
    zero = convert(0)
    for i, j in itertools.combinations(range(m), 2):
        delta = [convert(1) if ((mask >> i) ^ (mask >> j)) & 1 else zero for mask in masks]
        d = convert(metric.d(i, j))
        if d == 0:
            matrix.append([*delta, zero])
            relations.append(Relation.LE)
            rhs.append(zero)
            continue
        matrix.append([*delta, zero])
        relations.append(Relation.GE)
        rhs.append(d)
        matrix.append([*delta, -d])
        relations.append(Relation.LE)
        rhs.append(zero)
    objective = [zero] * (width - 1) + [convert(1)]
    lp = LinearProgram.build(objective, matrix, relations, rhs)
    logger.info("cut-cone LP: %d points, %d cut columns, %s mode", m, len(masks), mode.value)
    solution = solve(lp, mode)
    if not solution.optimal or solution.value is None:
        raise MetricError(
            f"cut-cone LP is {solution.status.value}; zero distances must form a consistent "
            "partition"
        )
    scale = solution.value
    weights = solution.x[:-1]
    certificate = CutMeasure.from_cuts(
        m, [(mask, w / scale) for mask, w in zip(masks, weights, strict=True) if w > 0]
    )
    c1 = float(scale)
    return EmbeddingReport(
        points=m,
        c1_lower=lower,
        c1_exact=c1,
        c1_exact_rational=str(scale) if isinstance(scale, Fraction) else None,
        method=EmbeddingMethod.CUT_CONE_LP,
        certificate=certificate.to_models(),
        violated_inequality=witness,
        lp_pivots=solution.pivots,
    )


def poincare_lower_bound_report(metric: FiniteMetric) -> EmbeddingReport:
    """Lower bound only, from the triangle and pentagonal inequalities."""
    lower, witness = l1_lower_bound(metric)
    return EmbeddingReport(
        points=metric.size,
        c1_lower=lower,
        method=EmbeddingMethod.POINCARE_BOUND,
        violated_inequality=witness,
    )


# --- Tensor metric ---


def _cube_signs(dim: int, vertices: Sequence[int] | range) -> np.ndarray:
    bits = np.asarray(vertices, dtype=np.int64)[:, None]
    coords = np.arange(dim, dtype=np.int64)[None, :]
    return np.where((bits >> coords) & 1, 1, -1).astype(np.int64)


def tensor_metric(n: int, merged: bool = True) -> FiniteMetric:
    """Squared distances between ``u (x) u`` for cube points plus the origin (index 0).

    ``d(u, 0) = n^2`` and ``d(u, v) = 2n^2 - 2(u.v)^2``. When merged, u and -u
    (at distance 0) become one point represented by the vertex with the top
    coordinate equal to -1.
    """
    if not 1 <= n <= MAX_TENSOR_DIM:
        raise MetricError(f"tensor metric supports 1 <= n <= {MAX_TENSOR_DIM}, got {n}")
    reps = range(1 << (n - 1)) if merged else range(1 << n)
    signs = _cube_signs(n, reps)
    dots = signs @ signs.T
    cube = 2 * n * n - 2 * dots * dots
    size = len(reps) + 1
    rows: list[list[int]] = [[0] * size for _ in range(size)]
    for a in range(1, size):
        rows[0][a] = rows[a][0] = n * n
        for b in range(1, size):
            rows[a][b] = int(cube[a - 1, b - 1])
    labels = ["origin", *(f"u{u:#x}" for u in reps)]
    return FiniteMetric.from_matrix(rows, labels)


def poincare_distortion_bound(n: int, constants: PoincareConstants | None = None) -> float:
    """Distortion lower bound for the tensor metric on Q_n; increases to 8/7."""
    from vc_gap_lab.isoperimetry import PoincareConstants

    if n < 2:
        raise MetricError("the distortion bound needs n >= 2")
    c = constants or PoincareConstants()
    base = 4 * c.alpha + 0.5
    return c.factor / (base + 1.0 / (2 * (n - 1)))


def tensor_report(
    n: int, merged: bool = True, exact_c1: bool = False, mode: LpMode = LpMode.FLOAT
) -> TensorReport:
    """Check the tensor metric identities and optionally solve its exact c1."""
    metric = tensor_metric(n, merged)
    full = (1 << n) - 1
    half = 1 << (n - 1)

    def index(u: int) -> int:
        if merged and u >= half:
            u ^= full
        return u + 1

    origin_ok = all(metric.d(0, a) == n * n for a in range(1, metric.size))
    edge = 8 * (n - 1)
    edge_ok = all(
        metric.d(index(u), index(u ^ (1 << c))) == edge
        for u in range(1 << n)
        for c in range(n)
    )
    signs = _cube_signs(n, range(1 << n))
    dots = signs @ signs.T
    pair_sum = int(np.sum(2 * n * n - 2 * dots * dots))
    expected = (1 << (2 * n)) * (2 * n * n - 2 * n)
    triangle = triangle_census(metric)
    embedding = None
    if exact_c1:
        embedding = min_distortion_l1(metric, mode)
    return TensorReport(
        n=n,
        merged=merged,
        points=metric.size,
        origin_distance_ok=origin_ok,
        edge_distance=edge,
        edge_distance_ok=edge_ok,
        ordered_pair_sum=pair_sum,
        ordered_pair_sum_expected=expected,
        triangle_min_slack=triangle.slack if triangle is not None else 0.0,
        negative_type=is_negative_type(metric),
        distortion_lower_bound=poincare_distortion_bound(n) if n >= 2 else 1.0,
        embedding=embedding,
    )


# --- Rounding ---


@dataclass(frozen=True)
class RoundingResult:
    """Cover extracted from the largest independent set of a cut decomposition."""

    cover: int
    cover_size: int
    independent_sizes: tuple[int, ...]
    lambdas: tuple[float, ...]
    sum_lambda: float
    weighted_bound: float
    objective: float

    def cover_vertices(self) -> list[int]:
        return [v for v in range(self.cover.bit_length()) if (self.cover >> v) & 1]


def cut_rounding(
    graph: Graph, sol: VectorSolution, cm: CutMeasure, tol: float = 1e-9
) -> RoundingResult:
    """Round a cut decomposition of a feasible solution to a vertex cover.

    Each cut (oriented so the apex is on the +1 side) yields the independent
    set of vertices on the -1 side. Weights of cuts are halved to match the
    ``|f(i) - f(j)| in {0, 2}`` convention, so an integral solution has a single
    cut with lambda = 2.
    """
    from vc_gap_lab.relaxations import objective

    size = graph.order + 1
    if sol.size != size or cm.size != size:
        raise MetricError(f"expected {size} points, got solution {sol.size} and cuts {cm.size}")
    gram = sol.gram
    diag = np.diag(gram)
    squared = diag[:, None] + diag[None, :] - 2 * gram
    scale = max(1.0, float(np.max(np.abs(squared))) if squared.size else 1.0)
    for i, j in itertools.combinations(range(size), 2):
        if abs(float(cm.distance(i, j)) - squared[i, j]) > tol * scale:
            raise MetricError(
                f"cut measure gives {float(cm.distance(i, j))} for ({i}, {j}) "
                f"but the solution has {squared[i, j]}"
            )

    sizes: list[int] = []
    lambdas: list[float] = []
    best_set = 0
    for mask, weight in cm.cuts:
        independent = mask >> 1
        if not graph.is_independent(independent):
            raise MetricError(f"cut {mask:#x} puts both ends of an edge opposite the apex")
        sizes.append(independent.bit_count())
        lambdas.append(float(weight) / 2)
        if independent.bit_count() > best_set.bit_count():
            best_set = independent
    cover = graph.full_mask & ~best_set
    return RoundingResult(
        cover=cover,
        cover_size=cover.bit_count(),
        independent_sizes=tuple(sizes),
        lambdas=tuple(lambdas),
        sum_lambda=sum(lambdas),
        weighted_bound=sum(lam * s for lam, s in zip(lambdas, sizes, strict=True)) / 2,
        objective=objective(sol),
    )
