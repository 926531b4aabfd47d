"""Charikar's gap solution on the Hamming instance: the polynomial q, beta and tier checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, overload

import numpy as np

from vc_gap_lab.cube import check_shard, profile_dots, profile_matrix
from vc_gap_lab.errors import CharikarError
from vc_gap_lab.graph import ADJACENCY_NOTE
from vc_gap_lab.models import (
    CharikarParamsModel,
    ExplicitEmbeddingReport,
    FeasibilityReport,
    GapReport,
    Tier,
)
from vc_gap_lab.numerics import format_number
from vc_gap_lab.relaxations import triangle_families, triangle_values

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

logger = logging.getLogger(__name__)

RATIONAL_RECHECK_MAX_T = 2
MATERIALIZE_MAX_POINTS = 256
MATERIALIZE_MAX_TENSOR = 4096
MAX_PROFILE_DIM = 24


def _lam(t: int) -> Fraction:
    if t < 1:
        raise CharikarError(f"t must be a positive integer, got {t}")
    return 1 - Fraction(1, 2 * t)


def linear_coefficient(t: int) -> Fraction:
    """2t * lambda^(2t-1)."""
    return 2 * t * _lam(t) ** (2 * t - 1)


@overload
def q_eval(x: Fraction, t: int) -> Fraction: ...
@overload
def q_eval(x: float, t: int) -> float: ...
@overload
def q_eval(x: np.ndarray, t: int) -> np.ndarray: ...
def q_eval(x: Fraction | float | np.ndarray, t: int) -> Fraction | float | np.ndarray:
    """q(x) = x^(2t) + 2t lambda^(2t-1) x; exact for Fractions."""
    c = linear_coefficient(t)
    if isinstance(x, Fraction | int):
        return Fraction(x) ** (2 * t) + c * x
    return x ** (2 * t) + float(c) * x


def q_derivative(x: Fraction | float, t: int) -> Fraction | float:
    """q'(x) = 2t x^(2t-1) + 2t lambda^(2t-1); zero at -lambda."""
    c = linear_coefficient(t)
    if isinstance(x, Fraction | int):
        return 2 * t * Fraction(x) ** (2 * t - 1) + c
    return 2 * t * x ** (2 * t - 1) + float(c)


def solve_beta(t: int, exact: bool = True) -> Fraction | float:
    """beta = (q(1) + q(-lambda)) / (q(1) - q(-lambda)), forced by the edge equality."""
    lam = _lam(t)
    q_one = q_eval(Fraction(1), t)
    q_min = q_eval(-lam, t)
    beta = (q_one + q_min) / (q_one - q_min)
    return beta if exact else float(beta)


def beta_residual(t: int) -> float:
    """1 - 2 beta + beta^2 + (1 - beta^2) q(-lambda)/q(1) in floating point."""
    beta = float(solve_beta(t))
    lam = float(_lam(t))
    ratio = q_eval(-lam, t) / q_eval(1.0, t)
    return 1 - 2 * beta + beta * beta + (1 - beta * beta) * ratio


@dataclass(frozen=True)
class CharikarParams:
    """Parameters (t, n) of the construction; 4t must divide n."""

    t: int
    n: int

    def __post_init__(self) -> None:
        if self.t < 1:
            raise CharikarError(f"t must be a positive integer, got {self.t}")
        if self.n < 1 or self.n % (4 * self.t):
            raise CharikarError(f"4t = {4 * self.t} must divide n = {self.n}")

    @property
    def lam(self) -> Fraction:
        return _lam(self.t)

    @property
    def gamma(self) -> Fraction:
        return Fraction(1, 4 * self.t)

    @property
    def q_linear_coeff(self) -> Fraction:
        return linear_coefficient(self.t)

    @property
    def q_one(self) -> Fraction:
        return 1 + self.q_linear_coeff

    @property
    def q_min(self) -> Fraction:
        return q_eval(-self.lam, self.t)

    @property
    def beta(self) -> Fraction:
        return (self.q_one + self.q_min) / (self.q_one - self.q_min)

    @property
    def beta_float(self) -> float:
        return float(self.beta)

    @property
    def edge_dot(self) -> int:
        return int(-self.lam * self.n)

    @property
    def edge_distance(self) -> int:
        return (self.n - self.edge_dot) // 2

    @property
    def vertices(self) -> int:
        return 1 << self.n

    def to_model(self) -> CharikarParamsModel:
        return CharikarParamsModel(
            t=self.t,
            n=self.n,
            lam=str(self.lam),
            gamma=str(self.gamma),
            beta=str(self.beta),
            beta_float=self.beta_float,
            q_one=str(self.q_one),
            q_min=str(self.q_min),
            edge_dot=self.edge_dot,
            edge_distance=self.edge_distance,
        )


def cube_gram(x: np.ndarray | float, params: CharikarParams) -> np.ndarray | float:
    """y_u . y_v = beta^2 + (1 - beta^2) q(x)/q(1) for normalized cube dot product x."""
    beta = params.beta_float
    return beta * beta + (1 - beta * beta) * q_eval(x, params.t) / float(params.q_one)


def exact_cube_gram(dot: int, params: CharikarParams) -> Fraction:
    beta = params.beta
    x = Fraction(dot, params.n)
    return beta * beta + (1 - beta * beta) * q_eval(x, params.t) / params.q_one


@dataclass(frozen=True)
class CharikarSolution:
    """Implicit Gram oracle.

    Index 0 is y_0 and index ``i >= 1`` is the cube vertex with bits ``i - 1``.
    """

    params: CharikarParams

    @property
    def size(self) -> int:
        return self.params.vertices + 1

    def _check(self, i: int) -> None:
        if not 0 <= i < self.size:
            raise CharikarError(f"index {i} outside 0..{self.size - 1}")

    def y_dot(self, i: int, j: int, exact: bool = False) -> Fraction | float:
        self._check(i)
        self._check(j)
        if i == j:
            return Fraction(1) if exact else 1.0
        if i == 0 or j == 0:
            return self.params.beta if exact else self.params.beta_float
        n = self.params.n
        dot = n - 2 * ((i - 1) ^ (j - 1)).bit_count()
        if exact:
            return exact_cube_gram(dot, self.params)
        return float(cube_gram(dot / n, self.params))

    def gram(self, indices: Sequence[int]) -> np.ndarray:
        return np.array([[self.y_dot(i, j) for j in indices] for i in indices], dtype=float)


def objective_value(params: CharikarParams) -> Fraction:
    """(1 + beta)/2 * 2^n."""
    return (1 + params.beta) / 2 * params.vertices


# --- Tier verification ---


def profile_grams(dots: np.ndarray, params: CharikarParams) -> np.ndarray:
    """Gram of (y_0, y_u1..y_uk) for every profile row of pairwise cube dots."""
    m, k, _ = dots.shape
    gram = np.empty((m, k + 1, k + 1))
    gram[:, 0, 0] = 1.0
    gram[:, 0, 1:] = params.beta_float
    gram[:, 1:, 0] = params.beta_float
    gram[:, 1:, 1:] = cube_gram(dots / params.n, params)
    return gram


def _exact_profile_gram(dots: np.ndarray, params: CharikarParams) -> list[list[Fraction]]:
    k = dots.shape[0]
    beta = params.beta
    rows = [[Fraction(1)] + [beta] * k]
    for a in range(k):
        rows.append([beta] + [exact_cube_gram(int(dots[a, b]), params) for b in range(k)])
    return rows


def _edge_witness(params: CharikarParams) -> list[int]:
    """Indices of the edge between the all-minus vertex and its first neighbour."""
    return [1, 1 << params.edge_distance]


def verify_construction(
    params: CharikarParams,
    tiers: Iterable[Tier],
    tol: float = 1e-9,
    *,
    sample_size: int = 1_000_000,
    seed: int = 0,
    shard_index: int = 0,
    shard_count: int = 1,
    rational_recheck: bool = True,
) -> list[FeasibilityReport]:
    """Check the Charikar solution against each tier by sign-profile enumeration.

    Triangle and extended triangle families are evaluated on (y_0, y_u1, y_u2,
    y_u3) for every 3-point profile with distinct cube points; the pentagonal
    tier adds the 4-point profile census. For t <= 2 the edge residual and the
    worst slack are recomputed in exact arithmetic.
    """
    from vc_gap_lab.pentagon import verify_pentagonal_charikar

    check_shard(shard_index, shard_count)
    if params.n > MAX_PROFILE_DIM:
        raise CharikarError(f"profile enumeration supports n <= {MAX_PROFILE_DIM}")
    exact = rational_recheck and params.t <= RATIONAL_RECHECK_MAX_T
    beta = params.beta_float
    edge_residual = 1 - 2 * beta + float(cube_gram(-float(params.lam), params))
    exact_edge = 1 - 2 * params.beta + exact_cube_gram(params.edge_dot, params)
    vc_form = (1 + beta) / 2 * params.vertices
    distance_form = params.vertices * (1 - (2 - 2 * beta) / 4)

    counts = profile_matrix(params.n, 3, shard_index=shard_index, shard_count=shard_count)
    dots = profile_dots(counts, 3)
    upper = np.triu_indices(3, 1)
    distinct = ~np.any(dots[:, upper[0], upper[1]] == params.n, axis=1)
    counts, dots = counts[distinct], dots[distinct]
    grams = profile_grams(dots, params)

    reports: list[FeasibilityReport] = []
    for tier in tiers:
        worst = abs(edge_residual)
        family = "edge"
        witness = _edge_witness(params)
        signs: list[int] | None = None
        profile: list[int] | None = [params.n - params.edge_distance, params.edge_distance]
        exact_slack: Fraction | None = exact_edge if exact else None
        checked = 1
        if tier is not Tier.STANDARD:
            families = triangle_families(4, tier is Tier.KARAKOSTAS)
            values = triangle_values(grams, families)
            checked += values.size
            if values.size:
                row, col = divmod(int(np.argmin(values)), values.shape[1])
                if -float(values[row, col]) > worst:
                    worst = -float(values[row, col])
                    a, b, c, sa, sb = (int(v) for v in families[col])
                    family = "extended-triangle" if tier is Tier.KARAKOSTAS else "triangle"
                    witness = [a, b, c]
                    signs = [sa, sb] if tier is Tier.KARAKOSTAS else None
                    profile = [int(v) for v in counts[row]]
                    if exact:
                        g = _exact_profile_gram(dots[row], params)
                        exact_slack = sa * sb * g[a][b] - sa * g[a][c] - sb * g[b][c] + g[c][c]
        pentagonal_exhaustive = True
        if tier is Tier.PENTAGONAL:
            pent = verify_pentagonal_charikar(
                params,
                tol,
                sample_size=sample_size,
                seed=seed,
                shard_index=shard_index,
                shard_count=shard_count,
            )
            checked += pent.enumerated + pent.sampled
            pentagonal_exhaustive = pent.exhaustive
            if -pent.min_slack > worst and pent.witness is not None:
                worst = -pent.min_slack
                family = "pentagonal"
                witness = [*pent.witness.partition.S, *pent.witness.partition.T]
                signs = None
                profile = pent.witness.profile
                exact_slack = None
        reports.append(
            FeasibilityReport(
                tier=tier,
                feasible=worst <= tol,
                worst_violation=worst,
                family=family,
                violating_witness=witness,
                signs=signs,
                witness_profile=profile,
                constraints_checked=checked,
                exhaustive=pentagonal_exhaustive,
                objective_vc=vc_form,
                objective_distance_form=distance_form,
                exact_edge_residual=format_number(exact_edge) if exact else None,
                exact_worst_slack=format_number(exact_slack) if exact_slack is not None else None,
                params=params.to_model(),
            )
        )
        logger.info(
            "charikar t=%d n=%d %s tier: worst violation %.3g (%s)",
            params.t,
            params.n,
            tier.value,
            worst,
            family,
        )
    return reports


# --- Explicit l1 embedding ---


def _tensor_coordinates(signs: np.ndarray, power: int) -> np.ndarray:
    tensor = signs.astype(float)
    for _ in range(power - 1):
        tensor = (tensor[:, :, None] * signs[:, None, :]).reshape(signs.shape[0], -1)
    return tensor


def explicit_embedding(
    params: CharikarParams, materialize: bool | None = None
) -> ExplicitEmbeddingReport:
    """l1 image f(y_0) = 0, f(y_u) = (1 - beta^2)/q(1) ((2/n^t) u'^(2t), (2/sqrt n) c u').

    Ratios are l1 distance over squared Euclidean distance. Small instances
    are materialized coordinate by coordinate; otherwise the closed form of
    the l1 distance is used for each cube dot product.
    """
    n, t = params.n, params.t
    beta = params.beta_float
    c = float(params.q_linear_coeff)
    scale = (1 - beta * beta) / float(params.q_one)
    expected_norm = scale * (2 + 4 * t * float(params.lam) ** (2 * t - 1))
    if materialize is None:
        materialize = (
            params.vertices <= MATERIALIZE_MAX_POINTS and n ** (2 * t) <= MATERIALIZE_MAX_TENSOR
        )

    if materialize:
        bits = np.arange(params.vertices, dtype=np.int64)[:, None]
        signs = np.where((bits >> np.arange(n)) & 1, 1, -1).astype(np.int64)
        coords = scale * np.concatenate(
            [2.0 / n ** (2 * t) * _tensor_coordinates(signs, 2 * t), 2.0 * c / n * signs], axis=1
        )
        norms = np.abs(coords).sum(axis=1)
        l1 = np.stack([np.abs(coords - row).sum(axis=1) for row in coords])
        x = (signs @ signs.T) / n
        squared = 2.0 - 2.0 * cube_gram(x, params)
        off = ~np.eye(params.vertices, dtype=bool)
        cube_ratios = l1[off] / squared[off]
        norm = float(norms.max())
        apex_ratios = norms / (2 - 2 * beta)
        mode = "materialized"
    else:
        x = np.array([(n - 2 * k) / n for k in range(1, n + 1)])
        l1 = 2 * scale * ((1 - x ** (2 * t)) + c * (1 - x))
        squared = 2.0 - 2.0 * cube_gram(x, params)
        cube_ratios = l1 / squared
        norm = expected_norm
        apex_ratios = np.array([norm / (2 - 2 * beta)])
        mode = "closed-form"

    ratios = np.concatenate([cube_ratios, apex_ratios])
    low, high = float(ratios.min()), float(ratios.max())
    report = ExplicitEmbeddingReport(
        t=t,
        n=n,
        mode=mode,
        norm_l1=norm,
        expected_norm=expected_norm,
        min_ratio=low,
        max_ratio=high,
        distortion=high / low,
        isometric_on_cube=bool(np.all(np.abs(cube_ratios - 1) <= 1e-9)),
        points=params.vertices + 1,
    )
    logger.info("l1 embedding t=%d n=%d (%s): distortion %.6f", t, n, mode, report.distortion)
    return report


def gap_report(params: CharikarParams) -> GapReport:
    value = objective_value(params)
    gap = 2 / (1 + params.beta)
    return GapReport(
        params=params.to_model(),
        vertices=params.vertices,
        objective=format_number(value),
        objective_float=float(value),
        asymptotic_gap=format_number(gap),
        asymptotic_gap_float=float(gap),
        adjacency_note=ADJACENCY_NOTE,
    )
