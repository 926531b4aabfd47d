"""Pentagonal inequalities: metric censuses and the Charikar verification."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cache
from math import comb
from typing import TYPE_CHECKING

import numpy as np

from vc_gap_lab.charikar import CharikarParams, cube_gram, profile_grams, q_eval
from vc_gap_lab.cube import (
    SignProfile,
    canonical_profile,
    check_shard,
    profile_dots,
    profile_matrix,
)
from vc_gap_lab.errors import CubeError, EnumerationBudgetError
from vc_gap_lab.models import (
    ConvexityReport,
    PartitionModel,
    PentagonalReport,
    PentagonalWitnessModel,
)
from vc_gap_lab.sharding import merge_min

if TYPE_CHECKING:
    from collections.abc import Iterator

    from vc_gap_lab.metrics import FiniteMetric
    from vc_gap_lab.numerics import Number

logger = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 40
MAX_CHARIKAR_DIM = 24
CHUNK = 50_000
APEX_TUPLE_BUDGET = 5_000_000

# pairs of a 5-tuple, and the 10 ways to pick S (|S| = 2) in lexicographic order
PAIRS: tuple[tuple[int, int], ...] = tuple(itertools.combinations(range(5), 2))
SPLITS: tuple[tuple[int, int], ...] = PAIRS


@cache
def split_weights() -> np.ndarray:
    """``W[s, p]`` = +1 when pair p crosses split s, -1 when it lies inside S or T."""
    weights = np.empty((len(SPLITS), len(PAIRS)), dtype=np.int64)
    for s, group in enumerate(SPLITS):
        for p, (a, b) in enumerate(PAIRS):
            weights[s, p] = 1 if (a in group) != (b in group) else -1
    weights.setflags(write=False)
    return weights


def split_parts(
    split: int, labels: tuple[int, ...] = (0, 1, 2, 3, 4)
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """The (S, T) labels of split number ``split``."""
    group = SPLITS[split]
    s = tuple(labels[i] for i in group)
    t = tuple(labels[i] for i in range(5) if i not in group)
    return s, t


@dataclass(frozen=True)
class PentagonalWitness:
    """One 2/3 partition with its cross sum, within sum and slack."""

    S: tuple[int, ...]
    T: tuple[int, ...]
    lhs: float
    rhs: float
    slack: float
    profile: tuple[int, ...] | None = None
    xi: int | None = None
    coincident: bool | None = None

    def to_model(self) -> PentagonalWitnessModel:
        return PentagonalWitnessModel(
            partition=PartitionModel(S=list(self.S), T=list(self.T)),
            lhs=self.lhs,
            rhs=self.rhs,
            slack=self.slack,
            profile=list(self.profile) if self.profile is not None else None,
            xi=self.xi,
            coincident=self.coincident,
        )


def partition_sides(
    dist: np.ndarray, S: tuple[int, ...], T: tuple[int, ...]
) -> tuple[float, float]:
    """Cross sum and within sum of one partition."""
    lhs = sum(float(dist[i, j]) for i in S for j in T)
    rhs = sum(float(dist[i, j]) for i, j in itertools.combinations(S, 2))
    rhs += sum(float(dist[i, j]) for i, j in itertools.combinations(T, 2))
    return lhs, rhs


def pair_distances(dist: np.ndarray, tuples: np.ndarray) -> np.ndarray:
    """``(m, 10)`` distances of every 5-tuple, in :data:`PAIRS` order."""
    return np.stack([dist[tuples[:, a], tuples[:, b]] for a, b in PAIRS], axis=1)


def tuple_slacks(pair_dist: np.ndarray) -> np.ndarray:
    """``(m, 10)`` pentagonal slacks from pair distances, in :data:`SPLITS` order."""
    return pair_dist @ split_weights().T


# --- Generic census ---


@dataclass(frozen=True)
class PentagonalCensus:
    min_slack: float
    witness: PentagonalWitness | None
    enumerated: int
    sampled: int
    exhaustive: bool

    def to_report(self, tol: float = 1e-9) -> PentagonalReport:
        return PentagonalReport(
            feasible=self.min_slack >= -tol,
            min_slack=self.min_slack,
            witness=self.witness.to_model() if self.witness is not None else None,
            enumerated=self.enumerated,
            sampled=self.sampled,
            exhaustive=self.exhaustive,
        )


def _chunks(source: Iterator[tuple[int, ...]], size: int = CHUNK) -> Iterator[np.ndarray]:
    while True:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(source, size)), dtype=np.int64
        )
        if not flat.size:
            return
        yield flat.reshape(-1, 5)


def _sample_tuples(size: int, count: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Sorted 5-tuples of distinct indices, drawn uniformly in chunks."""
    remaining = count
    while remaining > 0:
        draw = rng.integers(0, size, size=(min(CHUNK, remaining) * 2, 5))
        draw.sort(axis=1)
        draw = draw[np.all(np.diff(draw, axis=1) > 0, axis=1)][:remaining]
        remaining -= len(draw)
        yield draw


def _apex_tuples(size: int) -> Iterator[tuple[int, ...]]:
    for rest in itertools.combinations(range(1, size), 4):
        yield (0, *rest)


def pentagonal_census(
    metric: FiniteMetric,
    *,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
    sample_size: int = 1_000_000,
    seed: int = 0,
    anchor_index_zero: bool = False,
) -> PentagonalCensus:
    """Smallest pentagonal slack over the 5-point partitions of ``metric``.

    Up to ``exhaustive_limit`` points every partition is checked. Larger metrics
    are sampled with a seeded generator; with ``anchor_index_zero`` every tuple
    containing point 0 is checked as well. Ties keep the first partition in
    enumeration order.
    """
    return pentagonal_census_array(
        metric.array,
        exhaustive_limit=exhaustive_limit,
        sample_size=sample_size,
        seed=seed,
        anchor_index_zero=anchor_index_zero,
    )


def pentagonal_census_array(
    dist: np.ndarray,
    *,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
    sample_size: int = 1_000_000,
    seed: int = 0,
    anchor_index_zero: bool = False,
) -> PentagonalCensus:
    """:func:`pentagonal_census` on a raw distance matrix."""
    size = dist.shape[0]
    if size < 5:
        return PentagonalCensus(0.0, None, 0, 0, True)
    best = np.inf
    best_tuple: np.ndarray | None = None
    best_split = 0
    enumerated = sampled = 0

    def scan(tuples: np.ndarray) -> None:
        nonlocal best, best_tuple, best_split
        slacks = tuple_slacks(pair_distances(dist, tuples))
        flat = int(np.argmin(slacks))
        row, split = divmod(flat, len(SPLITS))
        if slacks[row, split] < best:
            best = float(slacks[row, split])
            best_tuple = tuples[row].copy()
            best_split = split

    exhaustive = size <= exhaustive_limit
    if exhaustive:
        for chunk in _chunks(itertools.combinations(range(size), 5)):
            enumerated += len(chunk)
            scan(chunk)
    else:
        logger.warning(
            "pentagonal census over %d points is sampled (%d tuples, seed %d)",
            size,
            sample_size,
            seed,
        )
        if anchor_index_zero:
            if comb(size - 1, 4) > APEX_TUPLE_BUDGET:
                raise EnumerationBudgetError(
                    f"{comb(size - 1, 4)} tuples through point 0 exceed {APEX_TUPLE_BUDGET}"
                )
            for chunk in _chunks(_apex_tuples(size)):
                enumerated += len(chunk)
                scan(chunk)
        for chunk in _sample_tuples(size, sample_size, np.random.default_rng(seed)):
            sampled += len(chunk)
            scan(chunk)

    witness = None
    if best_tuple is not None:
        labels = tuple(int(i) for i in best_tuple)
        S, T = split_parts(best_split, labels)
        lhs, rhs = partition_sides(dist, S, T)
        witness = PentagonalWitness(S, T, lhs, rhs, best)
    logger.info(
        "pentagonal census: %d points, %d partitions, min slack %.6g",
        size,
        (enumerated + sampled) * len(SPLITS),
        best,
    )
    return PentagonalCensus(
        min_slack=best if best_tuple is not None else 0.0,
        witness=witness,
        enumerated=enumerated * len(SPLITS),
        sampled=sampled * len(SPLITS),
        exhaustive=exhaustive,
    )


# --- The E function and block configurations ---


_E_PLUS = ((0, 1), (0, 2), (1, 2))
_E_MINUS = ((0, 3), (1, 3), (2, 3))


def e_values(counts: np.ndarray, params: CharikarParams) -> np.ndarray:
    """E for every 4-profile row of ``counts``."""
    x = profile_dots(counts, 4) / params.n
    q = q_eval(x, params.t)
    plus = sum(q[:, a, b] for a, b in _E_PLUS)
    minus = sum(q[:, a, b] for a, b in _E_MINUS)
    return plus - minus


def E_function(profile: SignProfile, params: CharikarParams, exact: bool = False) -> Number:
    """q(x12) + q(x13) + q(x23) - q(x14) - q(x24) - q(x34) for the tuple (u1, u2, u3, u4)."""
    if profile.k != 4:
        raise CubeError("E is defined on 4-point profiles")
    if profile.n != params.n:
        raise CubeError(f"profile dimension {profile.n} does not match n = {params.n}")
    if exact:
        def q(a: int, b: int) -> Fraction:
            return q_eval(Fraction(profile.dot(a, b), params.n), params.t)

        return sum((q(a, b) for a, b in _E_PLUS), Fraction(0)) - sum(
            (q(a, b) for a, b in _E_MINUS), Fraction(0)
        )
    return float(e_values(np.array([profile.counts], dtype=np.int64), params)[0])


def affine_form(e: Number, params: CharikarParams) -> Number:
    """(1 - beta^2)/q(1) * E + 2(1 - beta): half the slack of ({y4, y0}, {y1, y2, y3})."""
    if isinstance(e, Fraction):
        beta = params.beta
        return (1 - beta * beta) * e / params.q_one + 2 * (1 - beta)
    beta_f = params.beta_float
    return (1 - beta_f * beta_f) * e / float(params.q_one) + 2 * (1 - beta_f)


def pentagonal_slack_from_e(e: Number, params: CharikarParams) -> Number:
    return 2 * affine_form(e, params)


def critical_e(params: CharikarParams) -> Fraction:
    """The value of E at which the apex-pair slack vanishes: -2 q(1) / (1 + beta)."""
    return -2 * params.q_one / (1 + params.beta)


# block index -> (pattern when u4 is -1, pattern when u4 is +1); patterns relative to u1
_BLOCK_PATTERNS = ((0, 4), (7, 3), (1, 5), (2, 6))


def block_configuration(
    p0: int, p1: int, p2: int, p3: int, u4_blocks: tuple[int, int, int, int]
) -> SignProfile:
    """Profile of (u1, u2, u3, u4) with blocks P0..P3 and u4 pure on each block.

    On P0 all of u1, u2, u3 are -1; on P_i only u_i is +1. ``u4_blocks``
    gives the sign of u4 on each block.
    """
    sizes = (p0, p1, p2, p3)
    if any(s < 0 for s in sizes):
        raise CubeError("block sizes must be nonnegative")
    if any(sign not in (-1, 1) for sign in u4_blocks):
        raise CubeError("u4 block signs must be +1 or -1")
    counts = [0] * 8
    for size, sign, (minus, plus) in zip(sizes, u4_blocks, _BLOCK_PATTERNS, strict=True):
        counts[plus if sign > 0 else minus] += size
    return SignProfile(4, tuple(counts))


def xi_of(profile: SignProfile) -> int | None:
    """Number of blocks P1..P3 on which u4 is +1, or None when u4 is not pure with -1 on P0."""
    if profile.k != 4:
        raise CubeError("xi is defined on 4-point profiles")
    c = profile.counts
    if c[4]:
        return None
    xi = 0
    for minus, plus in _BLOCK_PATTERNS[1:]:
        if c[minus] and c[plus]:
            return None
        xi += bool(c[plus])
    return xi


def _reordered(profile: SignProfile, order: tuple[int, ...]) -> SignProfile:
    points = profile.realize()
    return canonical_profile([points[i] for i in order])


# --- Charikar verification ---


def _charikar_pair_distances(dots: np.ndarray, params: CharikarParams) -> np.ndarray:
    """Pair distances of (apex, u1..u4) for every profile; apex is index 0."""
    gram = profile_grams(dots, params)
    return np.stack([2.0 - 2.0 * gram[:, a, b] for a, b in PAIRS], axis=1)


_APEX_PAIR_SPLITS = tuple(s for s, group in enumerate(SPLITS) if 0 in group)
_APEX_TRIPLE_SPLITS = tuple(s for s, group in enumerate(SPLITS) if 0 not in group)


def _min_with_index(
    values: np.ndarray, columns: tuple[int, ...]
) -> tuple[float, int, int] | None:
    if not values.size:
        return None
    sub = values[:, columns]
    flat = int(np.argmin(sub))
    row, col = divmod(flat, len(columns))
    return float(sub[row, col]), row, columns[col]


def verify_pentagonal_charikar(
    params: CharikarParams,
    tol: float = 1e-9,
    *,
    sample_size: int = 1_000_000,
    seed: int = 0,
    shard_index: int = 0,
    shard_count: int = 1,
) -> PentagonalReport:
    """Pentagonal slack of the Charikar points with the apex, by 4-point profiles.

    Every split of (y0, y_u1..y_u4) is evaluated for every profile; profiles
    with coincident cube points are kept and flagged. Pure 5-tuples of cube
    points are sampled on shard 0 only.

    ``apex_triple_min`` covers pairwise distinct cube points only. There the
    apex terms cancel and the slack is |y_a + y_b - y_c - y_d|^2 > 0, so it
    stays above the global minimum.
    """
    check_shard(shard_index, shard_count)
    if params.n > MAX_CHARIKAR_DIM:
        raise EnumerationBudgetError(
            f"4-point profiles are enumerated for n <= {MAX_CHARIKAR_DIM}, got {params.n}"
        )
    counts = profile_matrix(params.n, 4, shard_index=shard_index, shard_count=shard_count)
    dots = profile_dots(counts, 4)
    slacks = tuple_slacks(_charikar_pair_distances(dots, params))
    upper = np.triu_indices(4, 1)
    coincident = np.any(dots[:, upper[0], upper[1]] == params.n, axis=1)

    apex_pair = _min_with_index(slacks, _APEX_PAIR_SPLITS)
    apex_triple = _min_with_index(slacks[~coincident], _APEX_TRIPLE_SPLITS)
    all_splits = tuple(range(len(SPLITS)))
    coincident_min = _min_with_index(slacks[coincident], all_splits)
    distinct_min = _min_with_index(slacks[~coincident], all_splits)

    best = _min_with_index(slacks, all_splits)
    witness: PentagonalWitness | None = None
    min_slack = 0.0
    if best is not None:
        min_slack, row, split = best
        witness = _profile_witness(
            counts[row], split, float(slacks[row, split]), params, bool(coincident[row])
        )

    sampled = 0
    sampled_min: float | None = None
    if shard_index == 0 and sample_size > 0:
        sampled_min, sampled, sample_witness = _sample_cube_tuples(params, sample_size, seed)
        if sample_witness is not None and sampled_min < min_slack:
            min_slack, witness = sampled_min, sample_witness

    if apex_triple is not None and apex_triple[0] <= min_slack + tol:
        logger.warning(
            "apex-in-triple split reaches the minimum slack %.3g at t=%d n=%d",
            apex_triple[0],
            params.t,
            params.n,
        )

    logger.info(
        "pentagonal verification t=%d n=%d: %d profiles, %d sampled tuples, min slack %.3g",
        params.t,
        params.n,
        len(counts),
        sampled,
        min_slack,
    )
    return PentagonalReport(
        feasible=min_slack >= -tol,
        min_slack=min_slack,
        witness=witness.to_model() if witness is not None else None,
        enumerated=len(counts) * len(SPLITS),
        sampled=sampled * len(SPLITS),
        exhaustive=True,
        apex_pair_min=apex_pair[0] if apex_pair else None,
        apex_triple_min=apex_triple[0] if apex_triple else None,
        sampled_min=sampled_min,
        coincident_min=coincident_min[0] if coincident_min else None,
        distinct_min=distinct_min[0] if distinct_min else None,
        params=params.to_model(),
    )


def _profile_witness(
    counts: np.ndarray, split: int, slack: float, params: CharikarParams, coincident: bool
) -> PentagonalWitness:
    profile = SignProfile(4, tuple(int(c) for c in counts))
    S, T = split_parts(split)
    dots = profile_dots(np.array([profile.counts], dtype=np.int64), 4)
    dist = np.zeros((5, 5))
    pair = _charikar_pair_distances(dots, params)[0]
    for value, (a, b) in zip(pair, PAIRS, strict=True):
        dist[a, b] = dist[b, a] = value
    lhs, rhs = partition_sides(dist, S, T)
    xi = None
    if 0 in S:
        partner = next(i for i in S if i) - 1
        others = tuple(i for i in range(4) if i != partner)
        xi = xi_of(_reordered(profile, (*others, partner)))
    return PentagonalWitness(S, T, lhs, rhs, slack, profile.counts, xi, coincident)


def _sample_cube_tuples(
    params: CharikarParams, sample_size: int, seed: int
) -> tuple[float, int, PentagonalWitness | None]:
    """Pentagonal slack of random 5-tuples of cube points (no apex)."""
    n = params.n
    rng = np.random.default_rng(seed)
    best = np.inf
    witness: PentagonalWitness | None = None
    done = 0
    while done < sample_size:
        m = min(CHUNK, sample_size - done)
        points = rng.integers(0, 1 << n, size=(m, 5), dtype=np.int64)
        pair_dist = np.empty((m, len(PAIRS)))
        for p, (a, b) in enumerate(PAIRS):
            x = (n - 2 * np.bitwise_count(points[:, a] ^ points[:, b]).astype(np.int64)) / n
            pair_dist[:, p] = 2.0 - 2.0 * cube_gram(x, params)
        slacks = tuple_slacks(pair_dist)
        flat = int(np.argmin(slacks))
        row, split = divmod(flat, len(SPLITS))
        if slacks[row, split] < best:
            best = float(slacks[row, split])
            labels = tuple(int(v) for v in points[row])
            S, T = split_parts(split, labels)
            dist = np.zeros((5, 5))
            for value, (a, b) in zip(pair_dist[row], PAIRS, strict=True):
                dist[a, b] = dist[b, a] = value
            lhs, rhs = partition_sides(dist, *split_parts(split))
            witness = PentagonalWitness(S, T, lhs, rhs, best, coincident=len(set(labels)) < 5)
        done += m
    return (best if witness is not None else 0.0), done, witness


def merge_pentagonal(reports: list[PentagonalReport]) -> PentagonalReport:
    """Min-reduce shard reports; ties keep the witness with the smallest profile."""

    def key(r: PentagonalReport) -> tuple[float, bool, tuple[int, ...]]:
        w = r.witness
        profile = tuple(w.profile) if w is not None and w.profile is not None else ()
        return (r.min_slack, w is None or w.profile is None, profile)

    def lowest(values: list[float | None]) -> float | None:
        present = [v for v in values if v is not None]
        return min(present) if present else None

    best = merge_min(reports, key=key)
    return best.model_copy(
        update={
            "feasible": all(r.feasible for r in reports),
            "enumerated": sum(r.enumerated for r in reports),
            "sampled": sum(r.sampled for r in reports),
            "apex_pair_min": lowest([r.apex_pair_min for r in reports]),
            "apex_triple_min": lowest([r.apex_triple_min for r in reports]),
            "sampled_min": lowest([r.sampled_min for r in reports]),
            "coincident_min": lowest([r.coincident_min for r in reports]),
            "distinct_min": lowest([r.distinct_min for r in reports]),
        }
    )


# --- Convexity reduction ---


def _block_counts(sizes: np.ndarray, plus: np.ndarray) -> np.ndarray:
    """Profile rows for u4 with ``plus[:, i]`` coordinates +1 in block i."""
    counts = np.zeros((sizes.shape[0], 8), dtype=np.int64)
    for block, (minus_pattern, plus_pattern) in enumerate(_BLOCK_PATTERNS):
        counts[:, plus_pattern] += plus[:, block]
        counts[:, minus_pattern] += sizes[:, block] - plus[:, block]
    return counts


def convexity_reduction_check(
    params: CharikarParams, trials: int = 10_000, seed: int = 0
) -> ConvexityReport:
    """Check that a u4 mixed on one block never gives a smaller E than both pure fillings.

    For random block sizes and a random u4 that is mixed on one block, checks
    E(mixed) > min(E(pure+), E(pure-)) - 1e-12, where pure+ sets the whole mixed
    block to +1 and pure- sets it to -1. The one-coordinate moves behind the
    reduction are checked the same way and reported as ``worst_step_margin``.
    """
    n = params.n
    if n < 2:
        raise CubeError("the convexity check needs n >= 2")
    rng = np.random.default_rng(seed)
    cuts = np.sort(rng.integers(0, n + 1, size=(trials, 3)), axis=1)
    edges = np.concatenate(
        [np.zeros((trials, 1), dtype=np.int64), cuts, np.full((trials, 1), n)], axis=1
    )
    sizes = np.diff(edges, axis=1)
    # the mixed block must hold at least two coordinates
    weights = np.where(sizes >= 2, rng.random((trials, 4)), -1.0)
    keep = weights.max(axis=1) >= 0
    sizes = sizes[keep]
    mixed = np.argmax(weights[keep], axis=1)
    rows = np.arange(sizes.shape[0])
    plus = (rng.random(sizes.shape) < 0.5) * sizes
    plus[rows, mixed] = rng.integers(1, sizes[rows, mixed])

    base = e_values(_block_counts(sizes, plus), params)

    def margin_against(up_count: np.ndarray, down_count: np.ndarray) -> float:
        up = plus.copy()
        up[rows, mixed] = up_count
        down = plus.copy()
        down[rows, mixed] = down_count
        margin = base - np.minimum(
            e_values(_block_counts(sizes, up), params),
            e_values(_block_counts(sizes, down), params),
        )
        return float(margin.min()) if margin.size else 0.0

    current = plus[rows, mixed]
    worst = margin_against(sizes[rows, mixed], np.zeros_like(current))
    worst_step = margin_against(current + 1, current - 1)
    logger.info(
        "convexity check: %d trials, worst margin %.3g, worst step margin %.3g",
        len(rows),
        worst,
        worst_step,
    )
    return ConvexityReport(
        passed=worst > -1e-12 and worst_step > -1e-12,
        trials=int(len(rows)),
        worst_margin=worst,
        worst_step_margin=worst_step,
    )
