"""Hypercube primitives: points, subsets, boundaries and sign profiles.

A cube vertex is an integer bit pattern: bit ``l`` set means coordinate ``l``
equals +1. A subset of the cube is an integer of ``2**n`` bits where bit ``u``
is set when vertex ``u`` belongs to the set.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cache
from math import comb
from typing import TYPE_CHECKING

import numpy as np

from vc_gap_lab.errors import CubeError, EnumerationBudgetError
from vc_gap_lab.sharding import ShardSpec, shard_slice

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

logger = logging.getLogger(__name__)

MAX_DIM = 32
MAX_SET_DIM = 16
MAX_ALL_SUBSETS_DIM = 4
MAX_SYMMETRIC_SUBSETS_DIM = 5


def _full_mask(dim: int) -> int:
    return (1 << dim) - 1


@dataclass(frozen=True, slots=True)
class CubePoint:
    """A vertex of {-1, 1}^dim."""

    bits: int
    dim: int

    def __post_init__(self) -> None:
        if not 1 <= self.dim <= MAX_DIM:
            raise CubeError(f"dimension must be in [1, {MAX_DIM}], got {self.dim}")
        if not 0 <= self.bits < (1 << self.dim):
            raise CubeError(f"bit pattern {self.bits:#x} does not fit dimension {self.dim}")

    @classmethod
    def from_signs(cls, signs: Sequence[int]) -> CubePoint:
        """Build a point from a +1/-1 sequence (index = coordinate)."""
        bits = 0
        for coord, sign in enumerate(signs):
            if sign not in (1, -1):
                raise CubeError(f"coordinate {coord} is {sign}, expected +1 or -1")
            if sign == 1:
                bits |= 1 << coord
        return cls(bits, len(signs))

    def signs(self) -> tuple[int, ...]:
        return tuple(1 if (self.bits >> coord) & 1 else -1 for coord in range(self.dim))

    def antipode(self) -> CubePoint:
        return CubePoint(self.bits ^ _full_mask(self.dim), self.dim)

    def dot(self, other: CubePoint) -> int:
        return dot(self, other)


def dot(u: CubePoint, v: CubePoint) -> int:
    """Inner product of two cube points: n - 2 * Hamming distance."""
    if u.dim != v.dim:
        raise CubeError(f"dimension mismatch: {u.dim} vs {v.dim}")
    return u.dim - 2 * (u.bits ^ v.bits).bit_count()


# --- Subsets ---


@cache
def _coordinate_mask(dim: int, coord: int) -> int:
    """Set of vertices whose coordinate ``coord`` is -1."""
    mask = 0
    for u in range(1 << dim):
        if not (u >> coord) & 1:
            mask |= 1 << u
    return mask


def _flip_coordinate(members: int, dim: int, coord: int) -> int:
    """Image of a vertex set under u -> u with coordinate ``coord`` negated."""
    step = 1 << coord
    low = _coordinate_mask(dim, coord)
    return ((members & low) << step) | ((members >> step) & low)


def _antipodal_image(members: int, dim: int) -> int:
    for coord in range(dim):
        members = _flip_coordinate(members, dim, coord)
    return members


@dataclass(frozen=True, slots=True)
class VertexSet:
    """A subset of {-1, 1}^dim stored as a 2**dim bit membership mask."""

    dim: int
    members: int

    def __post_init__(self) -> None:
        if not 1 <= self.dim <= MAX_SET_DIM:
            raise CubeError(f"vertex sets support dimensions 1..{MAX_SET_DIM}, got {self.dim}")
        if not 0 <= self.members < (1 << (1 << self.dim)):
            raise CubeError("membership mask does not fit the cube")

    @classmethod
    def from_points(cls, dim: int, points: Sequence[CubePoint | int]) -> VertexSet:
        members = 0
        for point in points:
            bits = point.bits if isinstance(point, CubePoint) else point
            if isinstance(point, CubePoint) and point.dim != dim:
                raise CubeError(f"point of dimension {point.dim} in a {dim}-cube set")
            members |= 1 << bits
        return cls(dim, members)

    @classmethod
    def full(cls, dim: int) -> VertexSet:
        return cls(dim, (1 << (1 << dim)) - 1)

    @property
    def size(self) -> int:
        return self.members.bit_count()

    def __contains__(self, point: CubePoint | int) -> bool:
        bits = point.bits if isinstance(point, CubePoint) else point
        return bool((self.members >> bits) & 1)

    def __len__(self) -> int:
        return self.size

    def complement(self) -> VertexSet:
        return VertexSet(self.dim, self.members ^ ((1 << (1 << self.dim)) - 1))

    def antipodal_image(self) -> VertexSet:
        return VertexSet(self.dim, _antipodal_image(self.members, self.dim))

    def is_symmetric(self) -> bool:
        return self.antipodal_image().members == self.members

    def points(self) -> list[CubePoint]:
        return [CubePoint(u, self.dim) for u in range(1 << self.dim) if (self.members >> u) & 1]

    def hex(self) -> str:
        width = max(1, (1 << self.dim) // 4)
        return f"0x{self.members:0{width}x}"


def edge_boundary(s: VertexSet) -> int:
    """Number of cube edges with exactly one endpoint in ``s``."""
    total = 0
    for coord in range(s.dim):
        total += (s.members & ~_flip_coordinate(s.members, s.dim, coord)).bit_count()
    return total


def antipodal_count(s: VertexSet) -> int:
    """Number of vertices u in ``s`` whose antipode -u is also in ``s``."""
    return (s.members & _antipodal_image(s.members, s.dim)).bit_count()


def split_terms(s: VertexSet) -> tuple[int, int, int]:
    """Split on the top coordinate: boundaries of both halves and their difference.

    Returns ``(|E(S_+)|, |E(S_-)|, |S_+ xor S_-|)`` where the halves are
    projected onto the (n-1)-cube.
    """
    if s.dim < 2:
        raise CubeError("the split decomposition needs dimension at least 2")
    half = 1 << (s.dim - 1)
    lower = s.members & ((1 << half) - 1)
    upper = s.members >> half
    plus = VertexSet(s.dim - 1, upper)
    minus = VertexSet(s.dim - 1, lower)
    return edge_boundary(plus), edge_boundary(minus), (upper ^ lower).bit_count()


def split_identity_check(s: VertexSet) -> bool:
    """Check that the top-coordinate split reproduces the edge boundary."""
    return sum(split_terms(s)) == edge_boundary(s)


def enumerate_subsets(
    n: int,
    symmetric_only: bool = False,
    *,
    shard_index: int = 0,
    shard_count: int = 1,
) -> Iterator[VertexSet]:
    """Every subset of Q_n (n <= 4) or every antipodally closed one (n <= 5)."""
    check_shard(shard_index, shard_count)
    if symmetric_only:
        if not 1 <= n <= MAX_SYMMETRIC_SUBSETS_DIM:
            raise EnumerationBudgetError(
                f"symmetric subset census supports n <= {MAX_SYMMETRIC_SUBSETS_DIM}, got {n}"
            )
        half = 1 << (n - 1)
        for lower in range(shard_index, 1 << half, shard_count):
            yield VertexSet(n, lower | _antipodal_image(lower, n))
        return

    if not 1 <= n <= MAX_ALL_SUBSETS_DIM:
        raise EnumerationBudgetError(
            f"subset census supports n <= {MAX_ALL_SUBSETS_DIM}, got {n}"
        )
    for members in range(shard_index, 1 << (1 << n), shard_count):
        yield VertexSet(n, members)


def subset_count(n: int, symmetric_only: bool = False) -> int:
    return 1 << (1 << (n - 1)) if symmetric_only else 1 << (1 << n)


# --- Sign profiles ---


@dataclass(frozen=True, slots=True)
class SignProfile:
    """Coordinate counts per sign pattern of a k-tuple of cube points.

    Pattern ``p`` has bit ``j - 1`` set when point ``j`` differs from point 0
    on the coordinate. Every pairwise dot product of the tuple is a linear
    function of ``counts``.
    """

    k: int
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 2 <= self.k <= 4:
            raise CubeError(f"profile arity must be 2, 3 or 4, got {self.k}")
        if len(self.counts) != 1 << (self.k - 1):
            raise CubeError(f"arity {self.k} needs {1 << (self.k - 1)} counts")
        if any(c < 0 for c in self.counts):
            raise CubeError("profile counts must be nonnegative")

    @property
    def n(self) -> int:
        return sum(self.counts)

    def dot(self, a: int, b: int) -> int:
        """Dot product between points ``a`` and ``b`` of the tuple."""
        signs = pair_signs(self.k)
        return int(sum(c * s for c, s in zip(self.counts, signs[a, b], strict=True)))

    def dots(self) -> dict[tuple[int, int], int]:
        return {(a, b): self.dot(a, b) for a, b in itertools.combinations(range(self.k), 2)}

    def realize(self) -> tuple[CubePoint, ...]:
        """Concrete points with point 0 at the all-ones vertex, blocks in pattern order."""
        n = self.n
        if n < 1:
            raise CubeError("cannot realize a profile of dimension 0")
        bits = [_full_mask(n)] * self.k
        coord = 0
        for pattern, count in enumerate(self.counts):
            for _ in range(count):
                for j in range(1, self.k):
                    if (pattern >> (j - 1)) & 1:
                        bits[j] &= ~(1 << coord)
                coord += 1
        return tuple(CubePoint(b, n) for b in bits)


@cache
def pair_signs(k: int) -> np.ndarray:
    """Array ``S[a, b, p]`` = +1 when points a and b agree on pattern p, else -1."""
    parts = 1 << (k - 1)
    signs = np.ones((k, k, parts), dtype=np.int64)
    for a in range(k):
        for b in range(k):
            for p in range(parts):
                da = (p >> (a - 1)) & 1 if a else 0
                db = (p >> (b - 1)) & 1 if b else 0
                signs[a, b, p] = -1 if da != db else 1
    signs.setflags(write=False)
    return signs


def canonical_profile(points: Sequence[CubePoint], k: int | None = None) -> SignProfile:
    """Sign profile of a tuple; invariant under coordinate permutations and flips."""
    k = len(points) if k is None else k
    if not 2 <= k <= 4:
        raise CubeError(f"profile arity must be 2, 3 or 4, got {k}")
    if len(points) != k:
        raise CubeError(f"expected {k} points, got {len(points)}")
    dim = points[0].dim
    if any(p.dim != dim for p in points):
        raise CubeError("all points of a profile must share a dimension")

    full = _full_mask(dim)
    diffs = [(p.bits ^ points[0].bits) for p in points[1:]]
    counts = []
    for pattern in range(1 << (k - 1)):
        mask = full
        for j, diff in enumerate(diffs):
            mask &= diff if (pattern >> j) & 1 else ~diff
        counts.append((mask & full).bit_count())
    return SignProfile(k, tuple(counts))


def profile_count(n: int, k: int) -> int:
    parts = 1 << (k - 1)
    return comb(n + parts - 1, parts - 1)


def enumerate_profiles(
    n: int,
    k: int,
    *,
    shard_index: int = 0,
    shard_count: int = 1,
) -> Iterator[SignProfile]:
    """Every composition of n into 2**(k-1) parts, once each (stars and bars)."""
    if not 2 <= k <= 4:
        raise CubeError(f"profile arity must be 2, 3 or 4, got {k}")
    if n < 0:
        raise CubeError("dimension must be nonnegative")
    check_shard(shard_index, shard_count)
    parts = 1 << (k - 1)
    slots = n + parts - 1
    shard = ShardSpec(shard_index, shard_count)
    for bars in shard_slice(itertools.combinations(range(slots), parts - 1), shard):
        counts = []
        previous = -1
        for bar in bars:
            counts.append(bar - previous - 1)
            previous = bar
        counts.append(slots - previous - 1)
        yield SignProfile(k, tuple(counts))


def profile_matrix(n: int, k: int, *, shard_index: int = 0, shard_count: int = 1) -> np.ndarray:
    """All profiles of the shard as an ``(m, 2**(k-1))`` integer array."""
    rows = [
        p.counts
        for p in enumerate_profiles(n, k, shard_index=shard_index, shard_count=shard_count)
    ]
    parts = 1 << (k - 1)
    logger.debug("enumerated %d profiles for n=%d k=%d", len(rows), n, k)
    return np.array(rows, dtype=np.int64).reshape(len(rows), parts)


def profile_dots(counts: np.ndarray, k: int) -> np.ndarray:
    """Pairwise dot products ``D[m, a, b]`` for every profile row."""
    return np.einsum("mp,abp->mab", counts, pair_signs(k))


def check_shard(shard_index: int, shard_count: int) -> None:
    if shard_count < 1 or not 0 <= shard_index < shard_count:
        raise CubeError(f"invalid shard {shard_index}/{shard_count}")
