"""Small graphs as adjacency bitsets, Hamming gap instances and exact vertex cover."""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import TYPE_CHECKING

import numpy as np
from pydantic import ValidationError

from vc_gap_lab.cube import CubePoint
from vc_gap_lab.errors import GraphError
from vc_gap_lab.models import GraphFile

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Sequence
    from pathlib import Path

    from vc_gap_lab.metrics import FiniteMetric

logger = logging.getLogger(__name__)

MAX_ORDER = 64
MAX_VC_ORDER = 32
MAX_HAMMING_DIM = 16

ADJACENCY_NOTE = (
    "Hamming instances join u and v when u.v = -lambda*n, i.e. at Hamming distance "
    "n - n/(4t) = (1-gamma)n; the construction text writes the distance as gamma*n, "
    "which would not put the minimum of q on the edges."
)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..order-1``."""

    order: int
    adjacency: tuple[int, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.order <= MAX_ORDER:
            raise GraphError(f"graph order must be in [0, {MAX_ORDER}], got {self.order}")
        if len(self.adjacency) != self.order:
            raise GraphError("adjacency must have one bitset per vertex")
        if self.labels is not None and len(self.labels) != self.order:
            raise GraphError("labels must have one entry per vertex")
        for v, bits in enumerate(self.adjacency):
            if bits >> self.order:
                raise GraphError(f"vertex {v} has a neighbour outside the graph")
            if (bits >> v) & 1:
                raise GraphError(f"self-loop at vertex {v}")
            for w in _iter_bits(bits):
                if not (self.adjacency[w] >> v) & 1:
                    raise GraphError(f"adjacency is not symmetric between {v} and {w}")

    @classmethod
    def from_edges(
        cls,
        order: int,
        edges: Iterable[tuple[int, int]],
        labels: Sequence[str] | None = None,
    ) -> Graph:
        """Build a graph, rejecting duplicate edges, self-loops and bad endpoints."""
        if not 0 <= order <= MAX_ORDER:
            raise GraphError(f"graph order must be in [0, {MAX_ORDER}], got {order}")
        adjacency = [0] * order
        for i, j in edges:
            if not (0 <= i < order and 0 <= j < order):
                raise GraphError(f"edge ({i}, {j}) has an endpoint outside 0..{order - 1}")
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            if (adjacency[i] >> j) & 1:
                raise GraphError(f"duplicate edge ({min(i, j)}, {max(i, j)})")
            adjacency[i] |= 1 << j
            adjacency[j] |= 1 << i
        return cls(order, tuple(adjacency), tuple(labels) if labels is not None else None)

    @property
    def full_mask(self) -> int:
        return (1 << self.order) - 1

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges ``(i, j)`` with ``i < j`` in lexicographic order."""
        for i, bits in enumerate(self.adjacency):
            for j in _iter_bits(bits >> (i + 1)):
                yield i, i + 1 + j

    @property
    def edge_count(self) -> int:
        return sum(bits.bit_count() for bits in self.adjacency) // 2

    def degree(self, v: int) -> int:
        return self.adjacency[v].bit_count()

    def neighbors(self, v: int) -> list[int]:
        return list(_iter_bits(self.adjacency[v]))

    def has_edge(self, i: int, j: int) -> bool:
        return bool((self.adjacency[i] >> j) & 1)

    def is_independent(self, mask: int) -> bool:
        return all(not (self.adjacency[v] & mask) for v in _iter_bits(mask))

    def is_cover(self, mask: int) -> bool:
        return self.is_independent(self.full_mask & ~mask)

    def is_connected(self) -> bool:
        if self.order == 0:
            return True
        seen = frontier = 1
        while frontier:
            reach = 0
            for v in _iter_bits(frontier):
                reach |= self.adjacency[v]
            frontier = reach & ~seen
            seen |= frontier
        return seen == self.full_mask

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)


def _iter_bits(bits: int) -> Iterator[int]:
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


# --- Constructors ---


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("a cycle needs at least 3 vertices")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, itertools.combinations(range(n), 2))


def complete_bipartite(a: int, b: int) -> Graph:
    """K_{a,b} with the small side on vertices ``0..a-1``."""
    return Graph.from_edges(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def empty_graph(n: int) -> Graph:
    return Graph.from_edges(n, [])


def random_graph(n: int, p: float, seed: int = 0) -> Graph:
    """Seeded G(n, p)."""
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p
    return Graph.from_edges(n, [pair for pair, k in zip(pairs, keep, strict=True) if k])


# --- Files ---


def load_graph(path: Path) -> Graph:
    """Read the ``{"n": ..., "edges": [[i, j], ...]}`` graph format."""
    try:
        data = GraphFile.model_validate_json(path.read_text())
    except OSError as e:
        raise GraphError(f"cannot read graph file {path}: {e}") from e
    except ValidationError as e:
        raise GraphError(f"invalid graph file {path}: {e.errors()[0]['msg']}") from e
    return Graph.from_edges(data.n, data.edges, data.labels)


def dump_graph(graph: Graph) -> str:
    model = GraphFile(
        n=graph.order,
        edges=list(graph.edges()),
        labels=list(graph.labels) if graph.labels is not None else None,
    )
    return json.dumps(model.model_dump(exclude_none=True), indent=2) + "\n"


# --- Hamming instances ---


@dataclass(frozen=True)
class HammingInstance:
    """Cube graph joining points whose dot product is ``edge_dot = -lambda*n``."""

    n: int
    t: int
    edge_dot: int
    edge_distance: int
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def order(self) -> int:
        return 1 << self.n

    @property
    def degree(self) -> int:
        return comb(self.n, self.edge_distance)

    def neighbor_masks(self) -> list[int]:
        """XOR masks taking a vertex to each of its neighbours."""
        if self.n > MAX_HAMMING_DIM:
            raise GraphError(f"neighbour lists are materialized only for n <= {MAX_HAMMING_DIM}")
        masks = []
        for coords in itertools.combinations(range(self.n), self.edge_distance):
            mask = 0
            for c in coords:
                mask |= 1 << c
            masks.append(mask)
        return masks

    def neighbors(self, u: CubePoint) -> Iterator[CubePoint]:
        for mask in self.neighbor_masks():
            yield CubePoint(u.bits ^ mask, self.n)

    def is_edge(self, u: CubePoint, v: CubePoint) -> bool:
        return u.dot(v) == self.edge_dot

    def to_graph(self) -> Graph:
        """The instance as a :class:`Graph` (only when 2**n fits the order cap)."""
        if self.order > MAX_ORDER:
            raise GraphError(f"2^{self.n} vertices exceed the graph order cap {MAX_ORDER}")
        masks = self.neighbor_masks()
        edges = {(min(u, u ^ m), max(u, u ^ m)) for u in range(self.order) for m in masks}
        return Graph.from_edges(self.order, sorted(edges))


def hamming_graph(n: int, t: int) -> HammingInstance:
    """Charikar's Hamming instance for parameters ``(n, t)``; requires ``4t | n``."""
    if t < 1:
        raise GraphError(f"t must be positive, got {t}")
    if n < 1 or n % (4 * t):
        raise GraphError(f"4t = {4 * t} must divide n = {n}")
    lam = 1 - Fraction(1, 2 * t)
    edge_dot = -lam * n
    if edge_dot.denominator != 1:
        raise GraphError(f"-lambda*n = {edge_dot} is not an integer")
    distance = (n - int(edge_dot)) // 2
    warnings: list[str] = []
    if distance % 2:
        message = f"edge distance d = {distance} is odd; the construction asks for an even d"
        logger.warning(message)
        warnings.append(message)
    return HammingInstance(n, t, int(edge_dot), distance, tuple(warnings))


# --- Vertex cover ---


def max_independent_set(graph: Graph) -> int:
    """Bitmask of a maximum independent set (branch and bound on bitsets)."""
    if graph.order > MAX_VC_ORDER:
        raise GraphError(f"exact vertex cover supports order <= {MAX_VC_ORDER}")
    adjacency = graph.adjacency
    best_mask = 0
    best_size = 0

    def _local_degree(v: int, candidates: int) -> int:
        return (adjacency[v] & candidates).bit_count()

    def search(candidates: int, chosen: int, size: int) -> None:
        nonlocal best_mask, best_size
        # degree <= 1 vertices can always be taken
        while candidates:
            forced = next(
                (v for v in _iter_bits(candidates) if _local_degree(v, candidates) <= 1), None
            )
            if forced is None:
                break
            chosen |= 1 << forced
            size += 1
            candidates &= ~(adjacency[forced] | (1 << forced))
        if size + candidates.bit_count() <= best_size:
            return
        if not candidates:
            best_mask, best_size = chosen, size
            return
        pivot = max(_iter_bits(candidates), key=lambda v: _local_degree(v, candidates))
        search(candidates & ~(adjacency[pivot] | (1 << pivot)), chosen | (1 << pivot), size + 1)
        search(candidates & ~(1 << pivot), chosen, size)

    search(graph.full_mask, 0, 0)
    return best_mask


def min_vertex_cover(graph: Graph) -> tuple[int, int]:
    """Size and bitmask of a minimum vertex cover (complement of a maximum independent set)."""
    independent = max_independent_set(graph)
    cover = graph.full_mask & ~independent
    logger.debug("vertex cover of size %d on %d vertices", cover.bit_count(), graph.order)
    return cover.bit_count(), cover


def graph_metric(graph: Graph) -> FiniteMetric:
    """All-pairs unit-length shortest path metric; the graph must be connected."""
    from vc_gap_lab.metrics import FiniteMetric

    if not graph.is_connected():
        raise GraphError("graph metric needs a connected graph")
    rows: list[list[Fraction]] = []
    for source in range(graph.order):
        dist = [Fraction(0)] * graph.order
        seen = frontier = 1 << source
        level = 0
        while frontier:
            level += 1
            reach = 0
            for v in _iter_bits(frontier):
                reach |= graph.adjacency[v]
            frontier = reach & ~seen
            seen |= frontier
            for v in _iter_bits(frontier):
                dist[v] = Fraction(level)
        rows.append(dist)
    labels = [graph.label(v) for v in range(graph.order)]
    return FiniteMetric.from_matrix(rows, labels)
