"""Gram-backed vector solutions and tiered feasibility audits of the vertex cover SDPs."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cache
from math import comb
from typing import TYPE_CHECKING

import numpy as np

from vc_gap_lab.errors import RelaxationError
from vc_gap_lab.lp import Relation
from vc_gap_lab.models import FeasibilityReport, Tier
from vc_gap_lab.numerics import PSD_RELATIVE_TOLERANCE, min_eigenvalue
from vc_gap_lab.sharding import merge_min

if TYPE_CHECKING:
    from collections.abc import Iterator

    from numpy.typing import ArrayLike

    from vc_gap_lab.graph import Graph

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9
GRAM_TOLERANCE = 1e-9

# sign patterns of the extended-set triangles; (+, +) is the plain triangle
SIGN_PATTERNS: tuple[tuple[int, int], ...] = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class VectorSolution:
    """Unit vectors v_0 (the apex) and v_1..v_N given by their Gram matrix.

    Index 0 is the apex; graph vertex ``i`` is index ``i + 1``.
    """

    gram: np.ndarray
    realization: np.ndarray | None = None

    def __post_init__(self) -> None:
        gram = np.asarray(self.gram, dtype=float)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1] or gram.shape[0] < 1:
            raise RelaxationError(f"gram must be a nonempty square matrix, got shape {gram.shape}")
        if not np.allclose(gram, gram.T, rtol=0, atol=GRAM_TOLERANCE):
            raise RelaxationError("gram matrix is not symmetric")
        worst = float(np.max(np.abs(np.diag(gram) - 1)))
        if worst > GRAM_TOLERANCE:
            raise RelaxationError(f"vectors must have unit norm; worst diagonal error {worst:.3g}")
        if self.realization is not None:
            coords = np.asarray(self.realization, dtype=float)
            if coords.ndim != 2 or coords.shape[0] != gram.shape[0]:
                raise RelaxationError("realization needs one row per vector")
            if not np.allclose(coords @ coords.T, gram, rtol=0, atol=GRAM_TOLERANCE):
                raise RelaxationError("realization does not reproduce the gram matrix")
            object.__setattr__(self, "realization", coords)
        object.__setattr__(self, "gram", (gram + gram.T) / 2)

    @classmethod
    def from_realization(cls, coords: ArrayLike) -> VectorSolution:
        array = np.asarray(coords, dtype=float)
        if array.ndim != 2:
            raise RelaxationError("coordinates must be a matrix")
        return cls(array @ array.T, array)

    @classmethod
    def integral(cls, order: int, cover_mask: int) -> VectorSolution:
        """v_i = v_0 on the cover and -v_0 off it."""
        signs = [1.0] + [1.0 if (cover_mask >> v) & 1 else -1.0 for v in range(order)]
        return cls.from_realization(np.array(signs)[:, None])

    @property
    def size(self) -> int:
        return int(self.gram.shape[0])

    def squared_distances(self) -> np.ndarray:
        diag = np.diag(self.gram)
        return diag[:, None] + diag[None, :] - 2 * self.gram


def objective_forms(sol: VectorSolution) -> tuple[float, float]:
    """The VC form sum (1 + v0.vi)/2 and the distance form sum 1 - |v0 - vi|^2 / 4."""
    g = sol.gram
    vc_form = float(np.sum((1 + g[0, 1:]) / 2))
    dist = g[0, 0] + np.diag(g)[1:] - 2 * g[0, 1:]
    distance_form = float(np.sum(1 - dist / 4))
    return vc_form, distance_form


def objective(sol: VectorSolution) -> float:
    return objective_forms(sol)[0]


# --- Constraint families ---


@cache
def triangle_families(size: int, signed: bool = False) -> np.ndarray:
    """Rows ``(a, b, c, s_a, s_b)`` with a < b and middle point c, in lexicographic order.

    The inequality is ``(s_a v_a - v_c) . (s_b v_b - v_c) >= 0``.
    """
    patterns = SIGN_PATTERNS if signed else SIGN_PATTERNS[:1]
    rows = [
        (a, b, c, sa, sb)
        for a, b in itertools.combinations(range(size), 2)
        for c in range(size)
        if c not in (a, b)
        for sa, sb in patterns
    ]
    families = np.array(rows, dtype=np.int64).reshape(len(rows), 5)
    families.setflags(write=False)
    return families


def triangle_values(gram: np.ndarray, families: np.ndarray) -> np.ndarray:
    """Slack of every family row; ``gram`` may carry leading batch axes."""
    a, b, c, sa, sb = families.T
    return (
        sa * sb * gram[..., a, b]
        - sa * gram[..., a, c]
        - sb * gram[..., b, c]
        + gram[..., c, c]
    )


@dataclass(frozen=True)
class Constraint:
    """A linear constraint on the Gram matrix X.

    ``terms`` holds ``(i, j, c)`` with ``i <= j`` meaning ``c * X_ij`` in the
    functional (an off-diagonal term stands for both symmetric entries).
    """

    family: str
    indices: tuple[int, ...]
    terms: tuple[tuple[int, int, float], ...]
    relation: Relation
    rhs: float
    signs: tuple[int, ...] | None = None


def _collect(terms: dict[tuple[int, int], float], i: int, j: int, c: float) -> None:
    key = (min(i, j), max(i, j))
    terms[key] = terms.get(key, 0.0) + c


def _finish(terms: dict[tuple[int, int], float]) -> tuple[tuple[int, int, float], ...]:
    return tuple((i, j, c) for (i, j), c in sorted(terms.items()) if c != 0)


def tier_families(tier: Tier) -> tuple[str, ...]:
    """Constraint families checked for ``tier``, in report order."""
    match tier:
        case Tier.STANDARD:
            return ("unit", "edge")
        case Tier.TRIANGLE:
            return ("unit", "edge", "triangle")
        case Tier.KARAKOSTAS:
            return ("unit", "edge", "extended-triangle")
        case Tier.PENTAGONAL:
            return ("unit", "edge", "triangle", "pentagonal")


def constraint_count(graph: Graph, tier: Tier) -> int:
    size = graph.order + 1
    counts = {
        "unit": size,
        "edge": graph.edge_count,
        "triangle": 3 * comb(size, 3),
        "extended-triangle": 12 * comb(size, 3),
        "pentagonal": 10 * comb(size, 5),
    }
    return sum(counts[f] for f in tier_families(tier))


def iter_constraints(graph: Graph, tier: Tier) -> Iterator[Constraint]:
    """Every constraint of ``tier`` for ``graph``, ordered by family then index tuple."""
    from vc_gap_lab.pentagon import SPLITS, split_parts

    size = graph.order + 1
    for family in tier_families(tier):
        if family == "unit":
            for i in range(size):
                yield Constraint(family, (i,), ((i, i, 1.0),), Relation.EQ, 1.0)
        elif family == "edge":
            for i, j in graph.edges():
                terms: dict[tuple[int, int], float] = {}
                _collect(terms, i + 1, j + 1, 1.0)
                _collect(terms, 0, i + 1, -1.0)
                _collect(terms, 0, j + 1, -1.0)
                _collect(terms, 0, 0, 1.0)
                yield Constraint(family, (i + 1, j + 1), _finish(terms), Relation.EQ, 0.0)
        elif family in ("triangle", "extended-triangle"):
            for a, b, c, sa, sb in triangle_families(size, family == "extended-triangle"):
                terms = {}
                _collect(terms, a, b, float(sa * sb))
                _collect(terms, a, c, float(-sa))
                _collect(terms, b, c, float(-sb))
                _collect(terms, c, c, 1.0)
                signs = (int(sa), int(sb)) if family == "extended-triangle" else None
                yield Constraint(
                    family, (int(a), int(b), int(c)), _finish(terms), Relation.GE, 0.0, signs
                )
        else:
            for five in itertools.combinations(range(size), 5):
                for split in range(len(SPLITS)):
                    S, T = split_parts(split, five)
                    terms = {}
                    for x, y in itertools.combinations(five, 2):
                        w = 1.0 if (x in S) != (y in S) else -1.0
                        _collect(terms, x, x, w)
                        _collect(terms, y, y, w)
                        _collect(terms, x, y, -2 * w)
                    yield Constraint(family, (*S, *T), _finish(terms), Relation.GE, 0.0)


def constraint_value(constraint: Constraint, gram: np.ndarray) -> float:
    """Value of the functional minus the right-hand side."""
    total = sum(c * gram[i, j] for i, j, c in constraint.terms)
    return float(total) - constraint.rhs


# --- Tier audit ---


@dataclass(frozen=True)
class _Worst:
    violation: float
    family: str
    witness: tuple[int, ...]
    signs: tuple[int, ...] | None = None


def check_tier(
    sol: VectorSolution,
    graph: Graph,
    tier: Tier,
    tol: float = DEFAULT_TOLERANCE,
    *,
    sample_size: int = 1_000_000,
    seed: int = 0,
) -> FeasibilityReport:
    """Evaluate every constraint of ``tier`` and report the worst one.

    Equalities contribute their absolute residual and inequalities minus their
    slack; the solution is feasible when the largest of these is within ``tol``.
    Pentagonal constraints are enumerated for up to 40 vectors and sampled
    (all tuples through the apex plus seeded tuples) beyond.
    """
    from vc_gap_lab.pentagon import pentagonal_census_array

    size = graph.order + 1
    if sol.size != size:
        raise RelaxationError(f"solution has {sol.size} vectors, graph needs {size}")
    smallest = min_eigenvalue(sol.gram)
    if smallest < -PSD_RELATIVE_TOLERANCE * abs(float(np.trace(sol.gram))):
        raise RelaxationError(f"gram matrix is not PSD (smallest eigenvalue {smallest:.3g})")

    gram = sol.gram
    candidates: list[_Worst] = []
    checked = 0
    exhaustive = True
    for family in tier_families(tier):
        if family == "unit":
            residual = np.abs(np.diag(gram) - 1)
            idx = int(np.argmax(residual))
            candidates.append(_Worst(float(residual[idx]), family, (idx,)))
            checked += size
        elif family == "edge":
            edges = np.array(list(graph.edges()), dtype=np.int64).reshape(-1, 2) + 1
            checked += len(edges)
            if len(edges):
                i, j = edges[:, 0], edges[:, 1]
                residual = np.abs(gram[i, j] - gram[0, i] - gram[0, j] + gram[0, 0])
                idx = int(np.argmax(residual))
                candidates.append(
                    _Worst(float(residual[idx]), family, (int(i[idx]), int(j[idx])))
                )
        elif family in ("triangle", "extended-triangle"):
            families = triangle_families(size, family == "extended-triangle")
            checked += len(families)
            if len(families):
                values = triangle_values(gram, families)
                idx = int(np.argmin(values))
                a, b, c, sa, sb = (int(v) for v in families[idx])
                signs = (sa, sb) if family == "extended-triangle" else None
                candidates.append(_Worst(-float(values[idx]), family, (a, b, c), signs))
        else:
            census = pentagonal_census_array(
                sol.squared_distances(),
                sample_size=sample_size,
                seed=seed,
                anchor_index_zero=True,
            )
            checked += census.enumerated + census.sampled
            exhaustive = census.exhaustive
            if census.witness is not None:
                w = census.witness
                candidates.append(_Worst(-census.min_slack, family, (*w.S, *w.T)))

    worst = candidates[0]
    for candidate in candidates[1:]:
        if candidate.violation > worst.violation:
            worst = candidate
    vc_form, distance_form = objective_forms(sol)
    logger.info(
        "%s tier on %d vectors: %d constraints, worst violation %.3g (%s)",
        tier.value,
        size,
        checked,
        worst.violation,
        worst.family,
    )
    return FeasibilityReport(
        tier=tier,
        feasible=worst.violation <= tol,
        worst_violation=worst.violation,
        family=worst.family,
        violating_witness=list(worst.witness),
        signs=list(worst.signs) if worst.signs is not None else None,
        constraints_checked=checked,
        exhaustive=exhaustive,
        objective_vc=vc_form,
        objective_distance_form=distance_form,
    )


def merge_feasibility(reports: list[FeasibilityReport]) -> FeasibilityReport:
    """Combine shard reports of one tier: the largest violation wins, first on ties."""
    worst = merge_min(reports, key=lambda r: -r.worst_violation)
    return worst.model_copy(
        update={
            "feasible": all(r.feasible for r in reports),
            "constraints_checked": sum(r.constraints_checked for r in reports),
            "exhaustive": all(r.exhaustive for r in reports),
        }
    )
