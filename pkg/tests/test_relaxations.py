"""Tests for vector solutions and the tiered feasibility audit."""

from fractions import Fraction

import numpy as np
import pytest

from vc_gap_lab.charikar import CharikarParams, CharikarSolution
from vc_gap_lab.errors import RelaxationError
from vc_gap_lab.graph import Graph, complete_bipartite, min_vertex_cover, random_graph
from vc_gap_lab.models import Tier
from vc_gap_lab.relaxations import (
    VectorSolution,
    check_tier,
    constraint_count,
    constraint_value,
    iter_constraints,
    merge_feasibility,
    objective,
    objective_forms,
    triangle_families,
    triangle_values,
)


def random_unit_solution(size: int, dim: int, rng: np.random.Generator) -> VectorSolution:
    coords = rng.normal(size=(size, dim))
    coords /= np.linalg.norm(coords, axis=1, keepdims=True)
    return VectorSolution.from_realization(coords)


def perturbed_k3() -> VectorSolution:
    """Vertex 2 on v_0 and vertices 0, 1 tilted together so that |v_1 - v_0|^2 = 0.1."""
    c = 0.95
    s = float(np.sqrt(1 - c * c))
    return VectorSolution.from_realization([[1.0, 0.0], [c, s], [c, s], [1.0, 0.0]])


class TestVectorSolution:
    """Tests for VectorSolution validation."""

    def test_integral(self) -> None:
        """Cover vertices copy v_0 and the rest point the other way."""
        sol = VectorSolution.integral(3, 0b101)
        assert sol.gram[0].tolist() == [1.0, 1.0, -1.0, 1.0]
        assert sol.size == 4

    def test_rejects_non_unit(self) -> None:
        """Diagonal entries must be 1."""
        with pytest.raises(RelaxationError, match="unit norm"):
            VectorSolution(np.diag([1.0, 2.0]))

    def test_rejects_asymmetric(self) -> None:
        """Gram matrices are symmetric."""
        with pytest.raises(RelaxationError, match="symmetric"):
            VectorSolution(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_rejects_non_square(self) -> None:
        """Gram matrices are square."""
        with pytest.raises(RelaxationError):
            VectorSolution(np.ones((2, 3)))

    def test_squared_distances(self) -> None:
        """|v_i - v_j|^2 = 2 - 2 v_i . v_j for unit vectors."""
        sol = VectorSolution.from_realization([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
        assert sol.squared_distances()[0].tolist() == [0.0, 2.0, 4.0]


class TestObjective:
    """Tests for the two objective forms."""

    def test_forms_agree_on_unit_vectors(self) -> None:
        """The VC form and the distance form coincide."""
        rng = np.random.default_rng(7)
        coords = rng.normal(size=(6, 4))
        coords /= np.linalg.norm(coords, axis=1, keepdims=True)
        vc_form, distance_form = objective_forms(VectorSolution.from_realization(coords))
        assert vc_form == pytest.approx(distance_form)

    def test_integral_objective_is_cover_size(self, c5: Graph) -> None:
        """An integral solution scores its cover size."""
        size, cover = min_vertex_cover(c5)
        assert objective_forms(VectorSolution.integral(5, cover))[0] == size

    def test_forms_agree_on_random_solutions(self) -> None:
        """Both forms agree to 1e-12 on 100 random unit-vector solutions."""
        rng = np.random.default_rng(11)
        for _ in range(100):
            size = int(rng.integers(2, 11))
            sol = random_unit_solution(size, int(rng.integers(1, size + 1)), rng)
            vc_form, distance_form = objective_forms(sol)
            assert abs(vc_form - distance_form) <= 1e-12

    def test_objective_is_vc_form(self) -> None:
        """objective returns the first of the two forms."""
        sol = VectorSolution.integral(3, 0b110)
        assert objective(sol) == objective_forms(sol)[0] == 2.0


class TestConstraints:
    """Tests for constraint enumeration."""

    def test_family_sizes(self) -> None:
        """3 C(m, 3) triangles and four times as many signed ones."""
        assert len(triangle_families(5)) == 30
        assert len(triangle_families(5, signed=True)) == 120

    def test_counts(self, k23: Graph) -> None:
        """K_{2,3} with the apex: 6 unit, 6 edge and 3 C(6, 3) triangle constraints."""
        assert constraint_count(k23, Tier.STANDARD) == 12
        assert constraint_count(k23, Tier.TRIANGLE) == 72
        assert constraint_count(k23, Tier.KARAKOSTAS) == 252
        assert constraint_count(k23, Tier.PENTAGONAL) == 132

    def test_values_match_audit(self, k23: Graph) -> None:
        """The smallest inequality value equals minus the audited violation."""
        rng = np.random.default_rng(3)
        coords = rng.normal(size=(6, 3))
        coords /= np.linalg.norm(coords, axis=1, keepdims=True)
        sol = VectorSolution.from_realization(coords)
        values = [
            constraint_value(c, sol.gram)
            for c in iter_constraints(k23, Tier.TRIANGLE)
            if c.family == "triangle"
        ]
        report = check_tier(sol, k23, Tier.TRIANGLE)
        edge_worst = max(
            abs(constraint_value(c, sol.gram))
            for c in iter_constraints(k23, Tier.STANDARD)
            if c.family == "edge"
        )
        assert report.worst_violation == pytest.approx(max(-min(values), edge_worst))


class TestCheckTier:
    """Tests for check_tier."""

    @pytest.mark.parametrize("tier", list(Tier))
    @pytest.mark.parametrize("seed", range(3))
    def test_integral_solutions_are_feasible(self, tier: Tier, seed: int) -> None:
        """A minimum cover is feasible in every tier and scores vc(G)."""
        graph = random_graph(7, 0.4, seed)
        size, cover = min_vertex_cover(graph)
        report = check_tier(VectorSolution.integral(7, cover), graph, tier)
        assert report.feasible
        assert report.worst_violation == 0.0
        assert report.objective_vc == size
        assert report.constraints_checked == constraint_count(graph, tier)

    def test_perturbed_edge(self, k3: Graph) -> None:
        """Tilting vertices 0 and 1 off v_0 breaks their edge equality."""
        report = check_tier(perturbed_k3(), k3, Tier.STANDARD)
        assert not report.feasible
        assert report.family == "edge"
        assert report.violating_witness == [1, 2]
        assert report.worst_violation == pytest.approx(0.1)

    def test_uncovered_edge(self, k3: Graph) -> None:
        """A non-cover has an edge residual of 4."""
        report = check_tier(VectorSolution.integral(3, 0b001), k3, Tier.TRIANGLE)
        assert not report.feasible
        assert report.worst_violation == pytest.approx(4.0)

    def test_k23_pentagonal_vectors(self, k23: Graph) -> None:
        """Six vectors are checked against every 2/3 split."""
        coords = np.zeros((6, 5))
        coords[0, 0] = coords[1, 0] = 1.0
        coords[2, 0] = -1.0
        for row, axis in zip(range(3, 6), range(1, 4), strict=True):
            coords[row, axis] = 1.0
        sol = VectorSolution.from_realization(coords)
        report = check_tier(sol, complete_bipartite(2, 3), Tier.PENTAGONAL)
        assert report.constraints_checked == constraint_count(k23, Tier.PENTAGONAL)
        assert report.exhaustive

    def test_size_mismatch(self, k3: Graph) -> None:
        """The solution needs |V| + 1 vectors."""
        with pytest.raises(RelaxationError):
            check_tier(VectorSolution.integral(2, 0b11), k3, Tier.STANDARD)

    def test_not_psd(self, k3: Graph) -> None:
        """Indefinite Gram matrices are rejected before any check."""
        gram = np.full((4, 4), -0.9)
        np.fill_diagonal(gram, 1.0)
        with pytest.raises(RelaxationError, match="PSD"):
            check_tier(VectorSolution(gram), k3, Tier.STANDARD)

    def test_merge_keeps_worst(self, k3: Graph) -> None:
        """Merging keeps the larger violation and adds the counts."""
        good = check_tier(VectorSolution.integral(3, 0b011), k3, Tier.STANDARD)
        bad = check_tier(perturbed_k3(), k3, Tier.STANDARD)
        merged = merge_feasibility([good, bad])
        assert merged.worst_violation == bad.worst_violation
        assert not merged.feasible
        assert merged.constraints_checked == good.constraints_checked * 2


class TestTierOrder:
    """Stronger tiers contain the constraints of weaker ones."""

    @pytest.mark.parametrize("seed", range(4))
    def test_worst_violation_is_monotone(self, seed: int) -> None:
        """Karakostas and pentagonal violations dominate triangle, which dominates standard."""
        rng = np.random.default_rng(seed)
        graph = random_graph(6, 0.5, seed)
        _, cover = min_vertex_cover(graph)
        candidates = [
            VectorSolution.integral(6, cover),
            *(random_unit_solution(7, 4, rng) for _ in range(5)),
        ]
        for sol in candidates:
            worst = {tier: check_tier(sol, graph, tier) for tier in Tier}
            standard = worst[Tier.STANDARD]
            triangle = worst[Tier.TRIANGLE]
            assert triangle.worst_violation >= standard.worst_violation
            assert worst[Tier.KARAKOSTAS].worst_violation >= triangle.worst_violation
            assert worst[Tier.PENTAGONAL].worst_violation >= triangle.worst_violation
            for stronger in (Tier.KARAKOSTAS, Tier.PENTAGONAL):
                if worst[stronger].feasible:
                    assert triangle.feasible
            if triangle.feasible:
                assert standard.feasible


class TestKarakostasOnCharikar:
    """The extended-set triangle through the apex on Charikar vectors."""

    @pytest.mark.parametrize(("t", "n"), [(1, 8), (2, 8)])
    def test_negated_pair_through_apex(self, t: int, n: int) -> None:
        """(y_i + y_0) . (y_j + y_0) is at least 2 beta (1 + beta) and bottoms out at 4 beta."""
        params = CharikarParams(t, n)
        sol = CharikarSolution(params)
        beta = params.beta
        # vertex 2^k differs from vertex 1 in k coordinates
        values = [1 + 2 * beta + sol.y_dot(1, 1 << k, exact=True) for k in range(1, n + 1)]
        assert all(isinstance(v, Fraction) for v in values)
        assert min(values) >= 2 * beta * (1 + beta)
        assert min(values) == 4 * beta

    def test_family_row_matches_closed_form(self) -> None:
        """The (-, -) family row with the apex in the middle evaluates to 1 + 2 beta + y_i . y_j."""
        params = CharikarParams(1, 8)
        sol = CharikarSolution(params)
        indices = [0, 1, 2, 8, 64, 256]
        gram = sol.gram(indices)
        families = triangle_families(len(indices), signed=True)
        rows = [r for r in range(len(families)) if tuple(families[r, 2:]) == (0, -1, -1)]
        values = triangle_values(gram, families[rows])
        expected = [1 + 2 * params.beta_float + gram[a, b] for a, b in families[rows, :2]]
        assert np.allclose(values, expected, rtol=0, atol=1e-12)
        assert values.min() >= 2 * params.beta_float * (1 + params.beta_float) - 1e-12
