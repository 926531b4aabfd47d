"""Tests for finite metrics, cut measures, exact l1 distortion and rounding."""

import itertools
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from vc_gap_lab.errors import MetricError
from vc_gap_lab.graph import Graph, min_vertex_cover, random_graph
from vc_gap_lab.isoperimetry import PoincareConstants
from vc_gap_lab.metrics import (
    CutMeasure,
    FiniteMetric,
    cut_measure_to_metric,
    cut_rounding,
    dump_metric,
    is_negative_type,
    l1_lower_bound,
    l1_points_to_cut_measure,
    load_metric,
    min_distortion_l1,
    poincare_distortion_bound,
    poincare_lower_bound_report,
    tensor_metric,
    tensor_report,
    triangle_census,
    two_valued_cut_measure,
)
from vc_gap_lab.models import EmbeddingMethod, LpMode
from vc_gap_lab.relaxations import VectorSolution

SAMPLE_CUTS = CutMeasure.from_cuts(
    5, [(0b00110, Fraction(1)), (0b11000, Fraction(2)), (0b01010, Fraction(1, 2))]
)


def l1_distance(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    return sum(abs(x - y) for x, y in zip(a, b, strict=True))


class TestFiniteMetric:
    """Tests for FiniteMetric validation and files."""

    def test_rejects_asymmetric(self) -> None:
        """d(i, j) must equal d(j, i)."""
        with pytest.raises(MetricError):
            FiniteMetric.from_matrix([[0, 1], [2, 0]])

    def test_rejects_negative(self) -> None:
        """Distances are nonnegative."""
        with pytest.raises(MetricError):
            FiniteMetric.from_matrix([[0, -1], [-1, 0]])

    def test_rejects_nonzero_diagonal(self) -> None:
        """d(i, i) is zero."""
        with pytest.raises(MetricError):
            FiniteMetric.from_matrix([[1, 1], [1, 0]])

    def test_fraction_strings(self, tmp_path: Path) -> None:
        """'p/q' entries load as exact Fractions."""
        path = tmp_path / "m.json"
        path.write_text('{"dist": [[0, "1/3"], ["1/3", 0]]}')
        metric = load_metric(path)
        assert metric.d(0, 1) == Fraction(1, 3)
        assert metric.exact

    def test_non_square_file(self, tmp_path: Path) -> None:
        """A ragged matrix is an invalid metric file."""
        path = tmp_path / "m.json"
        path.write_text('{"dist": [[0, 1], [1]]}')
        with pytest.raises(MetricError, match="invalid metric file"):
            load_metric(path)

    def test_dump_round_trip(self, tmp_path: Path, k23_metric: FiniteMetric) -> None:
        """dump_metric output reads back to the same metric."""
        path = tmp_path / "k23.json"
        path.write_text(dump_metric(k23_metric))
        assert load_metric(path) == k23_metric

    def test_permuted(self, k23_metric: FiniteMetric) -> None:
        """Relabeling moves distances with the points."""
        moved = k23_metric.permuted([4, 3, 2, 1, 0])
        assert moved.d(0, 1) == k23_metric.d(4, 3)
        assert moved.labels[0] == "4"


class TestTriangleCensus:
    """Tests for triangle_census."""

    def test_graph_metric_is_metric(self, k23_metric: FiniteMetric) -> None:
        """Shortest path metrics satisfy the triangle inequality."""
        witness = triangle_census(k23_metric)
        assert witness is not None
        assert witness.slack >= 0

    def test_detects_violation(self) -> None:
        """d(0, 2) = 5 > d(0, 1) + d(1, 2) is found."""
        metric = FiniteMetric.from_matrix([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
        witness = triangle_census(metric)
        assert witness is not None
        assert witness.slack == -3
        assert (witness.i, witness.j, witness.k) == (0, 2, 1)


class TestCutMeasures:
    """Tests for cut measures and their metrics."""

    def test_two_points_single_cut(self) -> None:
        """Two points need one cut weighted by their l1 distance."""
        cm = l1_points_to_cut_measure([(0, 0), (3, 1)])
        assert cm.cuts == ((0b10, Fraction(4)),)

    def test_square_corners(self) -> None:
        """The corners of the unit square decompose into the two coordinate cuts."""
        cm = l1_points_to_cut_measure([(0, 0), (1, 0), (0, 1), (1, 1)])
        assert len(cm.cuts) == 2
        assert all(w == 1 for _, w in cm.cuts)

    def test_l1_round_trip_is_exact(self) -> None:
        """The threshold cuts reproduce the l1 metric exactly."""
        rng = np.random.default_rng(7)
        points = [tuple(int(v) for v in row) for row in rng.integers(-4, 5, size=(6, 3))]
        metric = cut_measure_to_metric(l1_points_to_cut_measure(points))
        for i, j in itertools.combinations(range(6), 2):
            assert metric.d(i, j) == l1_distance(points[i], points[j])

    def test_normalization_merges_complements(self) -> None:
        """A mask and its complement are the same cut."""
        cm = CutMeasure.from_cuts(3, [(0b001, 1), (0b110, 2)])
        assert cm.cuts == ((0b110, 3),)

    def test_two_valued_coordinates(self) -> None:
        """Each two-valued coordinate contributes one cut of weight (p - q)^2."""
        cm = two_valued_cut_measure([(1, 1), (1, -1), (-1, -1)])
        metric = cut_measure_to_metric(cm)
        assert metric.d(0, 1) == 4
        assert metric.d(0, 2) == 8

    def test_two_valued_rejects_three_values(self) -> None:
        """A coordinate with three values has no single cut."""
        with pytest.raises(MetricError):
            two_valued_cut_measure([(0,), (1,), (2,)])

    def test_cut_metrics_are_negative_type(self) -> None:
        """Every cut-measure metric is of negative type."""
        assert is_negative_type(cut_measure_to_metric(SAMPLE_CUTS))

    def test_k23_is_not_negative_type(self, k23_metric: FiniteMetric) -> None:
        """x = (1, 1, -2/3, -2/3, -2/3) gives a positive quadratic form on K_{2,3}."""
        assert not is_negative_type(k23_metric)
        assert not is_negative_type(k23_metric, base=3)


class TestMinDistortion:
    """Tests for the cut-cone LP."""

    def test_three_point_metric(self) -> None:
        """Any three points embed isometrically."""
        metric = FiniteMetric.from_matrix([[0, 3, 4], [3, 0, 5], [4, 5, 0]])
        report = min_distortion_l1(metric, LpMode.RATIONAL)
        assert report.c1_exact_rational == "1"
        assert report.method is EmbeddingMethod.CUT_CONE_LP

    def test_cut_metric_is_isometric(self) -> None:
        """A cut-measure metric has c1 = 1."""
        report = min_distortion_l1(cut_measure_to_metric(SAMPLE_CUTS))
        assert report.c1_exact == pytest.approx(1.0, abs=1e-9)

    def test_k23(self, k23_metric: FiniteMetric) -> None:
        """K_{2,3} needs distortion at least 4/3 and both modes agree."""
        exact = min_distortion_l1(k23_metric, LpMode.RATIONAL)
        approx = min_distortion_l1(k23_metric, LpMode.FLOAT)
        assert exact.c1_exact is not None and approx.c1_exact is not None
        assert exact.c1_exact >= 4 / 3 - 1e-6
        assert abs(exact.c1_exact - approx.c1_exact) <= 1e-7
        assert exact.c1_lower == pytest.approx(4 / 3)
        assert exact.c1_exact >= exact.c1_lower - 1e-7

    def test_certificate_is_nonexpanding(self, k23_metric: FiniteMetric) -> None:
        """The certificate never stretches a distance and shrinks by at most c1."""
        report = min_distortion_l1(k23_metric, LpMode.RATIONAL)
        assert report.certificate is not None and report.c1_exact_rational is not None
        cm = CutMeasure.from_cuts(
            5, [(int(c.mask, 16), Fraction(c.weight)) for c in report.certificate]
        )
        c1 = Fraction(report.c1_exact_rational)
        for i, j in itertools.combinations(range(5), 2):
            d = k23_metric.d(i, j)
            assert d / c1 <= cm.distance(i, j) <= d

    def test_scale_and_relabel_invariance(self, k23_metric: FiniteMetric) -> None:
        """c1 does not change under scaling or relabeling."""
        base = min_distortion_l1(k23_metric, LpMode.RATIONAL).c1_exact_rational
        scaled = min_distortion_l1(k23_metric.scaled(3), LpMode.RATIONAL).c1_exact_rational
        moved = min_distortion_l1(
            k23_metric.permuted([2, 0, 4, 1, 3]), LpMode.RATIONAL
        ).c1_exact_rational
        assert base == scaled == moved

    def test_size_cap(self) -> None:
        """The LP is limited to 17 points."""
        metric = FiniteMetric.from_matrix(
            [[0 if i == j else 1 for j in range(18)] for i in range(18)]
        )
        with pytest.raises(MetricError):
            min_distortion_l1(metric)

    def test_lower_bound_report(self, k23_metric: FiniteMetric) -> None:
        """The bound-only report carries the pentagonal witness."""
        report = poincare_lower_bound_report(k23_metric)
        assert report.c1_exact is None
        assert report.c1_lower == pytest.approx(4 / 3)
        assert report.violated_inequality is not None
        assert report.violated_inequality.lhs == 6
        assert report.violated_inequality.rhs == 8

    def test_lower_bound_is_one_for_l1_metrics(self) -> None:
        """No l1-valid inequality fails on a cut metric."""
        lower, witness = l1_lower_bound(cut_measure_to_metric(SAMPLE_CUTS))
        assert lower == 1.0
        assert witness is None


class TestTensorMetric:
    """Tests for the tensor metric and its report."""

    def test_n3_distances(self) -> None:
        """n=3: origin at 9, distinct classes at 2*9 - 2*1 = 16."""
        metric = tensor_metric(3)
        assert metric.size == 5
        assert all(metric.d(0, a) == 9 for a in range(1, 5))
        assert all(metric.d(a, b) == 16 for a, b in itertools.combinations(range(1, 5), 2))

    def test_n2_is_collinear(self) -> None:
        """n=2 gives distances 4, 4, 8 and c1 = 1."""
        metric = tensor_metric(2)
        assert sorted(float(metric.d(i, j)) for i, j in itertools.combinations(range(3), 2)) == [
            4.0,
            4.0,
            8.0,
        ]
        assert min_distortion_l1(metric).c1_exact == pytest.approx(1.0, abs=1e-9)

    def test_unmerged_keeps_antipodes(self) -> None:
        """Without merging, u and -u sit at distance 0."""
        metric = tensor_metric(3, merged=False)
        assert metric.size == 9
        assert metric.d(1, 8) == 0

    @pytest.mark.parametrize("n", range(2, 7))
    def test_identities(self, n: int) -> None:
        """Origin, edge and pair-sum identities hold exactly; no triangle fails."""
        report = tensor_report(n)
        assert report.origin_distance_ok
        assert report.edge_distance_ok
        assert report.edge_distance == 8 * (n - 1)
        assert report.ordered_pair_sum == report.ordered_pair_sum_expected
        assert report.triangle_min_slack >= 0
        assert report.negative_type

    def test_n4_pair_sum(self) -> None:
        """Sum over ordered pairs of Q_4 is 2^8 (32 - 8) = 6144."""
        assert tensor_report(4).ordered_pair_sum == 6144

    def test_exact_c1_n3(self) -> None:
        """The exact distortion of the n=3 tensor metric is at least 1."""
        report = tensor_report(3, exact_c1=True)
        assert report.embedding is not None
        assert report.embedding.c1_exact is not None
        assert report.embedding.c1_exact >= 1.0 - 1e-9


class TestPoincareDistortionBound:
    """Tests for the distortion lower bound sequence."""

    def test_n10(self) -> None:
        """D(10) is about 1.0710."""
        assert poincare_distortion_bound(10) == pytest.approx(1.0710, abs=1e-3)

    def test_n100(self) -> None:
        """D(100) is about 1.1360."""
        assert poincare_distortion_bound(100) == pytest.approx(1.1360, abs=1e-3)

    def test_increases_to_eight_sevenths(self) -> None:
        """The bound increases and stays below 8/7."""
        values = [poincare_distortion_bound(n) for n in range(2, 200)]
        assert all(a < b for a, b in itertools.pairwise(values))
        assert values[-1] < 8 / 7
        limit = PoincareConstants().factor / (4 * PoincareConstants().alpha + 0.5)
        assert limit == pytest.approx(8 / 7)

    def test_needs_n2(self) -> None:
        """n = 1 has no edge term."""
        with pytest.raises(MetricError):
            poincare_distortion_bound(1)


class TestCutRounding:
    """Tests for rounding cut decompositions to covers."""

    def test_integral_five_cycle(self, c5: Graph) -> None:
        """An integral optimum on C_5 rounds back to a 3-vertex cover with lambda 2."""
        size, cover = min_vertex_cover(c5)
        sol = VectorSolution.integral(c5.order, cover)
        assert sol.realization is not None
        result = cut_rounding(c5, sol, two_valued_cut_measure(sol.realization.tolist()))
        assert result.cover == cover
        assert result.cover_size == size == 3
        assert result.lambdas == (2.0,)
        assert result.objective == pytest.approx(3.0)

    @pytest.mark.parametrize("seed", range(12))
    def test_random_graphs_recover_vc(self, seed: int) -> None:
        """Integral optima on random graphs round to covers of size vc."""
        graph = random_graph(8, 0.4, seed)
        size, cover = min_vertex_cover(graph)
        sol = VectorSolution.integral(graph.order, cover)
        assert sol.realization is not None
        result = cut_rounding(graph, sol, two_valued_cut_measure(sol.realization.tolist()))
        assert result.cover_size == size
        assert result.sum_lambda == pytest.approx(2.0)
        assert result.objective == pytest.approx(size)
        assert graph.is_cover(result.cover)

    def test_mismatched_cuts(self, c5: Graph) -> None:
        """A cut measure that does not reproduce the solution is rejected."""
        _, cover = min_vertex_cover(c5)
        sol = VectorSolution.integral(c5.order, cover)
        wrong = CutMeasure.from_cuts(6, [(0b000010, Fraction(1))])
        with pytest.raises(MetricError):
            cut_rounding(c5, sol, wrong)
