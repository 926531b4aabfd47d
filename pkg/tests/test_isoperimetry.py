"""Tests for the isoperimetry, Poincare and calculus lemma audits."""

import math

import pytest

from vc_gap_lab.cube import VertexSet, enumerate_subsets
from vc_gap_lab.errors import IsoperimetryError
from vc_gap_lab.isoperimetry import (
    PoincareConstants,
    calculus_lemma_scan,
    census_generalized,
    check_generalized,
    isoperimetric_bound,
    lemma_function,
    log2_size,
    merge_isoperimetry,
    merge_poincare,
    poincare_census,
    poincare_check,
)
from vc_gap_lab.models import BoundKind

ALPHA = math.log(2) / (14 - 8 * math.log(2))


def naive_violations(n: int) -> list[str]:
    """Generalized bound violations found with plain loops over vertices and edges."""
    found = []
    for members in range(1 << (1 << n)):
        inside = [bool((members >> u) & 1) for u in range(1 << n)]
        size = sum(inside)
        boundary = sum(
            inside[u] != inside[u ^ (1 << c)]
            for u in range(1 << n)
            for c in range(n)
            if u < u ^ (1 << c)
        )
        p = sum(inside[u] and inside[u ^ ((1 << n) - 1)] for u in range(1 << n))
        bound = size * (n - math.log2(size)) + p if size else 0.0
        if boundary - bound < -1e-9:
            found.append(VertexSet(n, members).hex())
    return found


class TestCheckGeneralized:
    """Tests for single-set isoperimetric records."""

    def test_singleton_is_tight(self) -> None:
        """A vertex of Q_3 has boundary 3 and bound 3."""
        record = check_generalized(VertexSet.from_points(3, [6]))
        assert (record.boundary, record.bound, record.slack) == (3, 3.0, 0.0)

    def test_antipodal_pair_is_tight(self) -> None:
        """{u, -u} in Q_4: boundary 8 = 2(4 - 1) + 2."""
        record = check_generalized(VertexSet.from_points(4, [0b0011, 0b1100]))
        assert record.boundary == 8
        assert record.p == 2
        assert record.antipodal_pairs == 1
        assert record.slack == 0.0

    def test_n2_triple_violates(self) -> None:
        """The n=2 triple has boundary 2 against a bound near 3.245."""
        record = check_generalized(VertexSet.from_points(2, [3, 1, 0]))
        assert record.boundary == 2
        assert record.bound == pytest.approx(3 * (2 - math.log2(3)) + 2)
        assert record.slack < 0

    def test_bound_kinds(self) -> None:
        """Standard drops p(S) and the corollary adds |S|."""
        assert isoperimetric_bound(3, 2, 2, BoundKind.STANDARD) == 4.0
        assert isoperimetric_bound(3, 2, 2, BoundKind.GENERALIZED) == 6.0
        assert isoperimetric_bound(3, 2, 2, BoundKind.COROLLARY) == 6.0
        assert isoperimetric_bound(3, 0, 0, BoundKind.COROLLARY) == 0.0

    def test_log2_exact_at_powers_of_two(self) -> None:
        """Powers of two take the integer path."""
        assert log2_size(1024) == 10.0
        assert log2_size(3) == pytest.approx(math.log2(3))
        with pytest.raises(IsoperimetryError):
            log2_size(0)


class TestCensusGeneralized:
    """Tests for the isoperimetric census."""

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_small_sets_never_violate(self, n: int) -> None:
        """With |S| <= 2^(n-1) there are no violations."""
        assert census_generalized(n, restrict_small=True).violations == []

    @pytest.mark.slow
    def test_small_sets_never_violate_n4(self) -> None:
        """The restricted census of Q_4 is clean."""
        assert census_generalized(4, restrict_small=True).violations == []

    def test_n2_violations(self) -> None:
        """Q_2 fails at its four triples and at the full cube."""
        report = census_generalized(2)
        assert [v.set_bits_hex for v in report.violations] == ["0x7", "0xb", "0xd", "0xe", "0xf"]
        assert report.checked == 16

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_full_cube_violates(self, n: int) -> None:
        """S = Q_n has no boundary but p(S) = 2^n."""
        full = VertexSet.full(n).hex()
        assert full in {v.set_bits_hex for v in census_generalized(n).violations}

    @pytest.mark.parametrize("n", [2, 3])
    def test_matches_naive_oracle(self, n: int) -> None:
        """The bitset census agrees set for set with a plain loop."""
        found = [v.set_bits_hex for v in census_generalized(n).violations]
        assert found == naive_violations(n)

    @pytest.mark.parametrize("n", [2, 3])
    def test_standard_bound_holds(self, n: int) -> None:
        """Without p(S) the bound holds for every subset."""
        assert census_generalized(n, kind=BoundKind.STANDARD).violations == []

    @pytest.mark.slow
    def test_symmetric_corollary_n5(self) -> None:
        """The corollary bound holds on every small symmetric subset of Q_5."""
        report = census_generalized(5, True, symmetric=True, kind=BoundKind.COROLLARY)
        assert report.violations == []
        assert report.checked > 0

    def test_sharded_census_matches(self) -> None:
        """Merging shard censuses reproduces the single run."""
        whole = census_generalized(3)
        parts = [census_generalized(3, shard_index=i, shard_count=5) for i in range(5)]
        assert merge_isoperimetry(parts) == whole


class TestPoincare:
    """Tests for the Poincare inequality on symmetric sets."""

    def test_antipodal_pair_equality(self) -> None:
        """n=4, S = {u, -u}: both sides equal 8 alpha + 1."""
        record = poincare_check(VertexSet.from_points(4, [0b0101, 0b1010]))
        assert record.lhs == pytest.approx(8 * ALPHA + 1, abs=1e-12)
        assert record.rhs == pytest.approx(8 * ALPHA + 1, abs=1e-12)
        assert abs(record.slack) <= 1e-12

    def test_full_cube(self) -> None:
        """S = Q_n: lhs 0, rhs 2^(n-1)."""
        record = poincare_check(VertexSet.full(3))
        assert record.lhs == 0.0
        assert record.rhs == 4.0

    def test_complement_of_pair(self) -> None:
        """n=3, complement of an antipodal pair: rhs = 6 alpha + 3 and slack > 0."""
        s = VertexSet.from_points(3, [0b000, 0b111]).complement()
        record = poincare_check(s)
        assert record.rhs == pytest.approx(6 * ALPHA + 3)
        assert record.slack > 0

    def test_needs_symmetric_set(self) -> None:
        """Non-symmetric sets are rejected."""
        with pytest.raises(IsoperimetryError):
            poincare_check(VertexSet.from_points(3, [0]))

    def test_census_n4(self) -> None:
        """All 256 symmetric sets of Q_4 pass and every antipodal pair is tight."""
        report = poincare_census(4)
        assert report.checked == 256
        assert report.violations == []
        pairs = [r for r in report.equality_cases if r.size == 2]
        assert len(pairs) == 8
        assert all(r.lhs == pytest.approx(8 * ALPHA + 1, abs=1e-12) for r in pairs)

    @pytest.mark.slow
    def test_census_n5(self) -> None:
        """All 65536 symmetric sets of Q_5 pass."""
        report = poincare_census(5)
        assert report.checked == 65536
        assert report.violations == []

    def test_sharded_census_matches(self) -> None:
        """Merging shard censuses reproduces the single run."""
        whole = poincare_census(4)
        parts = [poincare_census(4, shard_index=i, shard_count=3) for i in range(3)]
        assert merge_poincare(parts) == whole

    def test_every_symmetric_set_checked(self) -> None:
        """The census visits exactly the symmetric sets."""
        assert poincare_census(3).checked == sum(1 for _ in enumerate_subsets(3, True))


class TestCalculusLemma:
    """Tests for the lemma function scan."""

    def test_constants(self) -> None:
        """alpha = ln 2 / (14 - 8 ln 2) and factor = (8/7)(4 alpha + 1/2)."""
        c = PoincareConstants()
        assert c.alpha == pytest.approx(ALPHA)
        assert c.factor == pytest.approx(8 / 7 * (4 * ALPHA + 0.5))

    def test_scan(self) -> None:
        """Minimum at 3 with value (8/7)(4 alpha + 1/2)."""
        report = calculus_lemma_scan()
        assert report.argmin == pytest.approx(3.0, abs=1e-6)
        assert report.minval == pytest.approx(report.expected_minval, abs=1e-9)
        assert report.minval == pytest.approx(0.946206, abs=1e-5)
        assert report.f_at_one == pytest.approx(4 * ALPHA + 1, abs=1e-12)
        assert abs(report.derivative_at_three) < 1e-6

    def test_value_at_three(self) -> None:
        """f(3) equals the Poincare factor exactly."""
        assert lemma_function(3.0) == pytest.approx(PoincareConstants().factor, abs=1e-15)

    def test_grid_too_small(self) -> None:
        """The grid needs at least three points."""
        with pytest.raises(IsoperimetryError):
            calculus_lemma_scan(grid=2)
