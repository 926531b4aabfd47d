"""Tests for enums and input models."""

import pytest
from pydantic import ValidationError

from vc_gap_lab.models import GraphFile, MetricFile, RunConfig, Tier


class TestTier:
    """Tests for Tier parsing."""

    def test_edge_alias(self) -> None:
        """'edge' names the standard tier."""
        assert Tier("edge") is Tier.STANDARD
        assert Tier(" Edge ") is Tier.STANDARD

    def test_parse_list(self) -> None:
        """Order is kept and repeats are dropped."""
        assert Tier.parse_list("triangle, edge,standard,,pentagonal") == [
            Tier.TRIANGLE,
            Tier.STANDARD,
            Tier.PENTAGONAL,
        ]

    def test_parse_list_unknown(self) -> None:
        with pytest.raises(ValueError):
            Tier.parse_list("triangle,sherali-adams")


class TestInputFiles:
    """Tests for GraphFile and MetricFile."""

    def test_graph_file(self) -> None:
        graph = GraphFile.model_validate({"n": 3, "edges": [[0, 1], [1, 2]]})
        assert graph.edges == [(0, 1), (1, 2)]
        assert graph.labels is None

    def test_graph_negative_order(self) -> None:
        with pytest.raises(ValidationError):
            GraphFile(n=-1)

    def test_metric_exact_entries(self) -> None:
        """Entries may be numbers or 'p/q' strings."""
        metric = MetricFile.model_validate({"dist": [[0, "1/2"], ["1/2", 0]]})
        assert metric.dist[0][1] == "1/2"

    def test_metric_not_square(self) -> None:
        with pytest.raises(ValidationError, match="square"):
            MetricFile(dist=[[0, 1], [1]])

    def test_metric_labels(self) -> None:
        """Labels must match the matrix size."""
        with pytest.raises(ValidationError, match="labels"):
            MetricFile(dist=[[0, 1], [1, 0]], labels=["a"])


class TestRunConfig:
    """Tests for RunConfig validation."""

    def test_defaults(self) -> None:
        config = RunConfig()
        assert config.tolerance == 1e-9
        assert (config.shard_index, config.shard_count) == (0, 1)

    def test_shard_out_of_range(self) -> None:
        with pytest.raises(ValidationError, match="shard_index"):
            RunConfig(shard_index=2, shard_count=2)

    def test_tolerance_positive(self) -> None:
        with pytest.raises(ValidationError):
            RunConfig(tolerance=0)
