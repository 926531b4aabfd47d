"""Pytest fixtures for vc-gap-lab tests."""

import json
from collections.abc import Callable, Generator
from pathlib import Path
from unittest.mock import patch

import pytest

from vc_gap_lab.graph import Graph, complete_bipartite, complete_graph, cycle_graph, graph_metric
from vc_gap_lab.metrics import FiniteMetric


@pytest.fixture(autouse=True)
def isolated_user_config(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Generator[Path]:
    """Point the user config at an empty temp location and clear the worker override."""
    monkeypatch.delenv("VC_GAP_LAB_THREADS", raising=False)
    config_path = tmp_path / "user-config" / "config.yaml"
    with (
        patch("vc_gap_lab.user_config.get_config_path", return_value=config_path),
        patch("vc_gap_lab.cli.get_config_path", return_value=config_path),
    ):
        yield config_path


@pytest.fixture
def k23() -> Graph:
    """K_{2,3} with the small side on vertices 0 and 1."""
    return complete_bipartite(2, 3)


@pytest.fixture
def k23_metric(k23: Graph) -> FiniteMetric:
    return graph_metric(k23)


@pytest.fixture
def k3() -> Graph:
    return complete_graph(3)


@pytest.fixture
def c5() -> Graph:
    return cycle_graph(5)


@pytest.fixture
def write_graph(tmp_path: Path) -> Callable[[Graph, str], Path]:
    """Write a graph in the JSON input format and return its path."""

    def _write(graph: Graph, name: str = "graph.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps({"n": graph.order, "edges": [list(e) for e in graph.edges()]}))
        return path

    return _write


@pytest.fixture
def write_metric(tmp_path: Path) -> Callable[[list[list[int | float | str]], str], Path]:
    """Write a distance matrix in the metric JSON format and return its path."""

    def _write(dist: list[list[int | float | str]], name: str = "metric.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps({"dist": dist}))
        return path

    return _write
