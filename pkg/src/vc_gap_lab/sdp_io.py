"""SDPA sparse export of the relaxation tiers and import of candidate solutions.

Export layout: block 1 is the Gram matrix X of (v_0, v_1, ..., v_N) and
block 2 is a diagonal block of nonnegative slacks, one per row. Row r reads
``<A_r, X> - s_r = b_r``; equalities appear as the pair ``<A, X> >= b`` and
``<-A, X> >= -b``. F0 holds the negated linear part of the vertex cover
objective, whose constant offset is recorded in the header.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from vc_gap_lab.errors import RelaxationError, SdpFormatError
from vc_gap_lab.lp import Relation
from vc_gap_lab.numerics import format_number
from vc_gap_lab.relaxations import (
    VectorSolution,
    check_tier,
    constraint_count,
    iter_constraints,
)
from vc_gap_lab.template_engine import create_jinja_environment, render_template

if TYPE_CHECKING:
    from collections.abc import Iterator

    from vc_gap_lab.graph import Graph
    from vc_gap_lab.models import FeasibilityReport, Tier

logger = logging.getLogger(__name__)

MAX_EXPORT_SIZE = 40
SDPA_TEMPLATE = "sdpa.dat-s.j2"
_SEPARATORS = re.compile(r"[\s,(){}]+")


def _entry(matrix: int, block: int, i: int, j: int, value: float) -> str:
    return f"{matrix} {block} {i + 1} {j + 1} {format_number(float(value))}"


def _objective_entries(order: int) -> Iterator[str]:
    for v in range(order):
        yield _entry(0, 1, 0, v + 1, -0.25)


def _row_entries(graph: Graph, tier: Tier, rhs: list[str]) -> Iterator[str]:
    row = 0
    for constraint in iter_constraints(graph, tier):
        flips = (1.0, -1.0) if constraint.relation is Relation.EQ else (1.0,)
        for sign in flips:
            row += 1
            rhs.append(format_number(sign * constraint.rhs))
            for i, j, c in constraint.terms:
                value = sign * c if i == j else sign * c / 2
                yield _entry(row, 1, i, j, value)
            yield _entry(row, 2, row - 1, row - 1, -1.0)


def row_count(graph: Graph, tier: Tier) -> int:
    """SDPA rows of an export: two per equality, one per inequality."""
    return sum(
        2 if c.relation is Relation.EQ else 1 for c in iter_constraints(graph, tier)
    )


def export_sdpa(graph: Graph, tier: Tier) -> str:
    """Render ``tier`` for ``graph`` in SDPA sparse format."""
    size = graph.order + 1
    if size > MAX_EXPORT_SIZE:
        raise RelaxationError(
            f"export supports at most {MAX_EXPORT_SIZE} vectors, graph needs {size}"
        )
    rhs: list[str] = []
    # rows must be generated before the header is rendered
    entries = [*_objective_entries(graph.order), *_row_entries(graph, tier, rhs)]
    context = {
        "title": f"vertex cover SDP, {tier.value} tier, {graph.order} vertices",
        "comments": [
            f"constraints {constraint_count(graph, tier)} (equalities as row pairs)",
            f"objective: minimize {format_number(graph.order / 2)} - <F0, X>",
            "block 1: Gram matrix of v_0..v_N; block 2: row slacks",
        ],
        "rows": len(rhs),
        "block_size": size,
        "rhs": rhs,
        "entries": entries,
    }
    text = render_template(create_jinja_environment(), SDPA_TEMPLATE, context)
    logger.info("exported %s tier: %d rows, block size %d", tier.value, len(rhs), size)
    return text


@dataclass(frozen=True)
class SdpInstance:
    """A parsed SDPA sparse instance."""

    rows: int
    block_sizes: tuple[int, ...]
    rhs: tuple[float, ...]
    entries: tuple[tuple[int, int, int, int, float], ...]
    comments: tuple[str, ...] = field(default_factory=tuple)

    def row_matrix(self, row: int, block: int = 1) -> np.ndarray:
        """Symmetric coefficient matrix of ``row`` (0 is the objective) on ``block``."""
        size = abs(self.block_sizes[block - 1])
        matrix = np.zeros((size, size))
        for m, b, i, j, value in self.entries:
            if m == row and b == block:
                matrix[i - 1, j - 1] = value
                matrix[j - 1, i - 1] = value
        return matrix

    def worst_row_violation(self, gram: np.ndarray) -> float:
        """Largest ``b_r - <A_r, X>`` over all rows; nonpositive when every row holds."""
        size = self.block_sizes[0]
        if gram.shape != (size, size):
            raise RelaxationError(f"gram has shape {gram.shape}, instance needs {size}x{size}")
        values = np.zeros(self.rows)
        for m, b, i, j, value in self.entries:
            if m == 0 or b != 1:
                continue
            weight = 1.0 if i == j else 2.0
            values[m - 1] += weight * value * gram[i - 1, j - 1]
        return float(np.max(np.asarray(self.rhs) - values)) if self.rows else 0.0


def _data_lines(text: str) -> Iterator[tuple[int, str]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line:
            yield number, line


def _fields(line: str) -> list[str]:
    return [f for f in _SEPARATORS.split(line) if f]


def parse_sdpa(text: str) -> SdpInstance:
    """Read an SDPA sparse file; comment lines start with '"' or '*'."""
    lines = list(_data_lines(text))
    comments = tuple(line[1:].strip() for _, line in lines if line[0] in "\"*")
    data = [(n, line) for n, line in lines if line[0] not in "\"*"]
    if len(data) < 4:
        last = lines[-1][0] if lines else 0
        raise SdpFormatError(last, "file ends before the header is complete")
    try:
        rows = int(_fields(data[0][1])[0])
        blocks = int(_fields(data[1][1])[0])
        sizes = tuple(int(v) for v in _fields(data[2][1]))
    except ValueError as e:
        raise SdpFormatError(data[0][0], f"bad header value: {e}") from e
    if len(sizes) != blocks:
        raise SdpFormatError(data[2][0], f"expected {blocks} block sizes, got {len(sizes)}")
    try:
        rhs = tuple(float(v) for v in _fields(data[3][1]))
    except ValueError as e:
        raise SdpFormatError(data[3][0], f"bad right-hand side: {e}") from e
    if len(rhs) != rows:
        raise SdpFormatError(data[3][0], f"expected {rows} right-hand sides, got {len(rhs)}")

    entries = []
    for number, line in data[4:]:
        fields = _fields(line)
        if len(fields) != 5:
            raise SdpFormatError(number, f"expected 5 fields, got {len(fields)}")
        try:
            m, b, i, j = (int(v) for v in fields[:4])
            value = float(fields[4])
        except ValueError as e:
            raise SdpFormatError(number, str(e)) from e
        if not 0 <= m <= rows or not 1 <= b <= blocks:
            raise SdpFormatError(number, f"entry refers to row {m} block {b}")
        if not 1 <= i <= j <= abs(sizes[b - 1]):
            raise SdpFormatError(number, f"entry ({i}, {j}) is outside the upper triangle")
        entries.append((m, b, i, j, value))
    return SdpInstance(rows, sizes, rhs, tuple(entries), comments)


# --- Solutions ---


def export_solution(sol: VectorSolution) -> str:
    """Write ``sol`` in the ``gram N`` text format."""
    lines = [f"gram {sol.size}"]
    for row in sol.gram:
        lines.append(" ".join(format_number(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> VectorSolution:
    """Parse ``gram N`` or ``coords N D`` followed by the matrix rows."""
    lines = [(n, line) for n, line in _data_lines(text) if not line.startswith("#")]
    if not lines:
        raise SdpFormatError(1, "empty solution file")
    number, header = lines[0]
    parts = header.split()
    kind = parts[0].lower() if parts else ""
    try:
        if kind == "gram" and len(parts) == 2:
            count, width = int(parts[1]), int(parts[1])
        elif kind == "coords" and len(parts) == 3:
            count, width = int(parts[1]), int(parts[2])
        else:
            raise SdpFormatError(number, "header must be 'gram N' or 'coords N D'")
    except ValueError as e:
        raise SdpFormatError(number, f"bad header: {e}") from e
    if count < 1 or width < 1:
        raise SdpFormatError(number, "matrix dimensions must be positive")

    body = lines[1:]
    if len(body) < count:
        last = body[-1][0] if body else number
        raise SdpFormatError(last, f"expected {count} rows, file ends after {len(body)}")
    if len(body) > count:
        raise SdpFormatError(body[count][0], f"unexpected data after {count} rows")
    matrix = np.empty((count, width))
    for r, (number, line) in enumerate(body):
        fields = line.split()
        if len(fields) != width:
            raise SdpFormatError(number, f"expected {width} values, got {len(fields)}")
        try:
            matrix[r] = [float(v) for v in fields]
        except ValueError as e:
            raise SdpFormatError(number, str(e)) from e
    if kind == "gram":
        return VectorSolution(matrix)
    return VectorSolution.from_realization(matrix)


def import_solution(
    text: str,
    graph: Graph,
    tier: Tier,
    tol: float = 1e-9,
    *,
    sample_size: int = 1_000_000,
    seed: int = 0,
) -> tuple[VectorSolution, FeasibilityReport]:
    """Parse a solution file and audit it against ``tier``."""
    sol = parse_solution(text)
    report = check_tier(sol, graph, tier, tol, sample_size=sample_size, seed=seed)
    return sol, report
