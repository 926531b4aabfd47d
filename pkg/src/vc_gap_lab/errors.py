"""Exception hierarchy shared by every vc-gap-lab module."""

from dataclasses import dataclass


class LabError(Exception):
    """Base class for all errors raised by vc-gap-lab."""


class CubeError(LabError):
    """Invalid hypercube point, set or tuple."""


class EnumerationBudgetError(LabError):
    """Requested exhaustive enumeration is beyond the supported size."""


class GraphError(LabError):
    """Malformed graph, graph file or Hamming instance parameters."""


class RelaxationError(LabError):
    """Candidate SDP solution is malformed or does not match the graph."""


class CharikarError(LabError):
    """Invalid parameters for the Charikar gap construction."""


class LpError(LabError):
    """Malformed linear program or simplex breakdown."""


class MetricError(LabError):
    """Malformed finite metric, cut measure or embedding input."""


class IsoperimetryError(LabError):
    """Set does not satisfy the hypothesis of an isoperimetric check."""


@dataclass(frozen=True)
class SdpFormatError(LabError):
    """Error raised when an SDPA instance or solution file cannot be parsed."""

    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"
