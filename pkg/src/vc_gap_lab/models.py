"""Report, configuration and file models for vc-gap-lab."""

from enum import StrEnum
from typing import Any

from pydantic import BaseModel, Field, model_validator


class Tier(StrEnum):
    """Constraint tier of the vertex cover SDP relaxation."""

    STANDARD = "standard"
    TRIANGLE = "triangle"
    KARAKOSTAS = "karakostas"
    PENTAGONAL = "pentagonal"

    @classmethod
    def _missing_(cls, value: object) -> "Tier | None":
        if isinstance(value, str) and value.strip().lower() == "edge":
            return cls.STANDARD
        return None

    @classmethod
    def parse_list(cls, text: str) -> list["Tier"]:
        """Parse a comma separated tier list, keeping order and dropping repeats."""
        tiers: list[Tier] = []
        for part in text.split(","):
            part = part.strip().lower()
            if not part:
                continue
            tier = cls(part)
            if tier not in tiers:
                tiers.append(tier)
        return tiers


class LpMode(StrEnum):
    """Arithmetic used by the simplex solver."""

    FLOAT = "float"
    RATIONAL = "rational"


class LpStatus(StrEnum):
    """Outcome of a linear program solve."""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class OutputFormat(StrEnum):
    """Report serialization format."""

    JSON = "json"
    CSV = "csv"


class BoundKind(StrEnum):
    """Right-hand side used by the isoperimetric census."""

    GENERALIZED = "generalized"
    STANDARD = "standard"
    COROLLARY = "corollary"


class RunStatus(StrEnum):
    """Overall verdict of a CLI run."""

    PASSED = "passed"
    VIOLATIONS = "violations"
    ERROR = "error"


class EmbeddingMethod(StrEnum):
    """How an EmbeddingReport lower bound or exact value was obtained."""

    POINCARE_BOUND = "poincare-bound"
    CUT_CONE_LP = "cut-cone-lp"


# --- Input files ---


class GraphFile(BaseModel):
    """On-disk graph: vertex count plus a 0-indexed undirected edge list."""

    n: int = Field(ge=0, description="Number of vertices")
    edges: list[tuple[int, int]] = Field(default_factory=list, description="Undirected edges")
    labels: list[str] | None = Field(default=None, description="Optional vertex names")


class MetricFile(BaseModel):
    """On-disk finite metric; entries are numbers or exact 'p/q' strings."""

    labels: list[str] | None = Field(default=None, description="Point names")
    dist: list[list[int | float | str]] = Field(description="Symmetric distance matrix")

    @model_validator(mode="after")
    def check_square(self) -> "MetricFile":
        size = len(self.dist)
        if any(len(row) != size for row in self.dist):
            raise ValueError("distance matrix must be square")
        if self.labels is not None and len(self.labels) != size:
            raise ValueError("labels must match the matrix size")
        return self


# --- Charikar construction ---


class CharikarParamsModel(BaseModel):
    """Serialized Charikar parameters; exact values are 'p/q' strings."""

    t: int
    n: int
    lam: str = Field(description="lambda = 1 - 1/(2t)")
    gamma: str = Field(description="gamma = 1/(4t)")
    beta: str = Field(description="Exact beta")
    beta_float: float
    q_one: str
    q_min: str = Field(description="q(-lambda)")
    edge_dot: int = Field(description="Cube dot product of adjacent vertices")
    edge_distance: int = Field(description="Hamming distance of adjacent vertices")


class FeasibilityReport(BaseModel):
    """Worst constraint of one tier on a candidate solution.

    worst_violation is positive when a constraint is violated and equals minus
    the smallest slack otherwise.
    """

    tier: Tier
    feasible: bool
    worst_violation: float
    family: str = Field(description="Constraint family of the worst witness")
    violating_witness: list[int] = Field(default_factory=list)
    signs: list[int] | None = Field(default=None, description="Signs for extended-set triangles")
    witness_profile: list[int] | None = Field(default=None)
    constraints_checked: int = 0
    exhaustive: bool = True
    objective_vc: float
    objective_distance_form: float
    exact_edge_residual: str | None = Field(default=None)
    exact_worst_slack: str | None = Field(default=None)
    params: CharikarParamsModel | None = None


class PartitionModel(BaseModel):
    """A 2/3 split of five points."""

    S: list[int]
    T: list[int]


class PentagonalWitnessModel(BaseModel):
    """Worst pentagonal partition found by a census."""

    partition: PartitionModel
    lhs: float
    rhs: float
    slack: float
    profile: list[int] | None = None
    xi: int | None = None
    coincident: bool | None = None


class PentagonalReport(BaseModel):
    """Pentagonal census result for a metric or for the Charikar points."""

    feasible: bool
    min_slack: float
    witness: PentagonalWitnessModel | None
    enumerated: int
    sampled: int = 0
    exhaustive: bool = True
    apex_pair_min: float | None = None
    apex_triple_min: float | None = Field(
        default=None, description="Smallest apex-in-triple slack over pairwise distinct cube points"
    )
    sampled_min: float | None = None
    coincident_min: float | None = None
    distinct_min: float | None = None
    params: CharikarParamsModel | None = None


class ConvexityReport(BaseModel):
    """Randomized check that mixed u4 blocks never beat pure ones."""

    passed: bool
    trials: int
    worst_margin: float = Field(description="Smallest E(mixed) - min(E(pure+), E(pure-))")
    worst_step_margin: float = Field(description="Same margin against one-coordinate moves")


class EmbeddingReport(BaseModel):
    """Lower bound and (optionally) exact minimum l1 distortion of a metric."""

    points: int
    c1_lower: float = Field(ge=1.0)
    c1_exact: float | None = None
    c1_exact_rational: str | None = None
    method: EmbeddingMethod
    certificate: list["CutModel"] | None = None
    violated_inequality: PentagonalWitnessModel | None = None
    lp_pivots: int | None = None


class CutModel(BaseModel):
    """One weighted cut; mask is a hex bitmask over point indices."""

    mask: str
    weight: str


class ExplicitEmbeddingReport(BaseModel):
    """Explicit l1 image of the Charikar vectors."""

    t: int
    n: int
    mode: str = Field(description="materialized or closed-form")
    norm_l1: float
    expected_norm: float
    min_ratio: float
    max_ratio: float
    distortion: float
    isometric_on_cube: bool
    points: int


class GapReport(BaseModel):
    """Objective and asymptotic gap of a Charikar instance."""

    params: CharikarParamsModel
    vertices: int
    objective: str
    objective_float: float
    vc: str = "not computed"
    fr_bound: str = "2^n - (2-delta)^n (delta not evaluated)"
    asymptotic_gap: str
    asymptotic_gap_float: float
    adjacency_note: str


# --- Isoperimetry ---


class IsoperimetryRecord(BaseModel):
    """Census row for one subset of the cube."""

    n: int
    set_bits_hex: str
    size: int
    boundary: int
    p: int
    antipodal_pairs: int
    bound: float
    slack: float


class IsoperimetryReport(BaseModel):
    """Violations found by an isoperimetric census."""

    n: int
    bound: BoundKind
    symmetric: bool
    restrict_small: bool
    checked: int
    violations: list[IsoperimetryRecord]


class PoincareRecord(BaseModel):
    """Both sides of the cube-plus-point Poincare inequality for one set."""

    n: int
    set_bits_hex: str
    size: int
    boundary: int
    lhs: float
    rhs: float
    slack: float


class PoincareReport(BaseModel):
    """Symmetric-set Poincare census."""

    n: int
    checked: int
    violations: list[PoincareRecord]
    equality_cases: list[PoincareRecord]


class LemmaReport(BaseModel):
    """Grid plus golden-section scan of the calculus lemma function."""

    alpha: float
    grid: int
    coarse_argmin: float
    argmin: float
    minval: float
    expected_minval: float
    f_at_one: float
    derivative_at_three: float


# --- Metrics ---


class TensorReport(BaseModel):
    """Identities of the tensor metric on the cube plus the origin."""

    n: int
    merged: bool
    points: int
    origin_distance_ok: bool
    edge_distance: int
    edge_distance_ok: bool
    ordered_pair_sum: int
    ordered_pair_sum_expected: int
    triangle_min_slack: float
    negative_type: bool
    distortion_lower_bound: float
    embedding: EmbeddingReport | None = None


class VertexCoverReport(BaseModel):
    """Exact minimum vertex cover of a small graph."""

    order: int
    edges: int
    vc: int
    cover: list[int]


class SdpExportReport(BaseModel):
    """Summary of a written SDPA instance."""

    tier: Tier
    rows: int
    block_size: int
    path: str


# --- Run envelope ---


class RunConfig(BaseModel):
    """Effective configuration of one CLI invocation."""

    command: str = ""
    tolerance: float = Field(default=1e-9, gt=0)
    seed: int = 0
    shard_index: int = Field(default=0, ge=0)
    shard_count: int = Field(default=1, ge=1)
    workers: int = Field(default=1, ge=1)
    output_format: OutputFormat = OutputFormat.JSON
    output: str | None = None
    timestamp: bool = True
    sample_size: int = Field(default=1_000_000, ge=0)

    @model_validator(mode="after")
    def check_shard(self) -> "RunConfig":
        if self.shard_index >= self.shard_count:
            raise ValueError("shard_index must be smaller than shard_count")
        return self


class RunReport(BaseModel):
    """Envelope written by every CLI command."""

    tool: str = "vc-gap-lab"
    version: str
    command: str
    status: RunStatus
    reason: str | None = None
    config: RunConfig
    generated_at: str | None = None
    payload: dict[str, Any] = Field(default_factory=dict)


EmbeddingReport.model_rebuild()
