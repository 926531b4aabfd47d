"""CLI interface for vc-gap-lab."""

import contextlib
import functools
import logging
from collections.abc import Iterator, Sequence
from pathlib import Path
from typing import Annotated, Any

import typer
from pydantic import BaseModel, ValidationError
from rich import print as rprint
from rich.console import Console
from rich.table import Table

from vc_gap_lab.charikar import (
    CharikarParams,
    explicit_embedding,
    gap_report,
    verify_construction,
)
from vc_gap_lab.errors import LabError
from vc_gap_lab.graph import load_graph, min_vertex_cover
from vc_gap_lab.isoperimetry import (
    calculus_lemma_scan,
    census_generalized,
    merge_isoperimetry,
    merge_poincare,
    poincare_census,
)
from vc_gap_lab.metrics import (
    load_metric,
    min_distortion_l1,
    poincare_lower_bound_report,
    tensor_report,
)
from vc_gap_lab.models import (
    BoundKind,
    IsoperimetryReport,
    LpMode,
    OutputFormat,
    PentagonalReport,
    PoincareReport,
    RunConfig,
    RunStatus,
    SdpExportReport,
    Tier,
    VertexCoverReport,
)
from vc_gap_lab.pentagon import (
    convexity_reduction_check,
    merge_pentagonal,
    pentagonal_census,
    verify_pentagonal_charikar,
)
from vc_gap_lab.relaxations import merge_feasibility
from vc_gap_lab.reporting import (
    ISOPERIMETRY_COLUMNS,
    POINCARE_COLUMNS,
    build_report,
    render_report,
    write_output,
)
from vc_gap_lab.sdp_io import export_sdpa, import_solution, row_count
from vc_gap_lab.sharding import ShardSpec, run_sharded
from vc_gap_lab.user_config import (
    effective_defaults,
    get_config_path,
    get_default_config_template,
    load_user_config,
    save_user_config,
)

app = typer.Typer(
    name="vc-gap-lab",
    help="Verify vertex cover SDP integrality gap constructions at desk scale.",
    no_args_is_help=True,
)


def _sub_app(name: str, help_text: str) -> typer.Typer:
    sub = typer.Typer(name=name, help=help_text, no_args_is_help=True)
    app.add_typer(sub, name=name)
    return sub


charikar_app = _sub_app("charikar", "Charikar's gap solution on the Hamming instance.")
pentagonal_app = _sub_app("pentagonal", "Pentagonal inequality censuses.")
isoperimetry_app = _sub_app("isoperimetry", "Edge isoperimetry of hypercube subsets.")
poincare_app = _sub_app("poincare", "Poincare inequality on the cube plus a point.")
lemma_app = _sub_app("lemma", "The calculus lemma behind the Poincare constant.")
tensor_app = _sub_app("tensor", "The tensor metric on the cube plus the origin.")
embed_app = _sub_app("embed", "l1 distortion of finite metrics.")
graph_app = _sub_app("graph", "Exact computations on small graphs.")
sdp_app = _sub_app("sdp", "SDPA export and solution validation.")
config_app = _sub_app("config", "Manage user-level default settings.")

console = Console()

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(levelname)s: %(message)s",
)
logger = logging.getLogger(__name__)

ALL_TIERS = "standard,triangle,karakostas,pentagonal"


@app.callback()
def main_callback(
    ctx: typer.Context,
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging")] = False,
    tolerance: Annotated[
        float | None, typer.Option("--tolerance", help="Absolute constraint tolerance")
    ] = None,
    seed: Annotated[int | None, typer.Option("--seed", help="Seed for sampled censuses")] = None,
    shard: Annotated[
        str | None, typer.Option("--shard", help="Run only shard i of k, written 'i/k'")
    ] = None,
    workers: Annotated[
        int | None, typer.Option("--workers", "-j", help="Local worker processes")
    ] = None,
    output_format: Annotated[
        OutputFormat | None, typer.Option("--format", "-f", help="Report format")
    ] = None,
    output: Annotated[
        Path | None, typer.Option("--output", "-o", help="Write the report to a file")
    ] = None,
    timestamp: Annotated[
        bool, typer.Option("--timestamp/--no-timestamp", help="Include generated_at")
    ] = True,
    sample_size: Annotated[
        int | None, typer.Option("--sample-size", help="Pentagonal sample size")
    ] = None,
) -> None:
    """Global options shared by every command."""
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    defaults = effective_defaults()
    try:
        spec = ShardSpec.parse(shard) if shard else ShardSpec()
        ctx.obj = RunConfig(
            tolerance=tolerance if tolerance is not None else defaults["tolerance"],
            seed=seed if seed is not None else defaults["seed"],
            shard_index=spec.index,
            shard_count=spec.count,
            workers=workers if workers is not None else defaults["workers"],
            output_format=output_format or OutputFormat(defaults["output_format"]),
            output=str(output) if output is not None else None,
            timestamp=timestamp,
            sample_size=(
                sample_size if sample_size is not None else defaults["pentagonal_sample_size"]
            ),
        )
    except (LabError, ValidationError) as e:
        rprint(f"[red]Invalid options:[/red] {e}")
        raise typer.Exit(2) from None


# --- Shared plumbing ---


def _config(ctx: typer.Context, command: str) -> RunConfig:
    base = ctx.obj if isinstance(ctx.obj, RunConfig) else RunConfig()
    return base.model_copy(update={"command": command})


def _emit(
    config: RunConfig,
    status: RunStatus,
    payload: BaseModel | dict[str, Any] | None = None,
    *,
    reason: str | None = None,
    records: Sequence[BaseModel] | None = None,
    columns: Sequence[str] | None = None,
) -> None:
    """Write the report and exit with the status code."""
    report = build_report(config, status, payload, reason)
    text = render_report(report, config.output_format, records, columns)
    write_output(text, Path(config.output) if config.output else None)
    if status is RunStatus.VIOLATIONS:
        raise typer.Exit(1)
    if status is RunStatus.ERROR:
        raise typer.Exit(2)


@contextlib.contextmanager
def _reported(config: RunConfig) -> Iterator[None]:
    """Turn library errors into an error report with exit code 2."""
    try:
        yield
    except LabError as e:
        logger.error(f"{config.command}: {e}")
        _emit(config, RunStatus.ERROR, reason=str(e))


def _verdict(ok: bool) -> RunStatus:
    return RunStatus.PASSED if ok else RunStatus.VIOLATIONS


def _shards(config: RunConfig) -> tuple[list[int], int]:
    """Shard indices this process runs locally, and the shard count."""
    if config.shard_count > 1:
        return [config.shard_index], config.shard_count
    return list(range(config.workers)), config.workers


def _sharded(config: RunConfig, func: Any) -> list[Any]:
    indices, count = _shards(config)
    if len(indices) == 1:
        return [func(indices[0], count)]
    return run_sharded(func, count, config.workers)


def _parse_tiers(text: str) -> list[Tier]:
    try:
        tiers = Tier.parse_list(text)
    except ValueError:
        raise LabError(f"unknown tier in {text!r}; use {ALL_TIERS} (or edge)") from None
    if not tiers:
        raise LabError("no tiers given")
    return tiers


# --- Shard workers (top level so that process pools can pickle them) ---


def _charikar_shard(
    t: int, n: int, tiers: list[Tier], tol: float, samples: int, seed: int, index: int, count: int
) -> list[Any]:
    return verify_construction(
        CharikarParams(t, n),
        tiers,
        tol,
        sample_size=samples if index == 0 else 0,
        seed=seed,
        shard_index=index,
        shard_count=count,
    )


def _pentagonal_shard(
    t: int, n: int, tol: float, samples: int, seed: int, index: int, count: int
) -> PentagonalReport:
    return verify_pentagonal_charikar(
        CharikarParams(t, n),
        tol,
        sample_size=samples,
        seed=seed,
        shard_index=index,
        shard_count=count,
    )


def _isoperimetry_shard(
    n: int, restrict_small: bool, symmetric: bool, kind: BoundKind, index: int, count: int
) -> IsoperimetryReport:
    return census_generalized(
        n, restrict_small, symmetric=symmetric, kind=kind, shard_index=index, shard_count=count
    )


def _poincare_shard(n: int, index: int, count: int) -> PoincareReport:
    return poincare_census(n, shard_index=index, shard_count=count)


# --- charikar ---


@charikar_app.command("verify")
def charikar_verify_cmd(
    ctx: typer.Context,
    t: Annotated[int, typer.Option("--t", help="Polynomial degree parameter t")],
    n: Annotated[int, typer.Option("--n", help="Cube dimension (4t must divide n)")],
    tiers: Annotated[str, typer.Option("--tiers", help="Comma separated tiers")] = ALL_TIERS,
) -> None:
    """Check the Charikar solution against each relaxation tier."""
    config = _config(ctx, "charikar verify")
    with _reported(config):
        tier_list = _parse_tiers(tiers)
        worker = functools.partial(
            _charikar_shard, t, n, tier_list, config.tolerance, config.sample_size, config.seed
        )
        shard_results = _sharded(config, worker)
        reports = [
            merge_feasibility([shard[i] for shard in shard_results])
            for i in range(len(tier_list))
        ]
        payload = {"reports": [r.model_dump(mode="json") for r in reports]}
        _emit(config, _verdict(all(r.feasible for r in reports)), payload)


@charikar_app.command("embed")
def charikar_embed_cmd(
    ctx: typer.Context,
    t: Annotated[int, typer.Option("--t", help="Polynomial degree parameter t")],
    n: Annotated[int, typer.Option("--n", help="Cube dimension (4t must divide n)")],
    closed_form: Annotated[
        bool, typer.Option("--closed-form", help="Never materialize tensor coordinates")
    ] = False,
) -> None:
    """Explicit l1 embedding of the Charikar vectors and its distortion."""
    config = _config(ctx, "charikar embed")
    with _reported(config):
        report = explicit_embedding(CharikarParams(t, n), False if closed_form else None)
        ok = report.isometric_on_cube and abs(report.norm_l1 - report.expected_norm) <= 1e-9
        _emit(config, _verdict(ok), report)


@charikar_app.command("gap")
def charikar_gap_cmd(
    ctx: typer.Context,
    t: Annotated[int, typer.Option("--t", help="Polynomial degree parameter t")],
    n: Annotated[int, typer.Option("--n", help="Cube dimension (4t must divide n)")],
) -> None:
    """Objective value and asymptotic gap of the construction."""
    config = _config(ctx, "charikar gap")
    with _reported(config):
        _emit(config, RunStatus.PASSED, gap_report(CharikarParams(t, n)))


# --- pentagonal ---


def _parse_pair(text: str) -> tuple[int, int]:
    try:
        t, n = (int(part) for part in text.split(","))
    except ValueError:
        raise LabError(f"--charikar expects 'T,N', got {text!r}") from None
    return t, n


@pentagonal_app.command("census")
def pentagonal_census_cmd(
    ctx: typer.Context,
    metric: Annotated[
        Path | None, typer.Option("--metric", help="Metric JSON file", exists=True)
    ] = None,
    charikar: Annotated[
        str | None, typer.Option("--charikar", help="Charikar parameters 'T,N'")
    ] = None,
) -> None:
    """Smallest pentagonal slack of a metric file or of the Charikar points."""
    config = _config(ctx, "pentagonal census")
    with _reported(config):
        if (metric is None) == (charikar is None):
            raise LabError("give exactly one of --metric and --charikar")
        if metric is not None:
            census = pentagonal_census(
                load_metric(metric), sample_size=config.sample_size, seed=config.seed
            )
            report = census.to_report(config.tolerance)
        else:
            t, n = _parse_pair(charikar or "")
            worker = functools.partial(
                _pentagonal_shard, t, n, config.tolerance, config.sample_size, config.seed
            )
            report = merge_pentagonal(_sharded(config, worker))
        _emit(config, _verdict(report.feasible), report)


@pentagonal_app.command("convexity")
def pentagonal_convexity_cmd(
    ctx: typer.Context,
    t: Annotated[int, typer.Option("--t", help="Polynomial degree parameter t")],
    n: Annotated[int, typer.Option("--n", help="Cube dimension (4t must divide n)")],
    trials: Annotated[int, typer.Option("--trials", help="Random configurations")] = 10_000,
) -> None:
    """Randomized check that mixed u4 blocks never minimize E."""
    config = _config(ctx, "pentagonal convexity")
    with _reported(config):
        report = convexity_reduction_check(CharikarParams(t, n), trials, config.seed)
        _emit(config, _verdict(report.passed), report)


# --- isoperimetry / poincare / lemma ---


@isoperimetry_app.command("census")
def isoperimetry_census_cmd(
    ctx: typer.Context,
    n: Annotated[int, typer.Option("--n", help="Cube dimension")],
    symmetric: Annotated[
        bool, typer.Option("--symmetric", help="Only antipodally closed sets")
    ] = False,
    restrict_small: Annotated[
        bool, typer.Option("--restrict-small", help="Only sets of at most half the cube")
    ] = False,
    bound: Annotated[
        BoundKind, typer.Option("--bound", help="Right-hand side to test")
    ] = BoundKind.GENERALIZED,
) -> None:
    """List every subset violating the isoperimetric bound."""
    config = _config(ctx, "isoperimetry census")
    with _reported(config):
        worker = functools.partial(_isoperimetry_shard, n, restrict_small, symmetric, bound)
        report = merge_isoperimetry(_sharded(config, worker))
        _emit(
            config,
            _verdict(not report.violations),
            report,
            records=report.violations,
            columns=ISOPERIMETRY_COLUMNS,
        )


@poincare_app.command("census")
def poincare_census_cmd(
    ctx: typer.Context,
    n: Annotated[int, typer.Option("--n", help="Cube dimension")],
) -> None:
    """Check the Poincare inequality on every symmetric set."""
    config = _config(ctx, "poincare census")
    with _reported(config):
        report = merge_poincare(_sharded(config, functools.partial(_poincare_shard, n)))
        _emit(
            config,
            _verdict(not report.violations),
            report,
            records=[*report.violations, *report.equality_cases],
            columns=POINCARE_COLUMNS,
        )


@lemma_app.command("scan")
def lemma_scan_cmd(
    ctx: typer.Context,
    grid: Annotated[int, typer.Option("--grid", help="Coarse grid points on [1, 64]")] = 1000,
) -> None:
    """Locate the minimum of the lemma function."""
    config = _config(ctx, "lemma scan")
    with _reported(config):
        report = calculus_lemma_scan(grid)
        ok = abs(report.argmin - 3) <= 1e-6 and abs(report.minval - report.expected_minval) <= 1e-9
        _emit(config, _verdict(ok), report)


# --- metrics ---


@tensor_app.command("analyze")
def tensor_analyze_cmd(
    ctx: typer.Context,
    n: Annotated[int, typer.Option("--n", help="Cube dimension")],
    exact_c1: Annotated[
        bool, typer.Option("--exact-c1", help="Solve the cut-cone LP for c1")
    ] = False,
    unmerged: Annotated[
        bool, typer.Option("--unmerged", help="Keep u and -u as separate points")
    ] = False,
    rational: Annotated[bool, typer.Option("--rational", help="Exact LP arithmetic")] = False,
) -> None:
    """Check the tensor metric identities."""
    config = _config(ctx, "tensor analyze")
    with _reported(config):
        mode = LpMode.RATIONAL if rational else LpMode.FLOAT
        report = tensor_report(n, not unmerged, exact_c1, mode)
        ok = (
            report.origin_distance_ok
            and report.edge_distance_ok
            and report.ordered_pair_sum == report.ordered_pair_sum_expected
            and report.triangle_min_slack >= -config.tolerance
            and report.negative_type
        )
        _emit(config, _verdict(ok), report)


@embed_app.command("c1")
def embed_c1_cmd(
    ctx: typer.Context,
    metric: Annotated[Path, typer.Option("--metric", help="Metric JSON file", exists=True)],
    exact: Annotated[bool, typer.Option("--exact", help="Solve the cut-cone LP")] = False,
    rational: Annotated[bool, typer.Option("--rational", help="Exact LP arithmetic")] = False,
) -> None:
    """Lower bound, or exact value, of the l1 distortion of a metric."""
    config = _config(ctx, "embed c1")
    with _reported(config):
        finite = load_metric(metric)
        if exact:
            report = min_distortion_l1(finite, LpMode.RATIONAL if rational else LpMode.FLOAT)
        else:
            report = poincare_lower_bound_report(finite)
        _emit(config, RunStatus.PASSED, report)


# --- graph / sdp ---


@graph_app.command("vc")
def graph_vc_cmd(
    ctx: typer.Context,
    input_file: Annotated[Path, typer.Option("--input", help="Graph JSON file", exists=True)],
) -> None:
    """Exact minimum vertex cover."""
    config = _config(ctx, "graph vc")
    with _reported(config):
        graph = load_graph(input_file)
        size, cover = min_vertex_cover(graph)
        report = VertexCoverReport(
            order=graph.order,
            edges=graph.edge_count,
            vc=size,
            cover=[v for v in range(graph.order) if (cover >> v) & 1],
        )
        _emit(config, RunStatus.PASSED, report)


@sdp_app.command("export")
def sdp_export_cmd(
    ctx: typer.Context,
    graph_file: Annotated[Path, typer.Option("--graph", help="Graph JSON file", exists=True)],
    tier: Annotated[Tier, typer.Option("--tier", help="Relaxation tier")],
    out: Annotated[Path, typer.Option("--out", help="SDPA file to write")],
) -> None:
    """Write a relaxation tier as an SDPA sparse file."""
    config = _config(ctx, "sdp export")
    with _reported(config):
        graph = load_graph(graph_file)
        text = export_sdpa(graph, tier)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        report = SdpExportReport(
            tier=tier, rows=row_count(graph, tier), block_size=graph.order + 1, path=str(out)
        )
        _emit(config, RunStatus.PASSED, report)


@sdp_app.command("validate")
def sdp_validate_cmd(
    ctx: typer.Context,
    graph_file: Annotated[Path, typer.Option("--graph", help="Graph JSON file", exists=True)],
    tier: Annotated[Tier, typer.Option("--tier", help="Relaxation tier")],
    solution: Annotated[
        Path, typer.Option("--solution", help="Solution matrix file", exists=True)
    ],
) -> None:
    """Audit an external solution against a relaxation tier."""
    config = _config(ctx, "sdp validate")
    with _reported(config):
        graph = load_graph(graph_file)
        _, report = import_solution(
            solution.read_text(),
            graph,
            tier,
            config.tolerance,
            sample_size=config.sample_size,
            seed=config.seed,
        )
        _emit(config, _verdict(report.feasible), report)


# --- config ---


@config_app.command("show")
def config_show_cmd() -> None:
    """Show the effective defaults and where they come from."""
    config_path = get_config_path()
    user_cfg = load_user_config()
    effective = effective_defaults()

    rprint(f"[cyan]Config file:[/cyan] {config_path}")
    if not user_cfg:
        rprint("[dim]No user config found; run 'vc-gap-lab config init' to create one.[/dim]")
    table = Table(title="Run Defaults")
    table.add_column("Setting", style="cyan")
    table.add_column("Value")
    table.add_column("Source", style="dim")

    builtin = get_default_config_template()
    for key, value in effective.items():
        if key in user_cfg and user_cfg[key] == value:
            source = "config file"
        elif value != builtin.get(key):
            source = "environment"
        else:
            source = "default"
        table.add_row(key, str(value), source)

    console.print(table)


@config_app.command("init")
def config_init_cmd(
    force: Annotated[bool, typer.Option("--force", help="Overwrite existing config")] = False,
) -> None:
    """Create a user configuration file holding the built-in defaults."""
    config_path = get_config_path()

    if config_path.exists() and not force:
        rprint(f"[yellow]Config already exists at {config_path}[/yellow]")
        rprint("[dim]Use --force to overwrite.[/dim]")
        raise typer.Exit(1)

    saved_path = save_user_config(get_default_config_template())
    rprint(f"[green]Created default config at {saved_path}[/green]")


def main() -> None:
    """Main entry point."""
    app()


if __name__ == "__main__":
    main()
