"""CLI interface using Typer with Rich formatting."""

import csv
import io
import json
import math
import time
from collections import Counter
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

import click
import typer
from pydantic import ValidationError
from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from treesieve import __version__
from treesieve.config import configure_logging, get_settings
from treesieve.detect import detect_tree, hamiltonicity, kist, kpath, schedule_params, trial_rng
from treesieve.errors import TreeSieveError
from treesieve.formats import (
    read_coloring,
    read_fractional,
    read_graph,
    read_partition,
    read_vectors,
    serialize_graph,
    write_graph,
)
from treesieve.graph import Graph
from treesieve.models import (
    DEFAULT_ALPHA,
    DEFAULT_EPSILON,
    DEFAULT_SAMPLER_P,
    DetectionPlan,
    GraphStats,
    PlanSummary,
    RunReport,
    Strategy,
    Verdict,
)
from treesieve.oracle import label_count_samples, random_subtree
from treesieve.preprocess import eliminate_triangles, kpath_subcubic

app = typer.Typer(help="Algebraic sieving for trees, paths and internal spanning trees")
console = Console()
err_console = Console(stderr=True)

EXIT_YES = 0
EXIT_NO = 1
EXIT_USAGE = 2

GRAPH_SUFFIXES = {".txt", ".edges", ".dimacs"}


def fail(message: str) -> None:
    """Print an error and exit with the usage-error code."""
    err_console.print(f"[red]ERROR[/red] {message}")
    raise typer.Exit(code=EXIT_USAGE)


@contextmanager
def reported_errors():
    """Turn library and input errors into exit code 2."""
    try:
        yield
    except ValidationError as exc:
        first = exc.errors()[0]
        fail(f"{first['msg']}")
    except (TreeSieveError, ValueError, OSError) as exc:
        fail(str(exc))


@contextmanager
def timed(timings: dict[str, float], phase: str):
    start = time.perf_counter()
    yield
    timings[phase] = round(time.perf_counter() - start, 6)


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress to stderr")):
    """Decide tree, path and spanning-tree questions by algebraic sieving."""
    configure_logging("DEBUG" if verbose else get_settings().log_level)


def _plain(value) -> str:
    return str(value.value if isinstance(value, Enum) else value)


def command_echo() -> list[str]:
    """Subcommand name and its resolved options, sorted by option name."""
    ctx = click.get_current_context()
    flags = {p.name: p.opts[0] for p in ctx.command.params}
    echo = [ctx.info_name or ""]
    for name, value in sorted(ctx.params.items()):
        flag = flags.get(name, f"--{name}")
        if value is None or value is False:
            continue
        if value is True:
            echo.append(flag)
        elif isinstance(value, (list, tuple)):
            echo.append(f"{flag}={','.join(_plain(v) for v in value)}")
        else:
            echo.append(f"{flag}={_plain(value)}")
    return echo


def display_verdict(report: RunReport, title: str) -> None:
    """Display a verdict panel with the plan underneath."""
    verdict = report.verdict
    color = "green" if verdict.yes else "yellow"
    panel = Panel(
        f"[bold]Answer:[/bold] [{color}]{verdict.answer.value}[/{color}]\n"
        f"[bold]Trials run:[/bold] {verdict.trials_run}\n"
        f"[bold]First hit:[/bold] {'-' if verdict.first_hit_trial is None else verdict.first_hit_trial}\n"
        f"[bold]Label budget r:[/bold] {verdict.r_used}",
        title=title,
        border_style="cyan",
        box=box.ROUNDED,
    )
    console.print(panel)

    table = Table(title="Plan", box=box.ROUNDED, show_header=True, header_style="bold magenta")
    table.add_column("Parameter", style="cyan")
    table.add_column("Value", style="white")
    table.add_row("graph", f"n={report.graph.n} m={report.graph.m} max degree={report.graph.max_degree}")
    for name, value in report.plan.model_dump().items():
        if value is not None:
            table.add_row(name, _plain(value))
    for name, value in verdict.strategy_detail.items():
        table.add_row(name, str(value))
    console.print(table)


def finish(report: RunReport, as_json: bool, title: str) -> None:
    if as_json:
        typer.echo(report.to_json())
    else:
        display_verdict(report, title)
    raise typer.Exit(code=EXIT_YES if report.verdict.yes else EXIT_NO)


def build_report(g: Graph, plan: DetectionPlan, verdict: Verdict, timings: dict[str, float], **summary) -> RunReport:
    fields = {
        "k": plan.k, "l": plan.l, "epsilon": plan.epsilon, "strategy": plan.strategy,
        "seed": plan.seed, "trials": verdict.trials_run, "r": verdict.r_used or None,
    }
    fields.update(summary)
    return RunReport(
        command=command_echo(),
        graph=GraphStats(n=g.n, m=g.m, max_degree=g.max_degree),
        plan=PlanSummary(**fields),
        verdict=verdict,
        timings=timings,
    )


def make_plan(**fields) -> DetectionPlan:
    settings = get_settings()
    if fields.get("seed") is None:
        fields["seed"] = settings.seed
    if fields.get("workers") is None:
        fields["workers"] = settings.workers
    fields.setdefault("color_subset_cap", settings.color_subset_cap)
    return DetectionPlan(**fields)


def strategy_inputs(
    strategy: Strategy,
    coloring: Optional[Path],
    fractional: Optional[Path],
    vectors: Optional[Path],
    partition: Optional[Path],
) -> dict:
    inputs = {}
    if coloring is not None:
        inputs["coloring"] = read_coloring(coloring)
    if fractional is not None:
        inputs["fractional"] = read_fractional(fractional)
    if vectors is not None:
        inputs["vectors"] = read_vectors(vectors)
    if partition is not None:
        inputs["partition"] = read_partition(partition)
    if strategy is Strategy.VECTOR and vectors is None:
        fail("--strategy vector requires --vectors")
    if strategy is Strategy.BIPARTITION and partition is None:
        fail("--strategy bipartition requires --partition")
    return inputs


GRAPH_OPTION = typer.Option(..., "--graph", help="Edge list or DIMACS graph file")
STRATEGY_OPTION = typer.Option(Strategy.RANDOM, "--strategy", help="Bipartition strategy")
COLORING_OPTION = typer.Option(None, "--coloring", help="Proper coloring file (color strategy)")
FRACTIONAL_OPTION = typer.Option(None, "--fractional", help="Fractional coloring file; omit for the sampler")
VECTORS_OPTION = typer.Option(None, "--vectors", help="Vector coloring file (vector strategy)")
PARTITION_OPTION = typer.Option(None, "--partition", help="Fixed bipartition file")
EPSILON_OPTION = typer.Option(DEFAULT_EPSILON, "--epsilon", help="Schedule slack in [0, 1/4)")
TRIALS_OPTION = typer.Option(None, "--trials", help="Override the trial count")
R_OPTION = typer.Option(None, "--r", help="Override the label budget")
BOOST_OPTION = typer.Option(1, "--boost", help="Multiply the trial count")
SEED_OPTION = typer.Option(None, "--seed", help="Root seed (default from TREESIEVE_SEED)")
THREADS_OPTION = typer.Option(None, "--threads", help="Worker processes (default from TREESIEVE_WORKERS)")
SAMPLER_P_OPTION = typer.Option(DEFAULT_SAMPLER_P, "--sampler-p", help="Inclusion bound of the independent-set sampler")
FRACTIONAL_T_OPTION = typer.Option(1, "--fractional-t", help="Color subset size for fractional colorings")
JSON_OPTION = typer.Option(False, "--json", help="Print the run report as JSON")


def run_detection(
    graph: Path,
    k: int,
    l: int,
    strategy: Strategy,
    run: Callable[[Graph, DetectionPlan, dict], Verdict],
    title: str,
    as_json: bool,
    inputs: Callable[[], dict] = dict,
    scheduled: bool = True,
    **plan_fields,
) -> None:
    timings: dict[str, float] = {}
    with reported_errors():
        with timed(timings, "load"):
            g = read_graph(graph)
            extra = inputs()
        if k is None:
            k = max(g.n, 1)
        plan = make_plan(k=k if scheduled else max(k, 1), l=l, strategy=strategy, **plan_fields)
        with timed(timings, "detect"):
            verdict = run(g, plan, extra)
        schedule = schedule_params(plan.k, plan.l, plan.epsilon) if scheduled and plan.k >= 3 else None
        report = build_report(g, plan, verdict, timings, k=k, t=schedule.t if schedule else None)
    finish(report, as_json, title)


@app.command()
def detect(
    graph: Path = GRAPH_OPTION,
    k: int = typer.Option(..., "--k", help="Tree vertex count"),
    l: int = typer.Option(..., "--l", help="Leaf count"),
    strategy: Strategy = STRATEGY_OPTION,
    coloring: Optional[Path] = COLORING_OPTION,
    fractional: Optional[Path] = FRACTIONAL_OPTION,
    vectors: Optional[Path] = VECTORS_OPTION,
    partition: Optional[Path] = PARTITION_OPTION,
    epsilon: float = EPSILON_OPTION,
    trials: Optional[int] = TRIALS_OPTION,
    r: Optional[int] = R_OPTION,
    boost: int = BOOST_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    sampler_p: float = SAMPLER_P_OPTION,
    fractional_t: int = FRACTIONAL_T_OPTION,
    as_json: bool = JSON_OPTION,
):
    """Decide whether the graph has a k-vertex subtree with exactly l leaves."""
    run_detection(
        graph, k, l, strategy,
        run=lambda g, plan, extra: detect_tree(g, plan, **extra),
        title=f"({k},{l})-tree",
        as_json=as_json,
        inputs=lambda: strategy_inputs(strategy, coloring, fractional, vectors, partition),
        epsilon=epsilon, trials=trials, r_override=r, confidence_boost=boost, seed=seed,
        workers=threads, sampler_p=sampler_p, fractional_t=fractional_t,
    )


@app.command(name="kpath")
def kpath_command(
    graph: Path = GRAPH_OPTION,
    k: int = typer.Option(..., "--k", min=1, help="Path vertex count"),
    strategy: Strategy = STRATEGY_OPTION,
    coloring: Optional[Path] = COLORING_OPTION,
    fractional: Optional[Path] = FRACTIONAL_OPTION,
    vectors: Optional[Path] = VECTORS_OPTION,
    partition: Optional[Path] = PARTITION_OPTION,
    subcubic: bool = typer.Option(False, "--subcubic", help="Eliminate triangles and use the weighted sieve"),
    epsilon: float = EPSILON_OPTION,
    trials: Optional[int] = TRIALS_OPTION,
    r: Optional[int] = R_OPTION,
    boost: int = BOOST_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    sampler_p: float = SAMPLER_P_OPTION,
    as_json: bool = JSON_OPTION,
):
    """Decide whether the graph has a simple path on k vertices."""
    if subcubic:
        def run(g, plan, extra):
            return kpath_subcubic(g, k, plan)
    else:
        def run(g, plan, extra):
            return kpath(g, k, plan, **extra)

    run_detection(
        graph, k, 2, strategy, run=run, title=f"{k}-path", as_json=as_json,
        inputs=lambda: strategy_inputs(strategy, coloring, fractional, vectors, partition),
        epsilon=epsilon, trials=trials, r_override=r, confidence_boost=boost, seed=seed,
        workers=threads, sampler_p=sampler_p,
    )


@app.command()
def ham(
    graph: Path = GRAPH_OPTION,
    strategy: Strategy = STRATEGY_OPTION,
    coloring: Optional[Path] = COLORING_OPTION,
    fractional: Optional[Path] = FRACTIONAL_OPTION,
    vectors: Optional[Path] = VECTORS_OPTION,
    partition: Optional[Path] = PARTITION_OPTION,
    epsilon: float = EPSILON_OPTION,
    trials: Optional[int] = TRIALS_OPTION,
    r: Optional[int] = R_OPTION,
    boost: int = BOOST_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    sampler_p: float = SAMPLER_P_OPTION,
    as_json: bool = JSON_OPTION,
):
    """Decide whether the graph has a Hamiltonian path."""
    run_detection(
        graph, None, 2, strategy,
        run=lambda g, plan, extra: hamiltonicity(g, plan, **extra),
        title="Hamiltonian path", as_json=as_json,
        inputs=lambda: strategy_inputs(strategy, coloring, fractional, vectors, partition),
        epsilon=epsilon, trials=trials, r_override=r, confidence_boost=boost, seed=seed,
        workers=threads, sampler_p=sampler_p,
    )


@app.command(name="kist")
def kist_command(
    graph: Path = GRAPH_OPTION,
    k: int = typer.Option(..., "--k", min=0, help="Required internal vertices"),
    alpha: float = typer.Option(DEFAULT_ALPHA, "--alpha", help="Leaf ratio where the split strategy takes over"),
    epsilon: float = EPSILON_OPTION,
    trials: Optional[int] = TRIALS_OPTION,
    boost: int = BOOST_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    as_json: bool = JSON_OPTION,
):
    """Decide whether the graph has a spanning tree with at least k internal vertices."""
    run_detection(
        graph, k, 2, Strategy.RANDOM,
        run=lambda g, plan, extra: kist(g, k, plan, alpha=alpha),
        title=f"{k}-internal spanning tree", as_json=as_json,
        scheduled=False,
        epsilon=epsilon, trials=trials, confidence_boost=boost, seed=seed, workers=threads,
    )


@app.command()
def preprocess(
    graph: Path = GRAPH_OPTION,
    out: Optional[Path] = typer.Option(None, "--out", help="Weighted output graph (default: stdout)"),
    trace: Optional[Path] = typer.Option(None, "--trace", help="Write the contraction trace as JSON"),
):
    """Contract triangles of a subcubic graph into weighted vertices."""
    with reported_errors():
        g = read_graph(graph)
        reduced, contraction = eliminate_triangles(g)
        if out is None:
            typer.echo(serialize_graph(reduced), nl=False)
        else:
            write_graph(reduced, out)
        if trace is not None:
            trace.write_text(contraction.model_dump_json(indent=2) + "\n", encoding="utf-8")
    if out is not None:
        console.print(
            f"[green]SUCCESS[/green] {len(contraction.steps)} triangles contracted, "
            f"{reduced.n} vertices written to {out}"
        )


BENCH_COLUMNS = [
    "graph", "n", "m", "k", "l", "strategy", "r", "trials", "success_frequency", "seconds", "budget_ratio",
]
HISTOGRAM_COLUMNS = ["graph", "k", "l", "la", "count", "frequency", "cumulative", "tail_bound", "expected_mean"]


def _bench_inputs(path: Path, strategy: Strategy) -> Optional[dict]:
    companions = {
        Strategy.COLOR: (".coloring", "coloring", read_coloring),
        Strategy.FRACTIONAL: (".frac", "fractional", read_fractional),
        Strategy.VECTOR: (".vec", "vectors", read_vectors),
        Strategy.BIPARTITION: (".part", "partition", read_partition),
    }
    if strategy not in companions:
        return {}
    suffix, key, reader = companions[strategy]
    companion = path.with_suffix(suffix)
    if companion.exists():
        return {key: reader(companion)}
    if strategy in (Strategy.COLOR, Strategy.FRACTIONAL):
        return {}
    return None


def _histogram_rows(name: str, g: Graph, k: int, samples: int, seed: int) -> list[dict]:
    rng = trial_rng(seed, k)
    tree = random_subtree(g, k, rng)
    if tree is None:
        return []
    degree = Counter(v for edge in tree for v in edge)
    l = sum(1 for d in degree.values() if d == 1)
    counts = Counter(label_count_samples(tree, rng, samples).tolist())
    rows = []
    cumulative = 0
    for value in sorted(counts):
        cumulative += counts[value]
        t = math.ceil(k + l / 2 - value)
        bound = math.comb(k - 1, 2 * t) / 2 ** (k + 1) if 0 <= 2 * t <= k - 1 else None
        rows.append({
            "graph": name, "k": k, "l": l, "la": value, "count": counts[value],
            "frequency": counts[value] / samples, "cumulative": cumulative / samples,
            "tail_bound": bound, "expected_mean": 3 * k / 4 + l / 2 - 1 / 4,
        })
    return rows


def _render(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


@app.command()
def bench(
    corpus: Path = typer.Argument(..., help="Directory of graph files"),
    k: list[int] = typer.Option([4], "--k", help="Tree sizes to sweep (repeatable)"),
    l: int = typer.Option(2, "--l", help="Leaf count"),
    strategy: list[Strategy] = typer.Option([Strategy.RANDOM], "--strategy", help="Strategies to sweep (repeatable)"),
    repeat: int = typer.Option(1, "--repeat", min=1, help="Runs per row with consecutive seeds"),
    seed: Optional[int] = SEED_OPTION,
    boost: int = BOOST_OPTION,
    fmt: str = typer.Option("table", "--format", help="table, csv or json"),
    histogram: bool = typer.Option(False, "--histogram", help="Report |la| histograms of random subtrees instead"),
    samples: int = typer.Option(10_000, "--samples", min=1, help="Bipartitions per histogram"),
    output: Optional[Path] = typer.Option(None, "--output", help="Write the table to a file"),
):
    """Sweep sizes and strategies over a corpus of graphs."""
    if fmt not in ("table", "csv", "json"):
        fail(f"unknown format {fmt!r}")
    if not corpus.is_dir():
        fail(f"{corpus} is not a directory")
    base_seed = get_settings().seed if seed is None else seed
    rows: list[dict] = []
    with reported_errors():
        for path in sorted(p for p in corpus.iterdir() if p.suffix in GRAPH_SUFFIXES):
            g = read_graph(path)
            for size in k:
                if histogram:
                    rows.extend(_histogram_rows(path.name, g, size, samples, base_seed))
                    continue
                for choice in strategy:
                    inputs = _bench_inputs(path, choice)
                    if inputs is None:
                        err_console.print(f"[yellow]skipping[/yellow] {path.name}: no input for {choice.value}")
                        continue
                    hits, trials_run, budget, elapsed = 0, 0, 0, 0.0
                    for offset in range(repeat):
                        plan = make_plan(k=size, l=l, strategy=choice, seed=base_seed + offset,
                                         confidence_boost=boost, workers=1)
                        start = time.perf_counter()
                        verdict = detect_tree(g, plan, **inputs)
                        elapsed += time.perf_counter() - start
                        hits += verdict.yes
                        trials_run += verdict.trials_run
                        budget = max(budget, verdict.r_used)
                    rows.append({
                        "graph": path.name, "n": g.n, "m": g.m, "k": size, "l": l, "strategy": choice.value,
                        "r": budget, "trials": trials_run, "success_frequency": hits / repeat,
                        "seconds": round(elapsed / repeat, 6), "budget_ratio": round(budget / size, 6),
                    })
    columns = HISTOGRAM_COLUMNS if histogram else BENCH_COLUMNS
    if fmt == "table":
        table = Table(title="Histogram" if histogram else "Benchmark", box=box.ROUNDED, header_style="bold magenta")
        for column in columns:
            table.add_column(column)
        for row in rows:
            table.add_row(*("" if row[c] is None else str(row[c]) for c in columns))
        if output is not None:
            output.write_text(_render(rows, columns, "csv"), encoding="utf-8")
        console.print(table)
        if not rows:
            console.print("[yellow]No graphs found.[/yellow]")
        return
    text = _render(rows, columns, fmt)
    if output is not None:
        output.write_text(text, encoding="utf-8")
    else:
        typer.echo(text, nl=False)


@app.command()
def version():
    """Show the installed version."""
    console.print(f"treesieve {__version__}")
