"""CLI entry point for multiquant.

Uses Typer for command routing with lazy loading: numerical modules are
imported only by the command that needs them.
"""

from enum import Enum
from pathlib import Path
from typing import List, Optional

import typer

__all__ = ["app", "cli_main"]

app = typer.Typer(
    name="multiquant",
    help="Clustering of noisy multi-observation data to common centers",
    no_args_is_help=True,
)


class AnalysisCase(str, Enum):
    THEOREM1 = "theorem1"
    THEOREM2 = "theorem2"
    EXAMPLE2 = "example2"


@app.command()
def fit(
    data: Path = typer.Argument(..., help="CSV with the L observations of a sample side by side"),
    n: int = typer.Option(..., "--n", help="Number of centers"),
    seed: int = typer.Option(..., "--seed", help="Seed of the first restart"),
    L: int = typer.Option(1, "--L", help="Observations per sample"),
    r: float = typer.Option(2.0, "--r", help="Distortion power (>= 1)"),
    weights: Optional[str] = typer.Option(None, "--weights", help="Comma-separated lambda_1..lambda_L"),
    restarts: Optional[int] = typer.Option(None, "--restarts", help="Multistart count"),
    max_iters: Optional[int] = typer.Option(None, "--max-iters", help="Lloyd iteration cap"),
    rel_tol: Optional[float] = typer.Option(None, "--rel-tol", help="Relative decrease that stops Lloyd"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Worker cap (default: all cores)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Codebook JSON (default: stdout)"),
    history: Optional[Path] = typer.Option(None, "--history", help="Distortion history CSV"),
) -> None:
    """Fit common centers with the generalized Lloyd algorithm."""
    from multiquant.cli.commands import cmd_fit

    cmd_fit(data, n, L, r, weights, seed, restarts, max_iters, rel_tol, threads, out, history)


@app.command()
def assign(
    codebook: Path = typer.Argument(..., help="Codebook JSON written by 'multiquant fit'"),
    data: Path = typer.Argument(..., help="Dataset CSV"),
    L: Optional[int] = typer.Option(None, "--L", help="Observations per sample (default: from codebook)"),
    r: Optional[float] = typer.Option(None, "--r", help="Distortion power (default: from codebook)"),
    weights: Optional[str] = typer.Option(None, "--weights", help="Comma-separated weights"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Labels CSV (default: stdout)"),
) -> None:
    """Assign samples to their generalized Voronoi cells."""
    from multiquant.cli.commands import cmd_assign

    cmd_assign(codebook, data, L, r, weights, out)


@app.command()
def analyze(
    case: AnalysisCase = typer.Option(..., "--case", help="theorem1, theorem2 or example2"),
    n: List[int] = typer.Option(..., "--n", help="Center count; repeat for several"),
    r: float = typer.Option(2.0, "--r", help="Distortion power"),
    lambda2: Optional[float] = typer.Option(None, "--lambda", help="Weight of the second observation (lambda_1 = 1)"),
    weights: Optional[str] = typer.Option(None, "--weights", help="Comma-separated weights"),
    L: Optional[int] = typer.Option(None, "--L", help="Observations per sample (default 2)"),
    d: int = typer.Option(1, "--d", help="Dimension of the built-in uniform sources"),
    grid_size: Optional[int] = typer.Option(None, "--grid-size", help="Point density grid nodes"),
    density: Optional[Path] = typer.Option(None, "--density", help="Tabulated joint density CSV"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Analysis JSON (default: stdout)"),
    table: Optional[Path] = typer.Option(None, "--table", help="Point density table CSV"),
    codebook: Optional[Path] = typer.Option(None, "--codebook", help="Analytical codebook CSV"),
) -> None:
    """Predict high-resolution distortions and analytical codebooks."""
    from multiquant.cli.commands import cmd_analyze

    cmd_analyze(case.value, r, lambda2, weights, L, d, n, grid_size, density, out, table, codebook)


@app.command("experiment-noisy")
def experiment_noisy(
    config: Path = typer.Argument(..., help="Experiment JSON"),
    csv_out: Optional[Path] = typer.Option(None, "--csv", help="Result CSV (default: <config>.results.csv)"),
    json_out: Optional[Path] = typer.Option(None, "--json", help="Result JSON (default: <config>.results.json)"),
    trials: Optional[int] = typer.Option(None, "--trials", help="Override the trial count"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Worker cap (default: all cores)"),
) -> None:
    """Compare ordinary and multi-observation clustering under noise."""
    from multiquant.cli.commands import cmd_experiment_noisy

    cmd_experiment_noisy(config, csv_out, json_out, trials, threads)


@app.command("experiment-highres")
def experiment_highres(
    config: Path = typer.Argument(..., help="Experiment JSON"),
    csv_out: Optional[Path] = typer.Option(None, "--csv", help="Summary CSV (default: <config>.results.csv)"),
    json_out: Optional[Path] = typer.Option(None, "--json", help="Summary JSON (default: <config>.results.json)"),
    centers_out: Optional[Path] = typer.Option(None, "--centers", help="Centers CSV (default: <config>.centers.csv)"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Worker cap (default: all cores)"),
) -> None:
    """Compare fitted and analytical quantizers of uniform pairs."""
    from multiquant.cli.commands import cmd_experiment_highres

    cmd_experiment_highres(config, csv_out, json_out, centers_out, threads)


@app.command()
def similarity(
    a: Path = typer.Argument(..., help="First labels CSV"),
    b: Path = typer.Argument(..., help="Second labels CSV"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="JSON output (default: stdout)"),
) -> None:
    """Adjusted Rand index and adjusted mutual information of two labelings."""
    from multiquant.cli.commands import cmd_similarity

    cmd_similarity(a, b, out)


@app.command()
def config() -> None:
    """Show the effective configuration."""
    from multiquant.cli.commands import cmd_config

    cmd_config(None)


# Debug subcommand group
debug_app = typer.Typer(help="Debug mode commands")
app.add_typer(debug_app, name="debug")


@debug_app.command("on")
def debug_on() -> None:
    """Enable debug logging."""
    from multiquant.cli.commands import cmd_debug_on

    cmd_debug_on(None)


@debug_app.command("off")
def debug_off() -> None:
    """Disable debug logging."""
    from multiquant.cli.commands import cmd_debug_off

    cmd_debug_off(None)


def cli_main() -> None:
    """Entry point for pyproject.toml scripts."""
    app()


if __name__ == "__main__":
    cli_main()
