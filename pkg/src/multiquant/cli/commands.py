"""CLI command handlers.

Handlers validate every argument and compute all results before the first
file is written, so a failing invocation leaves no partial output behind.
"""

import dataclasses
import functools
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, TypeVar

import typer

from multiquant.cli.helpers import (
    build_spec,
    codebook_to_dict,
    ensure_distinct,
    fit_options,
    history_csv,
    labels_csv,
    load_config,
    load_multidataset,
    parse_weights,
    read_codebook,
    read_labels,
)
from multiquant.utils.constants import ExitCode, Schema
from multiquant.utils.debug import debug, log_error, reload_config
from multiquant.utils.exceptions import InvalidParameter, MultiquantError
from multiquant.utils.formatting import atomic_write_text, dumps_json, render_csv

F = TypeVar("F", bound=Callable[..., Any])


def handle_errors(func: F) -> F:
    """Translate library errors into exit codes with a message on stderr."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        from multiquant.cli.ui import print_error

        try:
            return func(*args, **kwargs)
        except MultiquantError as e:
            debug("cli", f"{func.__name__} failed", error=type(e).__name__)
            print_error(str(e))
            raise typer.Exit(e.exit_code) from e
        except OSError as e:
            print_error(str(e))
            raise typer.Exit(ExitCode.DATA_ERROR) from e
        except (typer.Exit, typer.Abort):
            raise
        except Exception as e:
            # Log the full error with traceback (always, even if debug is off)
            log_error("cli", f"{func.__name__} crashed: {type(e).__name__}: {e}", exc=e)
            raise typer.Exit(1) from e

    return wrapper  # type: ignore[return-value]


def _emit(text: str, out: Optional[Path]) -> None:
    """Write to ``out`` atomically, or to stdout when no path is given."""
    if out is None:
        typer.echo(text, nl=False)
    else:
        atomic_write_text(out, text)


@handle_errors
def cmd_fit(
    data: Path,
    n: int,
    L: int,
    r: float,
    weights: Optional[str],
    seed: int,
    restarts: Optional[int],
    max_iters: Optional[int],
    rel_tol: Optional[float],
    threads: Optional[int],
    out: Optional[Path],
    history: Optional[Path],
):
    """Fit a codebook to a multi-observation dataset."""
    from multiquant.cli.ui import err_console
    from multiquant.core.lloyd import fit_multistart

    config = load_config()
    spec = build_spec(r, weights, L)
    opts = fit_options(config, n, seed, restarts, max_iters, rel_tol, threads)
    ensure_distinct([out, history])
    ds = load_multidataset(data, L)
    codebook, trace = fit_multistart(ds, spec, opts)

    text = dumps_json(codebook_to_dict(codebook, spec))
    if history is not None:
        atomic_write_text(history, history_csv(trace))
    _emit(text, out)
    if out is not None:
        err_console.print(
            f"[green]✓[/green] {codebook.n} centers (d={codebook.d}) written to [cyan]{out}[/cyan] "
            f"[dim](distortion {trace.final_distortion:.6g}, restart {trace.restart})[/dim]"
        )


@handle_errors
def cmd_assign(
    codebook_path: Path,
    data: Path,
    L: Optional[int],
    r: Optional[float],
    weights: Optional[str],
    out: Optional[Path],
):
    """Label each sample with its generalized Voronoi cell."""
    from multiquant.cli.ui import err_console
    from multiquant.core.model import Partition
    from multiquant.core.quantizer import assign

    codebook, stored = read_codebook(codebook_path)
    if stored is not None and L is None and r is None and weights is None:
        spec = stored
    else:
        L = L if L is not None else (stored.L if stored is not None else 1)
        r = r if r is not None else (stored.r if stored is not None else 2.0)
        spec = build_spec(r, weights, L)
    ds = load_multidataset(data, spec.L)
    assignment = assign(codebook, ds, spec)

    _emit(labels_csv(Partition(assignment.labels, codebook.n)), out)
    if out is not None:
        err_console.print(
            f"[green]✓[/green] {ds.m} labels written to [cyan]{out}[/cyan] "
            f"[dim](distortion {assignment.distortion:.6g})[/dim]"
        )


def _analysis_case(
    case: str,
    r: float,
    lambda2: Optional[float],
    weights: Optional[str],
    L: Optional[int],
    d: int,
    density: Optional[Path],
):
    """Density model and distortion for one analysis case."""
    from multiquant.core.highres import DensityModel, load_density_csv
    from multiquant.core.model import DistortionSpec

    if case == "example2":
        if density is not None:
            raise InvalidParameter("example2 is defined for the built-in uniform pair; drop --density")
        L = 2
    elif case == "theorem2":
        L = 2 if L is None else L
        if L != 2:
            raise InvalidParameter(f"theorem2 covers two observations, got L={L}")
    elif L is None:
        L = 2
    if lambda2 is not None:
        if weights is not None:
            raise InvalidParameter("give either --lambda or --weights, not both")
        if L != 2:
            raise InvalidParameter("--lambda sets the second of two weights; use --weights")
        spec = DistortionSpec(r=r, weights=(1.0, lambda2))
    else:
        spec = DistortionSpec(r=r, weights=parse_weights(weights, L))
    model = load_density_csv(density, L) if density is not None else DensityModel.unit_uniform(L, d)
    return model, spec


@handle_errors
def cmd_analyze(
    case: str,
    r: float,
    lambda2: Optional[float],
    weights: Optional[str],
    L: Optional[int],
    d: int,
    n_values: Sequence[int],
    grid_size: Optional[int],
    density: Optional[Path],
    out: Optional[Path],
    table: Optional[Path],
    codebook_out: Optional[Path],
):
    """Asymptotic distortion predictions, point density and analytical codebooks."""
    from multiquant.cli.ui import err_console
    from multiquant.core.highres import (
        example2_norm_constant,
        example2_point_density,
        example2_predict,
        general_constants,
        inverse_transform_codebook,
        kappa_const,
        optimal_point_density,
        r2_constants,
        theorem1_predict,
        theorem2_predict,
        weighted_average_density,
    )

    if not n_values:
        raise InvalidParameter("at least one --n is required")
    if any(n < 1 for n in n_values):
        raise InvalidParameter(f"center counts must be >= 1, got {list(n_values)}")
    ensure_distinct([out, table, codebook_out])
    config = load_config()
    grid = grid_size if grid_size is not None else int(config.grid_size)
    model, spec = _analysis_case(case, r, lambda2, weights, L, d, density)
    kappa_const(model.d)

    extra: dict[str, Any] = {}
    if case == "theorem1":
        consts = r2_constants(model, spec)
        f_z = weighted_average_density(model, spec, grid)
        predictions = [theorem1_predict(consts, f_z, n, model.d) for n in n_values]
    elif case == "theorem2":
        consts = general_constants(model, spec)
        predictions = [theorem2_predict(model, spec, n) for n in n_values]
    else:
        consts = general_constants(model, spec)
        unit, scale = spec.normalized()
        predictions = [scale * example2_predict(spec.r, unit.weights[1], n) for n in n_values]
        extra["norm_constant"] = example2_norm_constant(spec.r, consts.alpha)

    point_density = None
    if model.d == 1:
        if case == "example2":
            point_density = example2_point_density(spec.r, spec.normalized()[0].weights[1], grid)
        else:
            point_density = optimal_point_density(model, spec, grid_size=grid)
    elif table is not None or codebook_out is not None:
        raise InvalidParameter("point density tables and codebooks are produced for d = 1 only")

    codebooks = []
    if point_density is not None:
        codebooks = [(n, inverse_transform_codebook(point_density, n).centers[:, 0]) for n in n_values]

    report = {
        "schema": Schema.ANALYSIS,
        "case": case,
        "r": spec.r,
        "weights": list(spec.weights),
        "L": model.L,
        "d": model.d,
        "constants": dataclasses.asdict(consts),
        "predictions": [{"n": n, "distortion": p} for n, p in zip(n_values, predictions)],
        "codebooks": [{"n": n, "centers": centers} for n, centers in codebooks],
        **extra,
    }
    table_text = None
    if table is not None and point_density is not None:
        table_text = render_csv(
            ("z", "density", "cdf"),
            zip(point_density.nodes, point_density.density, point_density.cumulative),
        )
    codebook_text = None
    if codebook_out is not None:
        codebook_text = render_csv(
            ("n", "index", "center"),
            ((n, i, c) for n, centers in codebooks for i, c in enumerate(centers)),
        )

    if table is not None and table_text is not None:
        atomic_write_text(table, table_text)
    if codebook_out is not None and codebook_text is not None:
        atomic_write_text(codebook_out, codebook_text)
    _emit(dumps_json(report), out)
    if out is not None:
        err_console.print(f"[green]✓[/green] {case} analysis written to [cyan]{out}[/cyan]")


def _default_output(config_path: Path, suffix: str) -> Path:
    return config_path.with_suffix(suffix)


@handle_errors
def cmd_experiment_noisy(
    config_path: Path,
    csv_out: Optional[Path],
    json_out: Optional[Path],
    trials: Optional[int],
    threads: Optional[int],
):
    """Run the noisy clustering comparison from a config file."""
    from multiquant.cli.ui import console, render_table
    from multiquant.experiments import (
        load_noisy_config,
        run_noisy_experiment,
        write_result_csv,
        write_result_json,
    )
    from multiquant.experiments.results import RESULT_COLUMNS

    cfg = load_noisy_config(config_path)
    if trials is not None:
        if trials < 1:
            raise InvalidParameter(f"trials must be >= 1, got {trials}")
        cfg = dataclasses.replace(cfg, trials=trials)
    csv_out = csv_out or _default_output(config_path, ".results.csv")
    json_out = json_out or _default_output(config_path, ".results.json")
    ensure_distinct([csv_out, json_out, config_path])
    workers = load_config().effective_threads(threads)

    result = run_noisy_experiment(cfg, threads=workers)
    write_result_csv(result, csv_out)
    write_result_json(result, json_out)

    console.print(
        render_table(
            f"{cfg.dataset.name}: {cfg.noise.kind.value} noise, L={cfg.noise.L}, {cfg.trials} trials",
            RESULT_COLUMNS,
            (row.as_tuple() for row in result.rows),
        )
    )
    console.print(f"[green]✓[/green] results written to [cyan]{csv_out}[/cyan] and [cyan]{json_out}[/cyan]")


@handle_errors
def cmd_experiment_highres(
    config_path: Path,
    csv_out: Optional[Path],
    json_out: Optional[Path],
    centers_out: Optional[Path],
    threads: Optional[int],
):
    """Run the fitted vs analytical quantizer comparison from a config file."""
    from multiquant.cli.ui import console, render_table
    from multiquant.experiments import (
        load_highres_config,
        run_highres_experiment,
        write_highres_csv,
        write_highres_json,
    )
    from multiquant.experiments.results import HIGHRES_COLUMNS

    cfg = load_highres_config(config_path)
    csv_out = csv_out or _default_output(config_path, ".results.csv")
    json_out = json_out or _default_output(config_path, ".results.json")
    centers_out = centers_out or _default_output(config_path, ".centers.csv")
    ensure_distinct([csv_out, json_out, centers_out, config_path])
    workers = load_config().effective_threads(threads)

    result = run_highres_experiment(cfg, threads=workers)
    write_highres_csv(result, csv_out, centers_out)
    write_highres_json(result, json_out)

    console.print(
        render_table(
            f"r={cfg.r}, m={cfg.m}",
            HIGHRES_COLUMNS,
            (row.summary() for row in result.rows),
        )
    )
    console.print(f"[green]✓[/green] results written to [cyan]{csv_out}[/cyan], [cyan]{json_out}[/cyan] and [cyan]{centers_out}[/cyan]")


@handle_errors
def cmd_similarity(a: Path, b: Path, out: Optional[Path]):
    """ARI and AMI of two label files."""
    from multiquant.core.metrics import ami, ari

    p = read_labels(a)
    q = read_labels(b)
    _emit(dumps_json({"ari": ari(p, q), "ami": ami(p, q)}), out)


def cmd_config(args):
    """Show the effective configuration."""
    from multiquant.cli.ui import console, render_table
    from multiquant.utils.config import Config

    config = load_config()
    console.print(
        render_table(
            "multiquant configuration",
            ("setting", "value", "description"),
            ((name, str(getattr(config, name)), desc) for name, desc in Config.SETTINGS.items()),
        )
    )
    console.print(f"[bold]Config:[/bold] [dim]{config.multiquant_dir}[/dim]")
    console.print(f"[bold]Threads in use:[/bold] {config.effective_threads()}")


def cmd_debug_on(args):
    """Enable debug logging."""
    config = load_config()
    config.set_debug(True)
    reload_config()
    print("Debug mode enabled")


def cmd_debug_off(args):
    """Disable debug logging."""
    config = load_config()
    config.set_debug(False)
    reload_config()
    print("Debug mode disabled")
