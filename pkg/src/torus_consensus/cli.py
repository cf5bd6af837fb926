"""CLI main entry point."""

import io
import logging
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import click
import numpy as np
import tomlkit

from . import __version__
from .config import Settings
from .consts import EXIT_INVALID_INPUT, EXIT_NO_SOLUTION
from .enums import Norm, OutputFormat, SweepVariable
from .errors import (
    ConsensusException,
    InfeasibleError,
    InvalidSpecError,
    NoConvergenceError,
    UnsupportedParityError,
)
from .log import setup as setup_log
from .optimal import (
    closed_form_gamma,
    closed_form_h,
    convergence_time,
    gamma_for_h,
    oracle_optimal,
)
from .output import write_records
from .sim import run as run_simulation
from .spectra import check_extremal_hypothesis, extremal_eigenvalues, laplacian_spectrum
from .telemetry import (
    get_tracer,
    record_sweep_point,
    report_error,
    setup_observability,
    shutdown_observability,
)
from .topology import TopologySpec
from .tradeoff import TradeoffResult, min_power_given_time, min_time_given_power

logger = logging.getLogger(__name__)

MIXED_PARITY_NOTE = "mixed parity: closed form unavailable"
NON_PER_AXIS_NOTE = "closed form covers per-axis neighborhoods only"


class CliError(click.ClickException):
    """ClickException carrying a specific exit code."""

    def __init__(self, message: str, exit_code: int = 1) -> None:
        super().__init__(message)
        self.exit_code = exit_code


def _parse_dims(ctx, param, value: str | None) -> tuple[int, ...] | None:
    if value is None:
        return None
    try:
        dims = tuple(int(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")
    if not dims:
        raise click.BadParameter("at least one axis size is required")
    return dims


def _parse_range(ctx, param, value: str | None) -> range | None:
    """START:STOP[:STEP], inclusive of STOP."""
    if value is None:
        return None
    parts = value.split(":")
    if len(parts) not in (2, 3):
        raise click.BadParameter(f"expected START:STOP[:STEP], got {value!r}")
    try:
        start, stop, step = (int(p) for p in [*parts, "1"][:3])
    except ValueError:
        raise click.BadParameter(f"expected integers in {value!r}")
    if step < 1 or stop < start:
        raise click.BadParameter(f"empty range {value!r}")
    return range(start, stop + 1, step)


def topology_options(func):
    func = click.option(
        "--norm",
        type=click.Choice([n.value for n in Norm]),
        default=Norm.PER_AXIS.value,
        show_default=True,
        help="Neighborhood rule.",
    )(func)
    func = click.option(
        "--r", "r", type=int, default=1, show_default=True, help="Neighbor radius."
    )(func)
    func = click.option(
        "--dims",
        callback=_parse_dims,
        required=True,
        help="Nodes per axis, e.g. '400' (cycle) or '16,18' (torus).",
    )(func)
    return func


def output_options(func):
    func = click.option(
        "--out",
        "out",
        type=click.Path(dir_okay=False, writable=True),
        default=None,
        help="Write records here instead of stdout.",
    )(func)
    func = click.option(
        "--format",
        "fmt",
        type=click.Choice([f.value for f in OutputFormat]),
        default=None,
        help="Record format (defaults to output.format in the settings).",
    )(func)
    return func


def _emit(ctx, records: list[dict], fmt: str | None, out: str | None) -> None:
    settings: Settings = ctx.obj["settings"]
    output_format = OutputFormat(fmt) if fmt else settings.output.format
    buffer = io.StringIO()
    write_records(records, buffer, output_format, settings.output.precision)
    if out:
        Path(out).write_text(buffer.getvalue(), encoding="utf-8")
        logger.info(f"Wrote {len(records)} records to {out}")
    else:
        click.echo(buffer.getvalue(), nl=False)


@contextmanager
def _command(name: str, **attributes) -> Iterator[None]:
    """Run a subcommand inside its span and map errors onto exit codes."""
    with get_tracer().start_as_current_span(
        f"consensus.{name}", attributes=attributes, record_exception=False
    ) as span:
        try:
            yield
        except click.ClickException:
            raise
        except (NoConvergenceError, InfeasibleError) as e:
            logger.error(f"{name}: {e}")
            span.record_exception(e)
            report_error(e, command=name)
            raise CliError(str(e), exit_code=EXIT_NO_SOLUTION) from e
        except ConsensusException as e:
            logger.error(f"{name}: {e}")
            span.record_exception(e)
            raise CliError(str(e), exit_code=EXIT_INVALID_INPUT) from e
        except Exception as e:
            logger.exception(f"{name} failed unexpectedly")
            span.record_exception(e)
            report_error(e, command=name)
            raise CliError(str(e)) from e


def _closed_form_pair(spec: TopologySpec) -> tuple[float | None, float | None, str]:
    try:
        return closed_form_h(spec), closed_form_gamma(spec), ""
    except UnsupportedParityError:
        return None, None, MIXED_PARITY_NOTE
    except InvalidSpecError:
        if spec.norm != Norm.PER_AXIS and not spec.is_cycle:
            return None, None, NON_PER_AXIS_NOTE
        raise


def _hypothesis(spec: TopologySpec, settings: Settings) -> bool | None:
    if spec.norm != Norm.PER_AXIS and not spec.is_cycle:
        return None
    return check_extremal_hypothesis(
        spec, workers=settings.spectra.fft_workers, exhaustive=settings.spectra.exhaustive
    ).holds


def _abs_diff(a: float | None, b: float) -> float | None:
    return None if a is None else abs(a - b)


def analyze_record(spec: TopologySpec, settings: Settings) -> dict:
    """Closed-form and oracle values for one topology, side by side."""
    spectra = settings.spectra
    summary = extremal_eigenvalues(
        spec, workers=spectra.fft_workers, exhaustive=spectra.exhaustive
    )
    oracle = oracle_optimal(spec, workers=spectra.fft_workers, exhaustive=spectra.exhaustive)
    h_closed, gamma_closed, note = _closed_form_pair(spec)
    return {
        "m": spec.m,
        "dims": spec.dims,
        "n": spec.n,
        "r": spec.r,
        "norm": spec.norm.value,
        "h_closed": h_closed,
        "gamma_closed": gamma_closed,
        "h_oracle": oracle.h,
        "gamma_oracle": oracle.gamma,
        "T": oracle.T,
        "T_closed": None if gamma_closed is None else convergence_time(gamma_closed),
        "lambda2": summary.lambda2_L,
        "lambdaN": summary.lambdaN_L,
        "h_abs_diff": _abs_diff(h_closed, oracle.h),
        "gamma_abs_diff": _abs_diff(gamma_closed, oracle.gamma),
        "hypothesis_holds": _hypothesis(spec, settings),
        "parity_note": note,
    }


def _simulated_columns(spec: TopologySpec, h: float, settings: Settings) -> dict:
    sim_cfg = settings.simulation
    report = run_simulation(
        spec,
        h,
        sim_cfg.seed,
        sim_cfg.eps,
        t_max=sim_cfg.t_max,
        fit_fraction=sim_cfg.fit_fraction,
        fit_min_points=sim_cfg.fit_min_points,
        divergence_factor=sim_cfg.divergence_factor,
    )
    return {"iterations": report.iterations, "fitted_contraction": report.fitted_contraction}


def sweep_record(
    spec: TopologySpec,
    settings: Settings,
    variable: SweepVariable,
    *,
    simulate: bool = False,
) -> dict:
    """Sweep row; ``simulate`` runs the iteration at the oracle h and adds its decay."""
    record = analyze_record(spec, settings)
    record_sweep_point(variable=variable.value)
    logger.debug(f"Sweep point {spec.describe()}: T={record['T']!r}")
    row = {
        "m": record["m"],
        "dims": record["dims"],
        "n": record["n"],
        "r": record["r"],
        "h_closed": record["h_closed"],
        "gamma_closed": record["gamma_closed"],
        "h_oracle": record["h_oracle"],
        "gamma": record["gamma_oracle"],
        "T": record["T"],
        "hypothesis_holds": record["hypothesis_holds"],
    }
    if simulate:
        row.update(_simulated_columns(spec, record["h_oracle"], settings))
    return row


def sweep_specs(
    variable: SweepVariable,
    values: range,
    *,
    dims: tuple[int, ...] | None,
    r: int,
    m: int,
    norm: Norm,
) -> list[TopologySpec]:
    """Topologies visited by a sweep, in output order."""
    if variable == SweepVariable.N:
        return [TopologySpec.of((n,) * m, r, norm) for n in values]
    if dims is None:
        raise click.BadParameter(f"--dims is required to sweep over {variable.value}")
    if variable == SweepVariable.R:
        return [TopologySpec.of(dims, radius, norm) for radius in values]
    if values.start < 1 or values[-1] > len(dims):
        raise click.BadParameter(
            f"m must lie in [1, {len(dims)}] for --dims with {len(dims)} axis sizes"
        )
    return [TopologySpec.of(dims[:axes], r, norm) for axes in values]


@click.group()
@click.option(
    "--config",
    "-c",
    "config_path",
    default=None,
    type=click.Path(dir_okay=False),
    help="Settings file (TOML). Defaults plus TORUS_CONSENSUS_* environment when unset.",
)
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
    help="Override the console log level.",
)
@click.version_option(__version__, prog_name="torus-consensus")
@click.pass_context
def cli(ctx, config_path: str | None, log_level: str | None):
    """Torus Consensus - optimal average consensus on r-nearest-neighbor tori."""
    ctx.ensure_object(dict)
    try:
        settings = Settings.load(config_path)
    except ConsensusException as e:
        raise CliError(str(e), exit_code=EXIT_INVALID_INPUT) from e
    setup_log(settings.log_file, log_level or settings.log_level)
    setup_observability(settings.observability, component="cli")
    ctx.call_on_close(shutdown_observability)
    ctx.obj["settings"] = settings


@cli.command(name="analyze")
@topology_options
@output_options
@click.pass_context
def analyze(ctx, dims, r, norm, fmt, out):
    """Optimal h, gamma and T from the closed forms and the spectral oracle."""
    settings: Settings = ctx.obj["settings"]
    with _command("analyze", dims=list(dims), r=r, norm=norm):
        spec = TopologySpec.of(dims, r, norm)
        logger.info(f"Analyzing {spec.describe()}")
        record = analyze_record(spec, settings)
        _emit(ctx, [record], fmt, out)


@cli.command(name="spectrum")
@topology_options
@click.option(
    "--full", is_flag=True, default=False, help="Emit every eigenvalue, one row per index."
)
@click.option(
    "--h", "h", type=float, default=None, help="Also emit W = I - hL eigenvalues (with --full)."
)
@output_options
@click.pass_context
def spectrum(ctx, dims, r, norm, full, h, fmt, out):
    """Extreme Laplacian eigenvalues, their indices and the closed-form index check."""
    settings: Settings = ctx.obj["settings"]
    spectra = settings.spectra
    with _command("spectrum", dims=list(dims), r=r, norm=norm, full=full):
        spec = TopologySpec.of(dims, r, norm)
        if full:
            values = laplacian_spectrum(
                spec, workers=spectra.fft_workers, exhaustive=spectra.exhaustive
            )
            records = []
            for idx in np.ndindex(*spec.dims):
                row = {"index": idx, "lambda_L": float(values[idx])}
                if h is not None:
                    row["lambda_W"] = 1.0 - h * float(values[idx])
                records.append(row)
            _emit(ctx, records, fmt, out)
            return

        summary = extremal_eigenvalues(
            spec, workers=spectra.fft_workers, exhaustive=spectra.exhaustive
        )
        record = {
            "dims": spec.dims,
            "r": spec.r,
            "norm": spec.norm.value,
            "lambda2": summary.lambda2_L,
            "lambdaN": summary.lambdaN_L,
            "arg2_index": summary.arg2_index,
            "argmax_index": summary.argmax_index,
            "enumeration": summary.enumeration,
            "hypothesis_holds": None,
            "claimed_lambda2": None,
            "claimed_lambdaN": None,
        }
        if spec.norm == Norm.PER_AXIS or spec.is_cycle:
            check = check_extremal_hypothesis(
                spec, workers=spectra.fft_workers, exhaustive=spectra.exhaustive
            )
            record.update(
                hypothesis_holds=check.holds,
                claimed_lambda2=check.claimed_lambda2_L,
                claimed_lambdaN=check.claimed_lambdaN_L,
            )
        _emit(ctx, [record], fmt, out)


@cli.command(name="simulate")
@topology_options
@click.option("--h", "h", type=float, default=None, help="Consensus parameter (default: optimal).")
@click.option("--eps", type=float, default=None, help="Relative error target.")
@click.option("--seed", type=int, default=None, help="Seed for x(0).")
@click.option("--t-max", "t_max", type=int, default=None, help="Iteration cap.")
@click.option(
    "--constant", type=float, default=None, help="Start from the constant vector C*1."
)
@click.option("--trace", is_flag=True, default=False, help="Emit e(t) per iteration.")
@output_options
@click.pass_context
def simulate(ctx, dims, r, norm, h, eps, seed, t_max, constant, trace, fmt, out):
    """Run the consensus iteration and compare its decay with the analytic gamma."""
    settings: Settings = ctx.obj["settings"]
    sim_cfg = settings.simulation
    eps = sim_cfg.eps if eps is None else eps
    seed = sim_cfg.seed if seed is None else seed
    with _command("simulate", dims=list(dims), r=r, norm=norm, seed=seed):
        spec = TopologySpec.of(dims, r, norm)
        if h is None:
            h = oracle_optimal(spec).h
        gamma = gamma_for_h(spec, h)
        x0 = None if constant is None else np.full(spec.n, constant)
        report = run_simulation(
            spec,
            h,
            seed,
            eps,
            t_max=sim_cfg.t_max if t_max is None else t_max,
            x0=x0,
            fit_fraction=sim_cfg.fit_fraction,
            fit_min_points=sim_cfg.fit_min_points,
            divergence_factor=sim_cfg.divergence_factor,
        )
        if trace:
            records = [{"t": t, "error": e} for t, e in enumerate(report.error_trace)]
        else:
            records = [
                {
                    "dims": spec.dims,
                    "r": spec.r,
                    "norm": spec.norm.value,
                    "h": h,
                    "seed": report.seed,
                    "eps": eps,
                    "iterations": report.iterations,
                    "fitted_contraction": report.fitted_contraction,
                    "gamma": gamma,
                    "T": convergence_time(gamma) if gamma < 1.0 else None,
                    "relative_gap": (
                        abs(report.fitted_contraction - gamma) / gamma if gamma > 0 else None
                    ),
                    "avg_residual": report.avg_residual,
                }
            ]
        _emit(ctx, records, fmt, out)


@cli.command(name="sweep")
@click.option(
    "--over",
    "variable",
    type=click.Choice([v.value for v in SweepVariable]),
    required=True,
    help="Variable to sweep.",
)
@click.option(
    "--range",
    "values",
    callback=_parse_range,
    required=True,
    help="Inclusive START:STOP[:STEP].",
)
@click.option("--dims", callback=_parse_dims, default=None, help="Axis sizes for r and m sweeps.")
@click.option("--r", "r", type=int, default=1, show_default=True, help="Neighbor radius.")
@click.option("--m", "m", type=int, default=1, show_default=True, help="Axes for an n sweep.")
@click.option(
    "--norm",
    type=click.Choice([n.value for n in Norm]),
    default=Norm.PER_AXIS.value,
    show_default=True,
)
@click.option("--workers", type=int, default=None, help="Threads evaluating sweep points.")
@click.option(
    "--simulate",
    is_flag=True,
    default=False,
    help="Also run the iteration at the oracle h; adds iterations and fitted_contraction.",
)
@output_options
@click.pass_context
def sweep(ctx, variable, values, dims, r, m, norm, workers, simulate, fmt, out):
    """One row per sweep point: closed-form and oracle h, gamma and T, plus the
    simulated decay with ``--simulate``."""
    settings: Settings = ctx.obj["settings"]
    variable = SweepVariable(variable)
    workers = workers or settings.sweep.workers
    with _command("sweep", variable=variable.value, points=len(values)):
        specs = sweep_specs(variable, values, dims=dims, r=r, m=m, norm=Norm(norm))
        logger.info(f"Sweeping {variable.value} over {len(specs)} points")
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                records = list(
                    executor.map(
                        lambda s: sweep_record(s, settings, variable, simulate=simulate), specs
                    )
                )
        else:
            records = [sweep_record(s, settings, variable, simulate=simulate) for s in specs]
        _emit(ctx, records, fmt, out)
        logger.info(f"Sweep over {variable.value} finished")


def _tradeoff_records(program: str, result: TradeoffResult) -> list[dict]:
    return [
        {
            "program": program,
            "r": p.r,
            "T": p.T,
            "P": p.P,
            "selected": p.r == result.r_star,
        }
        for p in result.frontier
    ]


@cli.command(name="tradeoff")
@click.option("--dims", callback=_parse_dims, required=True, help="Nodes per axis.")
@click.option(
    "--norm",
    type=click.Choice([n.value for n in Norm]),
    default=Norm.PER_AXIS.value,
    show_default=True,
)
@click.option("--alpha", type=float, required=True, help="Path-loss exponent.")
@click.option("--r-max", "r_max", type=int, required=True, help="Largest radius scanned.")
@click.option("--p-max", "p_max", type=float, default=None, help="Power budget.")
@click.option("--t-max", "t_max", type=float, default=None, help="Convergence-time budget.")
@click.option("--workers", type=int, default=None, help="Threads evaluating radii.")
@output_options
@click.pass_context
def tradeoff(ctx, dims, norm, alpha, r_max, p_max, t_max, workers, fmt, out):
    """Minimum T under a power budget (--p-max) or minimum P under a deadline (--t-max)."""
    settings: Settings = ctx.obj["settings"]
    if (p_max is None) == (t_max is None):
        raise click.UsageError("Give exactly one of --p-max and --t-max")
    workers = workers or settings.sweep.workers
    program = "min_time_given_power" if p_max is not None else "min_power_given_time"
    with _command("tradeoff", program=program, r_max=r_max):
        base = TopologySpec.of(dims, 1, norm)
        try:
            if p_max is not None:
                result = min_time_given_power(base, r_max, p_max, alpha, workers=workers)
            else:
                result = min_power_given_time(base, r_max, t_max, alpha, workers=workers)
        except InfeasibleError as e:
            _emit(ctx, _tradeoff_records(program, e.result), fmt, out)
            raise
        _emit(ctx, _tradeoff_records(program, result), fmt, out)


@cli.command(name="config")
@click.pass_context
def show_config(ctx):
    """Print the effective settings as TOML."""
    settings: Settings = ctx.obj["settings"]

    def drop_none(node):
        if isinstance(node, dict):
            return {k: drop_none(v) for k, v in node.items() if v is not None}
        if isinstance(node, list):
            return [drop_none(v) for v in node if v is not None]
        return node

    click.echo(tomlkit.dumps(drop_none(settings.model_dump(mode="json"))), nl=False)


def main():
    cli(obj={})


if __name__ == "__main__":
    main()
