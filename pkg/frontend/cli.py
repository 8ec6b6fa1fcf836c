"""
Command-line surface: ingest CSVs, run the analysis pipelines, write reports.
"""
import functools
import logging
import sys
from functools import partial
from typing import Any, Callable, Dict, Optional, Tuple

import click

from backend import hoi_core, ising, stats_inference, synthetic
from backend.config import get_settings
from backend.distributions import SubsetMask
from backend.fred_client import DEFAULT_END, DEFAULT_START, FRED_SERIES, FredClient
from backend.verification import run_invariant_suite
from frontend import report_io
from frontend.run_config import RunConfig, load_data

logger = logging.getLogger(__name__)


def _split(value: Optional[str]) -> Tuple[str, ...]:
    if not value:
        return ()
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _emit(text: str, path: Optional[str]) -> None:
    if report_io.write_text(text, path) is None:
        click.echo(text, nl=False)
    else:
        logger.info("wrote %s", path)


def _fail_on_error(func: Callable) -> Callable:
    """Turn toolkit and input errors into a one-line diagnostic and a non-zero exit."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ValueError, OSError) as exc:
            raise click.ClickException(str(exc).splitlines()[0] if str(exc) else type(exc).__name__)

    return wrapper


def data_options(func: Callable) -> Callable:
    """Options shared by every command that reads a data file."""
    options = [
        click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False),
                     help="CSV with a header row; a leading date column is dropped."),
        click.option("--columns", default=None, help="Comma-separated subset of columns."),
        click.option("--preprocess", "preprocessing", type=click.Choice(["none", "log_returns"]),
                     default="none", show_default=True),
        click.option("--backend", type=click.Choice(["gaussian_copula", "discrete"]),
                     default="gaussian_copula", show_default=True),
        click.option("--n-boot", type=click.IntRange(min=1), default=None, help="Bootstrap replicates."),
        click.option("--alpha", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=None),
        click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=None),
        click.option("--ridge", type=float, default=None, help="Ridge added to ill-conditioned correlations."),
        click.option("--output", "output_path", type=click.Path(dir_okay=False), default=None),
        click.option("--format", "output_format", type=click.Choice(["json", "csv"]),
                     default="json", show_default=True),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _config(command: str, params: Dict[str, Any], **extra) -> RunConfig:
    settings = get_settings()
    fields = dict(
        command=command,
        input_path=params.get("input_path"),
        columns=_split(params.get("columns")),
        preprocessing=params.get("preprocessing", "none"),
        backend=params.get("backend", "gaussian_copula"),
        n_boot=settings.n_boot if params.get("n_boot") is None else params["n_boot"],
        alpha=settings.alpha if params.get("alpha") is None else params["alpha"],
        seed=settings.seed if params.get("seed") is None else params["seed"],
        ridge=params.get("ridge"),
        output_path=params.get("output_path"),
        output_format=params.get("output_format", "json"),
    )
    fields.update(extra)
    return RunConfig(**fields)


def _inference_kwargs(config: RunConfig, n_jobs: Optional[int]) -> Dict[str, Any]:
    return dict(
        n_boot=config.n_boot,
        alpha=config.alpha,
        seed=config.seed,
        backend=config.backend,
        ridge=config.ridge,
        n_jobs=n_jobs,
    )


def _write_reports(reports, config: RunConfig, pairwise: bool = False, extra: Optional[Dict[str, Any]] = None) -> None:
    if config.output_format == "json":
        payload = report_io.reports_payload(reports, pairwise=pairwise)
        payload.update(extra or {})
        _emit(report_io.render_json(payload, config), config.output_path)
    else:
        _emit(report_io.render_csv(report_io.reports_frame(reports), config), config.output_path)


@click.group(context_settings=dict(max_content_width=120))
@click.option("--log-level", default=None, help="Logging level (default from HOI_LOG_LEVEL).")
@click.option("--n-jobs", type=int, default=None, help="Parallel workers (default from HOI_N_JOBS).")
@click.pass_context
def cli(ctx: click.Context, log_level: Optional[str], n_jobs: Optional[int]):
    """O-information, its gradients and bootstrap significance."""
    settings = get_settings()
    level = (log_level or settings.log_level).upper()
    if not isinstance(logging.getLevelName(level), int):
        raise click.BadParameter(f"unknown logging level {level!r}", param_hint="'--log-level' / HOI_LOG_LEVEL")
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    ctx.ensure_object(dict)
    ctx.obj["n_jobs"] = settings.n_jobs if n_jobs is None else n_jobs


@cli.command("oinfo")
@data_options
@click.pass_context
@_fail_on_error
def oinfo_command(ctx: click.Context, **params):
    """O-information (with TC and DTC) of the selected columns."""
    config = _config("oinfo", params)
    data = load_data(config)
    report = stats_inference.o_information_report(data, **_inference_kwargs(config, ctx.obj["n_jobs"]))
    cache = stats_inference.build_cache(data, config.backend, config.ridge)
    system = SubsetMask.full(data.n_vars)
    extra = {
        "columns": list(data.columns),
        "total_correlation": hoi_core.total_correlation(cache, system),
        "dual_total_correlation": hoi_core.dual_total_correlation(cache, system),
    }
    _write_reports([report], config, extra=extra)


@cli.command("gradients")
@data_options
@click.option("--order", type=click.Choice(["1", "2", "k"]), default="1", show_default=True)
@click.option("--gamma", default=None, help="Comma-separated columns for --order k.")
@click.pass_context
@_fail_on_error
def gradients_command(ctx: click.Context, order: str, gamma: Optional[str], **params):
    """Gradients of O-information with bootstrap confidence intervals."""
    config = _config("gradients", params, order=order, gamma=_split(gamma))
    if order == "k" and not config.gamma:
        raise click.UsageError("--order k needs --gamma")
    if order != "k" and config.gamma:
        raise click.UsageError("--gamma only applies to --order k")
    data = load_data(config)
    kwargs = _inference_kwargs(config, ctx.obj["n_jobs"])
    if order == "k":
        reports = [stats_inference.gradient_k_significance(data, config.gamma, **kwargs)]
    else:
        reports = stats_inference.gradient_significance(data, int(order), **kwargs)
    _write_reports(reports, config, pairwise=order == "2")


@cli.command("local-o")
@data_options
@click.pass_context
@_fail_on_error
def local_o_command(ctx: click.Context, **params):
    """Local O-information of every pair of columns."""
    config = _config("local-o", params)
    data = load_data(config)
    reports = stats_inference.local_o_significance(data, **_inference_kwargs(config, ctx.obj["n_jobs"]))
    _write_reports(reports, config, pairwise=True)


@cli.command("scan")
@data_options
@click.option("--order", type=click.Choice(["3", "4"]), default="3", show_default=True)
@click.pass_context
@_fail_on_error
def scan_command(ctx: click.Context, order: str, **params):
    """O-information of every triplet or quadruplet with R/S indices."""
    config = _config("scan", params, order=order)
    data = load_data(config)
    scan = stats_inference.scan_multiplets(data, int(order), **_inference_kwargs(config, ctx.obj["n_jobs"]))
    if config.output_format == "json":
        _emit(report_io.render_json(report_io.scan_payload(scan), config), config.output_path)
    else:
        _emit(report_io.render_csv(report_io.reports_frame(scan.reports), config), config.output_path)
        indices = report_io.render_csv(report_io.scan_indices_frame(scan), config)
        _emit(indices, report_io.companion_path(config.output_path, "indices"))


@cli.command("ising-sweep")
@click.option("--couplings", "couplings_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Coupling matrix file; default is the built-in hexagon.")
@click.option("--beta-max", type=click.FloatRange(min=0), default=ising.DEFAULT_BETA_MAX, show_default=True)
@click.option("--points", type=click.IntRange(min=1), default=ising.DEFAULT_GRID_POINTS, show_default=True)
@click.option("--quantity", "quantities", multiple=True,
              help="e.g. gradient_first(0), gradient_second(0,1), local_o_information(0,1), o_information.")
@click.option("--output", "output_path", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "output_format", type=click.Choice(["json", "csv"]), default="csv", show_default=True)
@click.pass_context
@_fail_on_error
def ising_sweep_command(ctx, couplings_path, beta_max, points, quantities, output_path, output_format):
    """Exact information quantities of an Ising model over an inverse-temperature grid."""
    if couplings_path:
        couplings = ising.IsingModel.from_couplings_file(couplings_path).couplings
    else:
        couplings = ising.hexagon_couplings()
    n_spins = couplings.shape[0]
    try:
        parsed = [ising.Quantity.parse(q) for q in quantities] or ising.default_quantities(n_spins)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    config = RunConfig(
        command="ising-sweep",
        beta_max=beta_max,
        beta_points=points,
        couplings_path=couplings_path,
        quantities=tuple(q.label for q in parsed),
        output_path=output_path,
        output_format=output_format,
    )
    result = ising.sweep(
        partial(ising.IsingModel, couplings), ising.default_beta_grid(points, beta_max), parsed,
        n_jobs=ctx.obj["n_jobs"],
    )
    if output_format == "json":
        _emit(report_io.render_json(result.to_dict(), config), output_path)
    else:
        _emit(report_io.render_csv(result.to_frame(), config), output_path)


@cli.command("verify")
@click.option("--n-random", type=click.IntRange(min=1), default=1000, show_default=True,
              help="Random discrete systems for the bounds and chain-rule checks.")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@_fail_on_error
def verify_command(n_random: int, seed: int):
    """Run the invariant suite on built-in gates and random systems."""
    results = run_invariant_suite(n_random=n_random, seed=seed)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        click.echo(f"{status}  {result.name:<22} {result.n_cases:>6} cases  {result.detail}".rstrip())
    if not all(r.passed for r in results):
        raise click.ClickException("invariant suite failed")


_SIMULATORS = {
    "latent": lambda n_obs, n_vars, seed: synthetic.latent_factor_data(n_obs, n_vars, seed=seed),
    "sum-triplet": lambda n_obs, n_vars, seed: synthetic.sum_triplet_data(n_obs, max(n_vars - 3, 0), seed=seed),
    "noise": lambda n_obs, n_vars, seed: synthetic.independent_noise(n_obs, n_vars, seed=seed),
}


@cli.command("simulate")
@click.option("--kind", type=click.Choice(sorted(_SIMULATORS)), default="latent", show_default=True)
@click.option("--n-obs", type=click.IntRange(min=3), default=1000, show_default=True)
@click.option("--n-vars", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--output", "output_path", type=click.Path(dir_okay=False), default=None)
@_fail_on_error
def simulate_command(kind: str, n_obs: int, n_vars: int, seed: int, output_path: Optional[str]):
    """Write synthetic data with known higher-order structure."""
    data = _SIMULATORS[kind](n_obs, n_vars, seed)
    config = RunConfig(command=f"simulate:{kind}", seed=seed, output_path=output_path, output_format="csv")
    _emit(report_io.render_csv(data.to_frame(), config), output_path)


@cli.command("fetch-fred")
@click.option("--output", "output_path", type=click.Path(dir_okay=False), required=True)
@click.option("--start", default=DEFAULT_START, show_default=True)
@click.option("--end", default=DEFAULT_END, show_default=True)
@click.option("--series", "series_ids", multiple=True, help="FRED mnemonics (default: the 14 indicators).")
@_fail_on_error
def fetch_fred_command(output_path: str, start: str, end: str, series_ids: Tuple[str, ...]):
    """Download the quarterly FRED indicators into one CSV (needs FRED_API_KEY)."""
    series_ids = series_ids or tuple(FRED_SERIES)
    frame = FredClient().fetch_panel(series_ids, start, end)
    config = RunConfig(command="fetch-fred", columns=tuple(series_ids), output_path=output_path, output_format="csv")
    _emit(report_io.render_csv(frame, config), output_path)
    click.echo(f"{len(frame)} quarters x {len(series_ids)} series -> {output_path}")


def main() -> None:
    cli(obj={})


if __name__ == "__main__":
    main()
