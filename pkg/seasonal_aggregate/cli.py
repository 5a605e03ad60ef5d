"""
Command-line interface for seasonal-aggregate.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from .asymptotics import (
    TOTAL_MEMORY,
    asymptotic_intervals,
    fisher_information,
    parametric_bootstrap,
)
from .config import RunConfig, build_run_config, read_kv_file
from .errors import InputError, SeasonalAggregateError
from .forecast import compare_forecasts, predict
from .ingest import ingest, read_series, write_series
from .model import orders_from_kv, parse_value, validate
from .report import (
    CELL_HEADERS,
    INTERVAL_HEADERS,
    cell_rows,
    fit_items,
    format_delimited,
    format_kv,
    format_table,
    interval_items,
    interval_rows,
    output_header,
    render,
    write_output,
)
from .sample import acf, periodogram, seasonal_difference
from .simulate import McConfig, monte_carlo_table, simulate_aggregate
from .spectra import LIMITING_AGGREGATE, SpectrumKind, frequency_grid, normalization_constant, spectral_density
from .whittle import FitResult, fit

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def _header(run: RunConfig) -> List[str]:
    return output_header(__version__, run.config_hash(), run.seed, run.subcommand)


def _extra(run: RunConfig, key: str, default: Any, cast=None) -> Any:
    value = run.extra.get(key, default)
    if value is None or cast is None:
        return value
    try:
        return cast(value)
    except (TypeError, ValueError) as e:
        raise InputError(f"invalid value for {key}: {value!r}") from e


def _kind(run: RunConfig) -> SpectrumKind:
    return SpectrumKind.parse(str(_extra(run, "kind", "limiting")))


def _diff_orders(run: RunConfig):
    return orders_from_kv(run.extra, run.spec.c, run.K)


def _series(run: RunConfig) -> np.ndarray:
    if not run.input:
        raise InputError(f"{run.subcommand} needs an input series (--input)")
    return read_series(run.input)


def _fit(run: RunConfig, y: np.ndarray) -> FitResult:
    result = fit(
        y, run.spec, run.spectrum, run.diff_bounds(),
        kind=_kind(run), orders=run.orders, threads=run.threads,
    )
    for warning in result.warnings:
        print(f"Warning: {warning}", file=sys.stderr)
    return result


def _emit(run: RunConfig, machine: str, table: Optional[str] = None) -> None:
    """Machine-readable output to -o (or stdout); the aligned table goes to stdout."""
    write_output(run.output, render(_header(run), machine))
    if table and run.output is not None:
        print(table)


def _mc_config(run: RunConfig, replicates: int = 1) -> McConfig:
    if run.spec.m is None:
        raise InputError("simulation needs the aggregation size m")
    phi1 = _extra(run, "phi1", run.params.regular_ar[0] if run.params.regular_ar else 0.0, float)
    sigma = _extra(run, "sigma", float(np.sqrt(run.params.sigma2)), float)
    fitters = _extra(run, "fitters", ["limiting"])
    if isinstance(fitters, str):
        fitters = [f.strip() for f in fitters.split(",") if f.strip()]
    return McConfig(
        d=run.params.d,
        D=run.params.D,
        phi1=phi1,
        sigma=sigma,
        z=run.spec.z,
        m=run.spec.m,
        N=_extra(run, "N", 512, int),
        replicates=replicates,
        seed=run.seed,
        fitters=tuple(fitters),
        max_order=run.K,
        M=run.spectrum.M,
        grid_size=run.spectrum.grid_size,
        threads=run.threads,
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def spectrum_command(args):
    """Handle spectrum command."""
    run = args.run
    kind = _kind(run)
    density = spectral_density(kind, run.params, _diff_orders(run), run.spec, run.spectrum)
    grid = frequency_grid(run.spectrum, _extra(run, "points", 1000, int))
    grid = grid[~density.pole_mask(grid)]
    values = density(grid)

    header = _header(run)
    if kind.family == LIMITING_AGGREGATE and _extra(run, "normalize", False, bool):
        K = normalization_constant(run.params, density.R, run.spec, run.spectrum)
        values = K * values
        header.append(f"# normalization={K!r}")
    poles = ",".join(f"{p!r}:{o!r}" for p, o in density.poles) or "none"
    header.append(f"# poles={poles}")
    write_output(run.output, render(header, format_delimited(["omega", "density"], zip(grid, values))))


def periodogram_command(args):
    """Handle periodogram command."""
    run = args.run
    u = seasonal_difference(_series(run), _diff_orders(run), run.spec)
    pg = periodogram(u)
    header = _header(run) + [f"# N={pg.n}"]
    write_output(run.output, render(header, format_delimited(["omega", "I"], zip(pg.freqs, pg.ordinates))))


def acf_command(args):
    """Handle acf command."""
    run = args.run
    u = seasonal_difference(_series(run), _diff_orders(run), run.spec)
    max_lag = _extra(run, "max_lag", min(40, u.size - 1), int)
    rho = acf(u, max_lag)
    header = _header(run) + [f"# N={u.size}"]
    write_output(run.output, render(header, format_delimited(["lag", "acf"], zip(np.arange(max_lag + 1), rho))))


def simulate_command(args):
    """Handle simulate command."""
    run = args.run
    cfg = _mc_config(run)
    y = simulate_aggregate(cfg, _extra(run, "replicate", 0, int))
    header = _header(run) + [f"# N={cfg.N}", f"# burn_in={cfg.burn_in}"]
    text = write_series(run.output, y, header)
    if run.output is None:
        print(text, end="")


def fit_command(args):
    """Handle fit command."""
    run = args.run
    result = _fit(run, _series(run))
    items = fit_items(result)
    sections = [format_table(CELL_HEADERS, cell_rows(result))]
    if _extra(run, "intervals", True, bool):
        intervals = asymptotic_intervals(result, _extra(run, "level", 0.95, float))
        items += interval_items(intervals, prefix="ci.")
        sections.append(format_table(INTERVAL_HEADERS, interval_rows(intervals)))
    _emit(run, format_kv(items), "\n\n".join(sections))


def fisher_command(args):
    """Handle fisher command."""
    run = args.run
    report = validate(run.params, run.spec)
    if not report.ok:
        raise InputError("; ".join(report.errors))
    info = fisher_information(run.params, _diff_orders(run), run.spec, run.spectrum, _kind(run), run.orders)
    N = _extra(run, "N", 512, int)
    se = info.standard_errors(N)
    items: List = [("names", list(info.names)), ("N", N)]
    items += [(f"gamma.{a}.{b}", info.matrix[i, j])
              for i, a in enumerate(info.names) for j, b in enumerate(info.names) if j >= i]
    items += [(f"se.{name}", value) for name, value in se.items()]
    memory = [n for n in info.names if n == "d" or n.startswith("D.")]
    if len(memory) > 1:
        items.append((f"se.{TOTAL_MEMORY}", info.linear_se({n: 1.0 for n in memory}, N)))
    if info.singular:
        items.append(("null_space", info.null_space.T.tolist()))
    rows = [[name] + list(info.matrix[i]) for i, name in enumerate(info.names)]
    _emit(run, format_kv(items), format_table(["Γ"] + info.names, rows))


def bootstrap_command(args):
    """Handle bootstrap command."""
    run = args.run
    y = _series(run)
    result = _fit(run, y)
    boot = parametric_bootstrap(
        result, y, B=run.replicates, seed=run.seed,
        level=_extra(run, "level", 0.95, float), threads=run.threads,
    )
    items = fit_items(result) + [("replicates", boot.replicates), ("failures", boot.failures)]
    items += interval_items(boot.intervals, prefix="boot.")
    _emit(run, format_kv(items), format_table(INTERVAL_HEADERS, interval_rows(boot.intervals)))


def forecast_command(args):
    """Handle forecast command."""
    run = args.run
    y = _series(run)
    result = _fit(run, y)
    fc = predict(y, result, _extra(run, "h", 24, int), run.spectrum, run.history_cap)
    lower, upper = fc.interval(_extra(run, "level", 0.95, float))
    steps = np.arange(1, fc.horizon + 1)
    rows = list(zip(steps, fc.point, fc.mse, lower, upper))
    header = _header(run) + [f"# model={fc.model}", f"# n_history={fc.n_history}"]
    write_output(run.output, render(header, format_delimited(["h", "point", "mse", "lower", "upper"], rows)))


def compare_command(args):
    """Handle compare command."""
    run = args.run
    y = _series(run)
    train = _extra(run, "train", 0.5, float)
    n_train = int(round(train * y.size)) if train < 1 else int(train)
    result = compare_forecasts(
        y, run.spec, n_train, _extra(run, "h", None, int), run.spectrum, run.diff_bounds(),
        proposed_orders=run.orders, history_cap=run.history_cap, threads=run.threads,
        competitor_ar=_extra(run, "competitor_ar", None, int),
    )
    steps = np.arange(1, result.ratio.size + 1)
    header = _header(run) + [f"# n_train={n_train}", f"# competitor={result.competitor.model}"]
    write_output(run.output, render(header, format_delimited(["h", "ratio"], zip(steps, result.ratio))))


def mc_table_command(args):
    """Handle mc-table command."""
    run = args.run
    table = monte_carlo_table(_mc_config(run, run.replicates))
    rows = table.rows()
    headers = list(rows[0]) if rows else ["phi1", "fitter"]
    _emit(
        run,
        format_delimited(headers, ([row[h] for h in headers] for row in rows)),
        format_table(headers, ([row[h] for h in headers] for row in rows), digits=4),
    )


def ingest_command(args):
    """Handle ingest command."""
    run = args.run
    if not run.input:
        raise InputError("ingest needs a timestamp file (--input)")
    if run.window_seconds is None:
        raise InputError("ingest needs --window-seconds")
    result = ingest(run.input, run.window_seconds, run.log_transform, run.output, _header(run))
    if run.output is None:
        print(write_series(None, result.values, _header(run)), end="")
    else:
        print(f"{result.n_windows} windows written to {run.output}")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _json_list(text: str) -> List[Any]:
    value = parse_value(text)
    return list(value) if isinstance(value, (list, tuple)) else [value]


# Flag destinations expanded into indexed keys (D -> D.1, D.2, ...)
_INDEXED = {"D": "D", "R": "R", "ar_order": "ar_order", "ma_order": "ma_order"}


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    skip = {"command", "func", "config", "verbose"}
    out: Dict[str, Any] = {}
    for dest, value in vars(args).items():
        if dest in skip or value is None:
            continue
        if dest in _INDEXED:
            for j, v in enumerate(value, start=1):
                out[f"{_INDEXED[dest]}.{j}"] = v
        else:
            out[dest] = value
    return out


def _model_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    model = parent.add_argument_group("model")
    model.add_argument("--z", type=_json_list, help="Aggregate-scale periods, e.g. '[10]' or '[1,48,336]'")
    model.add_argument("--m", type=int, help="Aggregation size")
    model.add_argument("--d", type=float, help="Regular fractional order")
    model.add_argument("--D", type=_json_list, help="Seasonal fractional orders, e.g. '[0.3]'")
    model.add_argument("--sigma2", type=float, help="Innovation variance")
    model.add_argument("--phi", type=_json_list, help="Regular AR coefficients")
    model.add_argument("--theta", type=_json_list, help="Regular MA coefficients")
    model.add_argument("--ar-order", dest="ar_order", type=_json_list, help="Seasonal AR orders per component")
    model.add_argument("--ma-order", dest="ma_order", type=_json_list, help="Seasonal MA orders per component")
    model.add_argument("--p", type=int, help="Regular AR order (SARFIMA fits)")
    model.add_argument("--q", type=int, help="Regular MA order (SARFIMA fits)")
    model.add_argument("--r", type=int, help="Regular differencing order")
    model.add_argument("--R", type=_json_list, help="Seasonal differencing orders per component")
    model.add_argument("--kind", help="Density: limiting, sarfima or aggregate:<m>")
    numeric = parent.add_argument_group("numerics")
    numeric.add_argument("--M", type=int, help="Power-sum truncation (default: SAGG_TRUNCATION)")
    numeric.add_argument("--no-tail-correction", dest="tail_correction", action="store_const", const=False,
                         help="Disable the integral tail beyond ±M")
    numeric.add_argument("--grid-size", dest="grid_size", type=int, help="Autocovariance grid size")
    numeric.add_argument("--K", type=int, help="Differencing order bound (default: SAGG_MAX_ORDER)")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seasonal-aggregate",
        description="Seasonal long-memory models for temporally aggregated series",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info logs, -vv for debug")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="Key-value config file (flags override it)")
    parser.add_argument("--seed", type=int, help="Root random seed (default: SAGG_SEED)")
    parser.add_argument("--threads", type=int, help="Worker threads (default: SAGG_THREADS)")
    parser.add_argument("-o", "--output", help="Output file (default: stdout)")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    model = _model_parent()

    spectrum_parser = subparsers.add_parser("spectrum", parents=[model], help="Evaluate a model spectral density")
    spectrum_parser.add_argument("--points", type=int, help="Grid points in (0, π] (default: 1000)")
    spectrum_parser.add_argument("--normalize", action="store_const", const=True,
                                 help="Scale the limiting density to integrate to 1")
    spectrum_parser.set_defaults(func=spectrum_command)

    pg_parser = subparsers.add_parser("periodogram", parents=[model], help="Periodogram of a differenced series")
    pg_parser.add_argument("-i", "--input", help="Series file")
    pg_parser.set_defaults(func=periodogram_command)

    acf_parser = subparsers.add_parser("acf", parents=[model], help="Sample autocorrelations of a differenced series")
    acf_parser.add_argument("-i", "--input", help="Series file")
    acf_parser.add_argument("--max-lag", dest="max_lag", type=int, help="Largest lag (default: min(40, N-1))")
    acf_parser.set_defaults(func=acf_command)

    sim_parser = subparsers.add_parser("simulate", parents=[model], help="Simulate an aggregate series")
    sim_parser.add_argument("--N", type=int, help="Fitted sample size; the burn-in is added (default: 512)")
    sim_parser.add_argument("--phi1", type=float, help="Fine-scale AR(1) coefficient")
    sim_parser.add_argument("--sigma", type=float, help="Innovation standard deviation")
    sim_parser.add_argument("--replicate", type=int, help="Replicate index (default: 0)")
    sim_parser.set_defaults(func=simulate_command)

    fit_parser = subparsers.add_parser("fit", parents=[model], help="Whittle fit over all differencing cells")
    fit_parser.add_argument("-i", "--input", help="Series file")
    fit_parser.add_argument("--level", type=float, help="Interval level (default: 0.95)")
    fit_parser.add_argument("--no-intervals", dest="intervals", action="store_const", const=False,
                            help="Skip asymptotic intervals")
    fit_parser.set_defaults(func=fit_command)

    fisher_parser = subparsers.add_parser("fisher", parents=[model], help="Fisher information and standard errors")
    fisher_parser.add_argument("--N", type=int, help="Sample size for standard errors (default: 512)")
    fisher_parser.set_defaults(func=fisher_command)

    boot_parser = subparsers.add_parser("bootstrap", parents=[model], help="Parametric frequency-domain bootstrap")
    boot_parser.add_argument("-i", "--input", help="Series file")
    boot_parser.add_argument("--replicates", type=int, help="Bootstrap replicates (default: 200)")
    boot_parser.add_argument("--level", type=float, help="Interval level (default: 0.95)")
    boot_parser.set_defaults(func=bootstrap_command)

    fc_parser = subparsers.add_parser("forecast", parents=[model], help="Fit and forecast h steps ahead")
    fc_parser.add_argument("-i", "--input", help="Series file")
    fc_parser.add_argument("--h", type=int, help="Horizon (default: 24)")
    fc_parser.add_argument("--level", type=float, help="Band level (default: 0.95)")
    fc_parser.add_argument("--history-cap", dest="history_cap", type=int, help="Observations conditioned on")
    fc_parser.set_defaults(func=forecast_command)

    cmp_parser = subparsers.add_parser("compare", parents=[model], help="Split-sample forecast efficiency ratio")
    cmp_parser.add_argument("-i", "--input", help="Series file")
    cmp_parser.add_argument("--train", type=float, help="Training length, or fraction when < 1 (default: 0.5)")
    cmp_parser.add_argument("--h", type=int, help="Horizon (default: rest of the series)")
    cmp_parser.add_argument("--history-cap", dest="history_cap", type=int, help="Observations conditioned on")
    cmp_parser.add_argument("--competitor-ar", dest="competitor_ar", type=int,
                            help="Compare against a Yule-Walker AR(p) instead of SARFIMA")
    cmp_parser.set_defaults(func=compare_command)

    mc_parser = subparsers.add_parser("mc-table", parents=[model], help="Monte Carlo table of fitted estimates")
    mc_parser.add_argument("--N", type=int, help="Fitted sample size (default: 512)")
    mc_parser.add_argument("--phi1", type=float, help="Fine-scale AR(1) coefficient")
    mc_parser.add_argument("--sigma", type=float, help="Innovation standard deviation")
    mc_parser.add_argument("--replicates", type=int, help="Replicates (default: 200)")
    mc_parser.add_argument("--fitters", help="Comma-separated: limiting,sarfima")
    mc_parser.set_defaults(func=mc_table_command)

    ingest_parser = subparsers.add_parser("ingest", help="Count timestamps per window into a series")
    ingest_parser.add_argument("-i", "--input", help="Timestamp file (epoch seconds, one per line)")
    ingest_parser.add_argument("--window-seconds", dest="window_seconds", type=float, help="Window length")
    ingest_parser.add_argument("--log-transform", dest="log_transform", action="store_const", const=True,
                               help="Apply log(count + 1)")
    ingest_parser.set_defaults(func=ingest_command)
    return parser


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None):
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        sys.exit(1)

    _configure_logging(args.verbose)

    try:
        file_values = read_kv_file(args.config) if args.config else None
        args.run = build_run_config(args.command, file_values, _overrides(args))
        args.func(args)
    except SeasonalAggregateError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(e.exit_code)
    except Exception as e:
        logger.debug("unexpected failure", exc_info=True)
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
