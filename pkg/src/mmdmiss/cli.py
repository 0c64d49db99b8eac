"""Command-line interface.

Subcommands: fit, table, figure1, check-bounds, simulate.
Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
3 bound-check violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .config import SgdSettings, load_config
from .data import load_csv
from .estimator import SgdConfig, fit
from .exceptions import (
    BandwidthError,
    ConfigError,
    DataError,
    NumericalError,
    ShapeError,
    UnsupportedMechanismError,
)
from .experiments import check_bounds, run_figure1, run_table, simulate_csv
from .kernels import KernelSpec, median_heuristic_bandwidth
from .models import GaussianMeanModel

_USAGE_ERRORS = (
    ConfigError,
    DataError,
    ShapeError,
    BandwidthError,
    UnsupportedMechanismError,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="mmdmiss", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="estimate model parameters from a CSV")
    p_fit.add_argument("--input", required=True, help="CSV file with NA cells")
    p_fit.add_argument("--na-token", default="NA")
    p_fit.add_argument("--model", default="gaussian-mean", choices=["gaussian-mean"])
    p_fit.add_argument(
        "--bandwidth", default="median",
        help="'median' or a positive bandwidth value",
    )
    p_fit.add_argument("--steps", type=int, default=2000)
    p_fit.add_argument("--samples", type=int, default=50)
    p_fit.add_argument(
        "--step-size", type=float, default=None,
        help="eta (constant) or eta_0 (inverse-sqrt); default 0.1 * gamma^2",
    )
    p_fit.add_argument(
        "--schedule", default="inverse_sqrt", choices=["constant", "inverse_sqrt"]
    )
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument(
        "--init", default="data",
        help="'data' for data-driven or comma-separated coordinates",
    )
    p_fit.add_argument("--box-radius", type=float, default=100.0)
    p_fit.add_argument("--no-averaging", action="store_true")
    p_fit.add_argument(
        "--drop-empty-rows", action="store_true",
        help="drop fully-missing rows with a warning instead of failing",
    )
    p_fit.add_argument("--output", default=None, help="write result JSON here")

    p_table = sub.add_parser("table", help="run a scenario grid and tabulate RMSEs")
    p_table.add_argument("--config", required=True, help="JSON experiment config")
    p_table.add_argument("--replications", type=int, default=None)
    p_table.add_argument("--workers", type=int, default=1)
    p_table.add_argument("--out-dir", required=True)

    p_fig = sub.add_parser(
        "figure1", help="univariate mechanism-contamination sweep over n"
    )
    p_fig.add_argument(
        "--n-grid", default="100,300,1000,3000,10000",
        help="comma-separated sample sizes",
    )
    p_fig.add_argument("--replications", type=int, default=1000)
    p_fig.add_argument("--out-dir", required=True)
    p_fig.add_argument("--seed", type=int, default=20250810)
    p_fig.add_argument("--workers", type=int, default=1)
    p_fig.add_argument("--steps", type=int, default=300)
    p_fig.add_argument("--samples", type=int, default=50)

    p_bounds = sub.add_parser("check-bounds", help="verify the error bounds")
    p_bounds.add_argument(
        "--scenario-set", default="default",
        help="'default' or comma-separated scenario names",
    )
    p_bounds.add_argument("--out-dir", required=True)
    p_bounds.add_argument("--seed", type=int, default=20250810)
    p_bounds.add_argument("--replications", type=int, default=50)
    p_bounds.add_argument("--workers", type=int, default=1)

    p_sim = sub.add_parser("simulate", help="emit a synthetic masked CSV")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--output", required=True)
    p_sim.add_argument("--n", type=int, default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--na-token", default="NA")

    return parser


def _cmd_fit(args) -> int:
    dataset = load_csv(
        args.input, na_token=args.na_token, drop_empty_rows=args.drop_empty_rows
    )
    if dataset.n_dropped_rows:
        print(
            f"warning: dropped {dataset.n_dropped_rows} fully-missing row(s)",
            file=sys.stderr,
        )
    if args.bandwidth == "median":
        gamma = median_heuristic_bandwidth(dataset, max_rows=2000)
    else:
        try:
            gamma = float(args.bandwidth)
        except ValueError:
            raise ConfigError(
                f"--bandwidth must be 'median' or a number, got {args.bandwidth!r}"
            ) from None
    kernel = KernelSpec(gamma=gamma)
    model = GaussianMeanModel(dataset.d, args.box_radius)
    theta_init = None
    if args.init != "data":
        theta_init = np.asarray(
            [float(v) for v in args.init.split(",")], dtype=float
        )
    cfg = SgdConfig(
        steps=args.steps,
        model_samples_per_step=args.samples,
        schedule=args.schedule,
        step_size=args.step_size,
        seed=args.seed,
        theta_init=theta_init,
        averaging=not args.no_averaging,
    )
    result = fit(cfg, dataset, kernel, model)
    payload = {
        "theta_hat": [float(v) for v in result.theta_hat],
        "bandwidth_used": result.bandwidth_used,
        "final_gradient_norm": result.final_gradient_norm,
        "n_observations": len(dataset),
        "criterion_trace": [[t, v] for t, v in result.criterion_trace],
    }
    text = json.dumps(payload, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_table(args) -> int:
    config = load_config(args.config)
    if args.replications is not None:
        config.replications = int(args.replications)
        if config.replications < 1:
            raise ConfigError("replications must be >= 1")
    table = run_table(config, workers=args.workers, out_dir=args.out_dir)
    print(table.to_text(), end="")
    bad = [c for c in table.cells if not math.isfinite(c.rmse)]
    if bad:
        print(
            f"error: {len(bad)} table cell(s) have no finite replicates",
            file=sys.stderr,
        )
        return 2
    return 0


def _cmd_figure1(args) -> int:
    n_grid = [int(v) for v in args.n_grid.split(",") if v.strip()]
    if not n_grid:
        raise ConfigError("--n-grid must list at least one sample size")
    curves = run_figure1(
        n_grid,
        replications=args.replications,
        seed=args.seed,
        workers=args.workers,
        out_dir=args.out_dir,
        sgd=SgdSettings(steps=args.steps, samples=args.samples),
    )
    print(curves.to_csv_text(), end="")
    return 0


def _cmd_check_bounds(args) -> int:
    report = check_bounds(
        scenario_set=args.scenario_set,
        seed=args.seed,
        replications=args.replications,
        workers=args.workers,
        out_dir=args.out_dir,
    )
    print(report.to_text(), end="")
    return 0 if report.all_passed else 3


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    dataset = simulate_csv(
        config,
        args.scenario,
        args.output,
        n=args.n,
        seed=args.seed,
        na_token=args.na_token,
    )
    print(
        f"wrote {len(dataset)} rows (d={dataset.d}, "
        f"{dataset.n_dropped_rows} fully-missing dropped) to {args.output}"
    )
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "table":
            return _cmd_table(args)
        if args.command == "figure1":
            return _cmd_figure1(args)
        if args.command == "check-bounds":
            return _cmd_check_bounds(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
