"""Replicated experiment harness: seeded replications, RMSE tables, the
univariate sample-size sweep, and empirical verification of the error
bounds.

Every replicate derives its generators from (master seed, scenario index,
replicate index) alone, so results are independent of execution order and
of the worker count; CSV output is byte-identical for any --workers value.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .baselines import (
    average_of_extremes,
    coordinate_median,
    ignoring_mle_gaussian,
    truncated_mle_limit,
)
from .config import ExperimentConfig, SgdSettings
from .data import Dataset, save_csv
from .estimator import SgdConfig, fit
from .exceptions import ConfigError
from .kernels import (
    KernelSpec,
    gaussian_mmd2_closed_form,
    gaussian_mmd_distance_to_parameter,
    median_heuristic_bandwidth,
)
from .mechanisms import (
    AdversarialMechanism,
    DataContamination,
    HuberMixtureMechanism,
    McarMechanism,
    Mechanism,
    TruncationMechanism,
    apply_mechanism,
    deviation_to_mcar,
    draw_complete,
)
from .models import GaussianMeanModel

ESTIMATOR_NAMES = ("mmd", "mle", "median", "extremes")


# ---------------------------------------------------------------------------
# single replication
# ---------------------------------------------------------------------------


@dataclass
class ReplicateRecord:
    scenario: str
    rep: int
    errors: dict[str, float]
    thetas: dict[str, np.ndarray]
    failures: dict[str, str] = field(default_factory=dict)


def _fit_mmd(
    dataset: Dataset,
    d: int,
    sgd: SgdSettings,
    bandwidth,
    box_radius: float,
    seed: int,
) -> np.ndarray:
    if bandwidth == "median":
        gamma = median_heuristic_bandwidth(dataset, max_rows=2000)
    else:
        gamma = float(bandwidth)
    kernel = KernelSpec(gamma=gamma)
    model = GaussianMeanModel(d, box_radius)
    cfg = SgdConfig(
        steps=sgd.steps,
        model_samples_per_step=sgd.samples,
        schedule=sgd.schedule,
        step_size=sgd.step_size,
        seed=seed,
        averaging=sgd.averaging,
    )
    return fit(cfg, dataset, kernel, model).theta_hat


def _run_estimator(name, dataset, config: ExperimentConfig, seed: int) -> np.ndarray:
    if name == "mmd":
        return _fit_mmd(
            dataset, config.d, config.sgd, config.bandwidth, config.box_radius, seed
        )
    if name == "mle":
        return ignoring_mle_gaussian(dataset)
    if name == "median":
        return coordinate_median(dataset)
    if name == "extremes":
        return np.asarray([average_of_extremes(dataset)])
    raise ConfigError(f"unknown estimator {name!r}")


def _replicate_seeds(master_seed: int, scenario_idx: int, rep_idx: int, n_estimators: int):
    ss = np.random.SeedSequence(master_seed, spawn_key=(scenario_idx, rep_idx))
    children = ss.spawn(2 + n_estimators)
    data_rng = np.random.default_rng(children[0])
    mech_rng = np.random.default_rng(children[1])
    fit_seeds = [
        int(c.generate_state(1, dtype=np.uint64)[0]) for c in children[2:]
    ]
    return data_rng, mech_rng, fit_seeds


def run_replication(
    config: ExperimentConfig, scenario_idx: int, rep_idx: int
) -> ReplicateRecord:
    """One cell sample: draw complete rows, mask them, run every estimator,
    record the L2 parameter errors. Estimator failures are recorded, not
    raised. Deterministic given (config, scenario index, replicate index)."""
    scenario = config.scenarios[scenario_idx]
    data_rng, mech_rng, fit_seeds = _replicate_seeds(
        config.seed, scenario_idx, rep_idx, len(config.estimators)
    )
    rows = draw_complete(config.n, config.theta_star, scenario.contamination, data_rng)
    mechanism = config.build_mechanism(scenario)
    dataset = apply_mechanism(rows, mechanism, mech_rng)
    errors: dict[str, float] = {}
    thetas: dict[str, np.ndarray] = {}
    failures: dict[str, str] = {}
    for k, name in enumerate(config.estimators):
        try:
            theta_hat = _run_estimator(name, dataset, config, fit_seeds[k])
            target = (
                config.theta_star
                if theta_hat.size == config.d
                else config.theta_star[: theta_hat.size]
            )
            errors[name] = float(np.linalg.norm(theta_hat - target))
            thetas[name] = theta_hat
        except Exception as exc:  # recorded per-replicate, not fatal
            errors[name] = math.nan
            failures[name] = f"{type(exc).__name__}: {exc}"
    return ReplicateRecord(
        scenario=scenario.name, rep=rep_idx, errors=errors, thetas=thetas,
        failures=failures,
    )


# ---------------------------------------------------------------------------
# parallel execution
# ---------------------------------------------------------------------------


def _table_task(args):
    config, si, ri = args
    return si, ri, run_replication(config, si, ri)


def _parallel_map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunksize = max(1, len(tasks) // (8 * workers))
        return list(pool.map(fn, tasks, chunksize=chunksize))


def _format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    return repr(float(x))


# ---------------------------------------------------------------------------
# RMSE tables
# ---------------------------------------------------------------------------


@dataclass
class TableCell:
    scenario: str
    estimator: str
    rmse: float
    std: float
    n_replications: int
    n_failed: int
    errors: np.ndarray


@dataclass
class ResultTable:
    cells: list[TableCell]
    scenario_names: list[str]
    estimator_names: list[str]
    metadata: dict

    def cell(self, scenario: str, estimator: str) -> TableCell:
        for c in self.cells:
            if c.scenario == scenario and c.estimator == estimator:
                return c
        raise KeyError((scenario, estimator))

    def to_csv_text(self) -> str:
        lines = ["scenario,estimator,rmse,std,n_replications"]
        for c in self.cells:
            lines.append(
                f"{c.scenario},{c.estimator},{_format_float(c.rmse)},"
                f"{_format_float(c.std)},{c.n_replications}"
            )
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        """Plain-text table, estimators as rows and scenarios as columns."""
        width = max(12, max((len(s) for s in self.scenario_names), default=12) + 2)
        head = "estimator".ljust(10) + "".join(
            s.rjust(width) for s in self.scenario_names
        )
        lines = [head]
        for est in self.estimator_names:
            row = est.ljust(10)
            for s in self.scenario_names:
                c = self.cell(s, est)
                row += f"{c.rmse:.2f} ({c.std:.2f})".rjust(width)
            lines.append(row)
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "table.csv"), "w", encoding="utf-8") as fh:
            fh.write(self.to_csv_text())
        with open(os.path.join(out_dir, "table.txt"), "w", encoding="utf-8") as fh:
            fh.write(self.to_text())
        with open(
            os.path.join(out_dir, "table_meta.json"), "w", encoding="utf-8"
        ) as fh:
            json.dump(self.metadata, fh, indent=2, default=str)


def _config_hash(config: ExperimentConfig) -> str:
    blob = repr(config).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def run_table(
    config: ExperimentConfig, workers: int = 1, out_dir=None
) -> ResultTable:
    """Run the full scenario grid and aggregate per-cell RMSEs.

    rmse is sqrt(mean squared L2 error) over the finite replicates; std is
    the across-replicate standard deviation of the L2 error. Non-finite
    replicate results are excluded and counted.
    """
    t0 = time.perf_counter()
    tasks = [
        (config, si, ri)
        for si in range(len(config.scenarios))
        for ri in range(config.replications)
    ]
    results = _parallel_map(_table_task, tasks, workers)
    by_key: dict[tuple[int, int], ReplicateRecord] = {
        (si, ri): rec for si, ri, rec in results
    }
    cells = []
    failure_notes = {}
    for si, scenario in enumerate(config.scenarios):
        for est in config.estimators:
            errs = np.asarray(
                [by_key[(si, ri)].errors[est] for ri in range(config.replications)]
            )
            ok = np.isfinite(errs)
            n_failed = int((~ok).sum())
            if n_failed:
                notes = [
                    by_key[(si, ri)].failures.get(est)
                    for ri in range(config.replications)
                    if not np.isfinite(by_key[(si, ri)].errors[est])
                ]
                failure_notes[f"{scenario.name}/{est}"] = notes[:5]
            valid = errs[ok]
            rmse = float(np.sqrt((valid**2).mean())) if valid.size else math.nan
            std = float(valid.std(ddof=1)) if valid.size > 1 else math.nan
            cells.append(
                TableCell(
                    scenario=scenario.name,
                    estimator=est,
                    rmse=rmse,
                    std=std,
                    n_replications=int(ok.sum()),
                    n_failed=n_failed,
                    errors=errs,
                )
            )
    metadata = {
        "config_hash": _config_hash(config),
        "seed": config.seed,
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "failures": failure_notes,
    }
    table = ResultTable(
        cells=cells,
        scenario_names=[s.name for s in config.scenarios],
        estimator_names=list(config.estimators),
        metadata=metadata,
    )
    if out_dir is not None:
        table.write(out_dir)
    return table


# ---------------------------------------------------------------------------
# sample-size sweep (univariate mechanism-contamination comparison)
# ---------------------------------------------------------------------------


FIGURE_MECHANISMS = ("huber", "adversarial")
FIGURE_ESTIMATORS = ("mmd", "mle", "extremes")


def _figure_mechanism(name: str, alpha: float, eps: float) -> Mechanism:
    if name == "huber":
        base = McarMechanism({(0,): alpha, (1,): 1.0 - alpha})
        return HuberMixtureMechanism(base, TruncationMechanism(lower=0.0), eps)
    if name == "adversarial":
        return AdversarialMechanism(alpha, eps)
    raise ConfigError(f"unknown sweep mechanism {name!r}")


@dataclass
class FigureCurves:
    """theta-hat replicate values per (mechanism, estimator, n) cell."""

    cells: dict[tuple[str, str, int], np.ndarray]
    mechanisms: list[str]
    estimators: list[str]
    n_grid: list[int]
    metadata: dict

    def quantiles(self, mechanism: str, estimator: str, n: int):
        vals = self.cells[(mechanism, estimator, n)]
        vals = vals[np.isfinite(vals)]
        return tuple(np.quantile(vals, (0.25, 0.5, 0.75)))

    def median_abs_error(self, mechanism: str, estimator: str, n: int) -> float:
        vals = self.cells[(mechanism, estimator, n)]
        return float(np.median(np.abs(vals[np.isfinite(vals)])))

    def to_csv_text(self) -> str:
        lines = ["mechanism,estimator,n,q25,median,q75"]
        for mech in self.mechanisms:
            for est in self.estimators:
                for n in self.n_grid:
                    q25, med, q75 = self.quantiles(mech, est, n)
                    lines.append(
                        f"{mech},{est},{n},{_format_float(q25)},"
                        f"{_format_float(med)},{_format_float(q75)}"
                    )
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "figure1.csv"), "w", encoding="utf-8") as fh:
            fh.write(self.to_csv_text())
        with open(
            os.path.join(out_dir, "figure1_meta.json"), "w", encoding="utf-8"
        ) as fh:
            json.dump(self.metadata, fh, indent=2, default=str)


def _figure_task(args):
    (mech_idx, mech_name, n_idx, n, rep, seed, alpha, eps, estimators, sgd, gamma) = args
    ss = np.random.SeedSequence(seed, spawn_key=(mech_idx, n_idx, rep))
    children = ss.spawn(2 + len(estimators))
    data_rng = np.random.default_rng(children[0])
    mech_rng = np.random.default_rng(children[1])
    rows = draw_complete(n, np.zeros(1), DataContamination.none(), data_rng)
    mechanism = _figure_mechanism(mech_name, alpha, eps)
    dataset = apply_mechanism(rows, mechanism, mech_rng)
    out = {}
    for k, est in enumerate(estimators):
        try:
            if est == "mmd":
                fit_seed = int(children[2 + k].generate_state(1, dtype=np.uint64)[0])
                theta = _fit_mmd(dataset, 1, sgd, gamma, 100.0, fit_seed)[0]
            elif est == "mle":
                theta = ignoring_mle_gaussian(dataset)[0]
            elif est == "extremes":
                theta = average_of_extremes(dataset)
            else:
                raise ConfigError(f"unknown estimator {est!r}")
            out[est] = float(theta)
        except Exception:
            out[est] = math.nan
    return (mech_name, n, rep), out


def run_figure1(
    n_grid,
    replications: int,
    seed: int,
    workers: int = 1,
    out_dir=None,
    mechanisms=FIGURE_MECHANISMS,
    estimators=FIGURE_ESTIMATORS,
    alpha: float = 0.5,
    eps: float = 0.1,
    sgd: SgdSettings | None = None,
    gamma: float = math.sqrt(2.0),
) -> FigureCurves:
    """Estimate the univariate Gaussian mean (true value 0) over a grid of
    sample sizes under the two mechanism-contamination settings, and record
    replicate medians/quartiles per estimator."""
    if sgd is None:
        sgd = SgdSettings(steps=300, samples=50)
    n_grid = [int(n) for n in n_grid]
    t0 = time.perf_counter()
    tasks = [
        (mi, mech, ni, n, rep, seed, alpha, eps, tuple(estimators), sgd, gamma)
        for mi, mech in enumerate(mechanisms)
        for ni, n in enumerate(n_grid)
        for rep in range(replications)
    ]
    results = dict(_parallel_map(_figure_task, tasks, workers))
    cells = {}
    for mech in mechanisms:
        for est in estimators:
            for n in n_grid:
                cells[(mech, est, n)] = np.asarray(
                    [results[(mech, n, rep)][est] for rep in range(replications)]
                )
    curves = FigureCurves(
        cells=cells,
        mechanisms=list(mechanisms),
        estimators=list(estimators),
        n_grid=n_grid,
        metadata={
            "seed": seed,
            "alpha": alpha,
            "eps": eps,
            "replications": replications,
            "wall_time_s": round(time.perf_counter() - t0, 3),
        },
    )
    if out_dir is not None:
        curves.write(out_dir)
    return curves

# ---------------------------------------------------------------------------
# bound verification
# ---------------------------------------------------------------------------


BOUND_SCENARIOS = (
    "truncation-mmd-limit",
    "truncation-mmd-inversion",
    "truncation-mle-limit",
    "mcar-finite-sample",
    "huber-mechanism",
    "adversarial-mechanism",
    "mle-truncation-tv",
)

_GAMMA_1D = math.sqrt(2.0)
_MC_SLACK = 1.2  # 20% multiplicative Monte-Carlo slack on the bounds


@dataclass
class BoundCheck:
    name: str
    params: dict
    lhs: float
    rhs: float
    slack: float
    passed: bool
    note: str = ""


@dataclass
class BoundReport:
    checks: list[BoundCheck]
    metadata: dict

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_csv_text(self) -> str:
        lines = ["check,params,lhs,rhs,slack,passed"]
        for c in self.checks:
            params = ";".join(f"{k}={v}" for k, v in sorted(c.params.items()))
            lines.append(
                f"{c.name},{params},{_format_float(c.lhs)},{_format_float(c.rhs)},"
                f"{_format_float(c.slack)},{int(c.passed)}"
            )
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "VIOLATED"
            params = ", ".join(f"{k}={v}" for k, v in sorted(c.params.items()))
            lines.append(
                f"[{status}] {c.name} ({params}): lhs={c.lhs:.4f} "
                f"<= {c.slack:g} * rhs={c.rhs:.4f}"
                + (f"  -- {c.note}" if c.note else "")
            )
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "bounds.csv"), "w", encoding="utf-8") as fh:
            fh.write(self.to_csv_text())
        with open(os.path.join(out_dir, "bounds.txt"), "w", encoding="utf-8") as fh:
            fh.write(self.to_text())


def _bound_fit_task(args):
    """One univariate fit for the bound harness; returns theta-hat."""
    key, rep, n, mechanism, sgd, seed, scen_idx, case_idx = args
    ss = np.random.SeedSequence(seed, spawn_key=(977, scen_idx, case_idx, rep))
    data_ss, mech_ss, fit_ss = ss.spawn(3)
    rows = draw_complete(
        n, np.zeros(1), DataContamination.none(), np.random.default_rng(data_ss)
    )
    dataset = apply_mechanism(rows, mechanism, np.random.default_rng(mech_ss))
    fit_seed = int(fit_ss.generate_state(1, dtype=np.uint64)[0])
    theta = _fit_mmd(dataset, 1, sgd, _GAMMA_1D, 100.0, fit_seed)[0]
    return key, rep, theta


def _mean_distance(thetas: np.ndarray) -> float:
    """Mean closed-form MMD distance of the fitted means to the truth 0."""
    d2 = np.asarray(
        [gaussian_mmd2_closed_form(t, 0.0, _GAMMA_1D) for t in thetas]
    )
    return float(np.sqrt(d2).mean())


def _gaussian_tv(delta: float) -> float:
    """Total-variation distance between N(a, 1) and N(b, 1), |a-b|=delta."""
    return float(2.0 * ndtr(abs(delta) / 2.0) - 1.0)


def check_bounds(
    scenario_set="default",
    seed: int = 20250810,
    replications: int = 50,
    n_default: int = 10_000,
    workers: int = 1,
    out_dir=None,
) -> BoundReport:
    """Empirically verify the robustness/consistency error bounds on the
    univariate Gaussian location model (bandwidth sqrt(2), where squared
    MMD and mean distance convert exactly into each other).

    Left sides are Monte-Carlo averages over fitted replicates; right sides
    are the analytic bounds. A check passes when lhs <= slack * rhs, with a
    20% Monte-Carlo slack on the inequality-type bounds.
    """
    if scenario_set in ("default", "all", None):
        wanted = list(BOUND_SCENARIOS)
    else:
        if isinstance(scenario_set, str):
            wanted = [s.strip() for s in scenario_set.split(",") if s.strip()]
        else:
            wanted = list(scenario_set)
        unknown = [w for w in wanted if w not in BOUND_SCENARIOS]
        if unknown:
            raise ConfigError(
                f"unknown bound scenario(s) {unknown}; choose from {BOUND_SCENARIOS}"
            )
    if replications < 2:
        raise ConfigError("bound checks need at least 2 replications")
    t0 = time.perf_counter()
    sgd = SgdSettings(steps=300, samples=50)
    sgd_big = SgdSettings(steps=250, samples=25)

    # assemble all fit jobs first so they can run in one parallel pass
    jobs = []
    job_specs: dict[tuple, dict] = {}

    def add_jobs(key, scen_idx, case_idx, n, mechanism, sgd_settings, reps):
        job_specs[key] = {"n": n}
        for rep in range(reps):
            jobs.append((key, rep, n, mechanism, sgd_settings, seed, scen_idx, case_idx))

    if "truncation-mmd-limit" in wanted:
        for ci, eps in enumerate((0.02, 0.05, 0.1)):
            a = float(ndtri(eps))  # P[X <= a] = eps is masked
            add_jobs(("trunc", eps), 0, ci, n_default,
                     TruncationMechanism(lower=a), sgd, replications)
    if "truncation-mmd-inversion" in wanted:
        a = float(ndtri(0.05))
        add_jobs(("trunc-inv", 0.05), 1, 0, 100_000,
                 TruncationMechanism(lower=a), sgd_big, replications)
    if "mcar-finite-sample" in wanted:
        for ci, n in enumerate((100, 1000, 10_000)):
            add_jobs(("mcar", n), 3, ci, n,
                     McarMechanism({(0,): 0.5, (1,): 0.5}), sgd, replications)
    if "huber-mechanism" in wanted:
        mech = HuberMixtureMechanism(
            McarMechanism({(0,): 0.5, (1,): 0.5}),
            TruncationMechanism(lower=0.0),
            0.1,
        )
        add_jobs(("huber",), 4, 0, n_default, mech, sgd, replications)
    if "adversarial-mechanism" in wanted:
        add_jobs(("adv",), 5, 0, n_default,
                 AdversarialMechanism(0.5, 0.1), sgd, replications)

    results = _parallel_map(_bound_fit_task, jobs, workers)
    thetas: dict[tuple, np.ndarray] = {}
    for key in job_specs:
        vals = sorted((rep, th) for k, rep, th in results if k == key)
        thetas[key] = np.asarray([th for _, th in vals])

    checks: list[BoundCheck] = []

    if "truncation-mmd-limit" in wanted:
        # fully deterministic masking of the eps lower tail: distance of the
        # population limit to the truth is at most 4 eps
        for eps in (0.02, 0.05, 0.1):
            lhs = _mean_distance(thetas[("trunc", eps)])
            rhs = 4.0 * eps
            checks.append(
                BoundCheck(
                    name="truncation-mmd-limit",
                    params={"eps": eps, "n": n_default, "reps": replications},
                    lhs=lhs, rhs=rhs, slack=_MC_SLACK,
                    passed=lhs <= _MC_SLACK * rhs,
                )
            )

    if "truncation-mmd-inversion" in wanted:
        # same bound mapped through the distance inversion at gamma=sqrt(2):
        # |theta - theta*| <= sqrt(-6 log(1 - 8 sqrt(3) eps^2))
        eps = 0.05
        lhs = float(np.abs(thetas[("trunc-inv", eps)]).mean())
        rhs = math.sqrt(-6.0 * math.log(1.0 - 8.0 * math.sqrt(3.0) * eps * eps))
        checks.append(
            BoundCheck(
                name="truncation-mmd-inversion",
                params={"eps": eps, "n": 100_000, "reps": replications},
                lhs=lhs, rhs=rhs, slack=_MC_SLACK,
                passed=lhs <= _MC_SLACK * rhs,
            )
        )

    if "truncation-mle-limit" in wanted:
        # the observed-entry mean under lower-tail masking converges to
        # phi(a) / (1 - Phi(a)); simulation must match within 0.02
        rng_master = np.random.SeedSequence(seed, spawn_key=(977, 2, 0))
        for eps in (0.1, 0.5):
            a = float(ndtri(eps))
            sims = []
            for rep, child in enumerate(rng_master.spawn(5)):
                rng = np.random.default_rng(child)
                x = rng.standard_normal(100_000)
                sims.append(float(x[x > a].mean()))
            sim = float(np.mean(sims))
            limit = truncated_mle_limit(a)
            diff = abs(sim - limit)
            checks.append(
                BoundCheck(
                    name="truncation-mle-limit",
                    params={"eps": eps, "n": 100_000, "reps": 5},
                    lhs=diff, rhs=0.02, slack=1.0,
                    passed=diff <= 0.02,
                    note=f"sim={sim:.6f} limit={limit:.6f}",
                )
            )

    if "mcar-finite-sample" in wanted:
        # well-specified MCAR: expected distance <= 2 sqrt(2) / sqrt(n pi)
        for n in (100, 1000, 10_000):
            lhs = _mean_distance(thetas[("mcar", n)])
            rhs = 2.0 * math.sqrt(2.0) / math.sqrt(n * 0.5)
            checks.append(
                BoundCheck(
                    name="mcar-finite-sample",
                    params={"n": n, "alpha": 0.5, "reps": replications},
                    lhs=lhs, rhs=rhs, slack=_MC_SLACK,
                    passed=lhs <= _MC_SLACK * rhs,
                )
            )

    if "huber-mechanism" in wanted:
        # MCAR contaminated by an arbitrary conditional mask law at rate eps:
        # E[D] <= 4 eps_data + 2 eps / (alpha (1 - eps)) + 2 sqrt(2)/sqrt(n alpha (1-eps))
        eps, alpha = 0.1, 0.5
        lhs = _mean_distance(thetas[("huber",)])
        rhs = (
            2.0 * eps / (alpha * (1.0 - eps))
            + 2.0 * math.sqrt(2.0) / math.sqrt(n_default * alpha * (1.0 - eps))
        )
        checks.append(
            BoundCheck(
                name="huber-mechanism",
                params={"eps": eps, "alpha": alpha, "n": n_default,
                        "reps": replications},
                lhs=lhs, rhs=rhs, slack=_MC_SLACK,
                passed=lhs <= _MC_SLACK * rhs,
            )
        )
        # and the same bound mapped to parameter space
        lhs_p = float(np.abs(thetas[("huber",)]).mean())
        rhs_p = gaussian_mmd_distance_to_parameter(rhs * rhs, _GAMMA_1D)
        checks.append(
            BoundCheck(
                name="huber-mechanism-parameter",
                params={"eps": eps, "alpha": alpha, "n": n_default,
                        "reps": replications},
                lhs=lhs_p, rhs=rhs_p, slack=_MC_SLACK,
                passed=lhs_p <= _MC_SLACK * rhs_p,
            )
        )

    if "adversarial-mechanism" in wanted:
        # adversarially rewritten MCAR masks:
        # E[D] <= 4 eps_data + 6 eps/(alpha - eps) + 2 sqrt(2)/sqrt(n alpha)
        eps, alpha = 0.1, 0.5
        lhs = _mean_distance(thetas[("adv",)])
        rhs = 6.0 * eps / (alpha - eps) + 2.0 * math.sqrt(2.0) / math.sqrt(
            n_default * alpha
        )
        checks.append(
            BoundCheck(
                name="adversarial-mechanism",
                params={"eps": eps, "alpha": alpha, "n": n_default,
                        "reps": replications},
                lhs=lhs, rhs=rhs, slack=_MC_SLACK,
                passed=lhs <= _MC_SLACK * rhs,
            )
        )

    if "mle-truncation-tv" in wanted:
        # squared TV distance of the ignoring-MLE limit to the truth is at
        # most 2 V[pi(X)] / pi^2; V and pi estimated by the deviation report
        for ci, eps in enumerate((0.1, 0.3)):
            a = float(ndtri(eps))
            mech = TruncationMechanism(lower=a)
            rng_master = np.random.SeedSequence(seed, spawn_key=(977, 6, ci))
            kids = rng_master.spawn(6)
            sims = []
            for child in kids[:5]:
                rng = np.random.default_rng(child)
                x = rng.standard_normal(100_000)
                sims.append(float(x[x > a].mean()))
            report = deviation_to_mcar(
                mech, np.zeros(1), 200_000, np.random.default_rng(kids[5])
            )
            entry = report.entry((0,))
            lhs = _gaussian_tv(float(np.mean(sims))) ** 2
            rhs = 2.0 * entry.var / entry.pi**2
            checks.append(
                BoundCheck(
                    name="mle-truncation-tv",
                    params={"eps": eps, "n": 100_000},
                    lhs=lhs, rhs=rhs, slack=_MC_SLACK,
                    passed=lhs <= _MC_SLACK * rhs,
                )
            )

    report = BoundReport(
        checks=checks,
        metadata={
            "seed": seed,
            "replications": replications,
            "n_default": n_default,
            "scenarios": wanted,
            "wall_time_s": round(time.perf_counter() - t0, 3),
        },
    )
    if out_dir is not None:
        report.write(out_dir)
    return report


# ---------------------------------------------------------------------------
# synthetic-data export
# ---------------------------------------------------------------------------


def simulate_csv(
    config: ExperimentConfig,
    scenario_name: str,
    out_path,
    n: int | None = None,
    seed: int | None = None,
    na_token: str = "NA",
) -> Dataset:
    """Draw one masked dataset for the named scenario and write it as CSV."""
    names = [s.name for s in config.scenarios]
    if scenario_name not in names:
        raise ConfigError(f"unknown scenario {scenario_name!r}; have {names}")
    si = names.index(scenario_name)
    scenario = config.scenarios[si]
    use_seed = config.seed if seed is None else seed
    use_n = config.n if n is None else n
    ss = np.random.SeedSequence(use_seed, spawn_key=(si, 0))
    data_ss, mech_ss = ss.spawn(2)
    rows = draw_complete(
        use_n, config.theta_star, scenario.contamination,
        np.random.default_rng(data_ss),
    )
    mechanism = config.build_mechanism(scenario)
    dataset = apply_mechanism(rows, mechanism, np.random.default_rng(mech_ss))
    save_csv(dataset, out_path, na_token=na_token)
    return dataset
