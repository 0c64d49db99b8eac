"""Kernel-distance M-estimation for datasets with missing values.

The criterion averages, over observations, the squared MMD between the
model law projected to the observation's pattern and the point mass at the
observed subvector (dropping the observation-only constant). Both the
criterion and its gradient are estimated by Monte Carlo over a shared batch
of model draws; fitting runs projected stochastic gradient descent over a
fixed number of steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import cross_col_sums, self_gram_row_sums
from .data import Dataset
from .exceptions import ConfigError, NumericalError, ShapeError
from .kernels import KernelSpec
from .models import ModelInterface

SCHEDULES = ("constant", "inverse_sqrt")


@dataclass
class SgdConfig:
    """Projected-SGD settings.

    ``step_size`` is eta for the constant schedule and eta_0 for the
    inverse-sqrt schedule eta_t = eta_0 / sqrt(t); None picks the default
    0.1 * gamma^2, which keeps steps commensurate with kernel curvature.
    ``theta_init=None`` means data-driven initialization: coordinate-wise
    observed means clipped to the parameter box. With ``averaging`` the
    returned estimate is the average of the last ceil(T/4) iterates.
    """

    steps: int
    model_samples_per_step: int = 50
    schedule: str = "inverse_sqrt"
    step_size: float | None = None
    seed: int = 0
    theta_init: np.ndarray | None = None
    averaging: bool = True

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.model_samples_per_step < 2:
            raise ConfigError(
                "model_samples_per_step must be >= 2 (the leave-one-out sum "
                f"divides by S - 1), got {self.model_samples_per_step}"
            )
        if self.schedule not in SCHEDULES:
            raise ConfigError(f"unknown schedule {self.schedule!r}")
        if self.step_size is not None and (
            not np.isfinite(self.step_size) or self.step_size < 0
        ):
            raise ConfigError(f"step_size must be >= 0, got {self.step_size}")
        if self.theta_init is not None:
            self.theta_init = np.asarray(self.theta_init, dtype=float).ravel()


@dataclass
class FitResult:
    theta_hat: np.ndarray
    criterion_trace: list[tuple[int, float]] = field(default_factory=list)
    final_gradient_norm: float = math.nan
    bandwidth_used: float = math.nan


def _pattern_groups(dataset: Dataset) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per pattern: (observed column indices, contiguous projected rows)."""
    groups = []
    for pattern, idx in dataset.pattern_index.items():
        cols = pattern.observed_indices()
        Xm = np.ascontiguousarray(dataset.values[np.ix_(idx, cols)])
        groups.append((cols, Xm))
    return groups


def _step_terms(
    groups, Y: np.ndarray, gamma2: float, n: int
) -> tuple[np.ndarray, float]:
    """Per-model-draw weights of the gradient estimator plus the
    Monte-Carlo criterion value, from one shared batch of draws.

    The weight of draw j is
        sum_i [ (1/(S-1)) sum_{j' != j} k(y_j, y_j')_i  -  k(x_i, y_j)_i ]
    with all kernels evaluated on the pattern of observation i; the
    criterion uses the full (diagonal included) double sum over draws.
    """
    S = Y.shape[0]
    w = np.zeros(S)
    crit = 0.0
    for cols, Xm in groups:
        Ym = Y if cols.size == Y.shape[1] else np.ascontiguousarray(Y[:, cols])
        row_sums = self_gram_row_sums(Ym, gamma2)  # diagonal included
        col_sums = cross_col_sums(Xm, Ym, gamma2)
        n_m = Xm.shape[0]
        w += n_m * (row_sums - 1.0) / (S - 1.0) - col_sums
        crit += n_m * row_sums.sum() / (S * S) - 2.0 * col_sums.sum() / S
    return w, crit / n


def _prepare(dataset, model, S):
    if len(dataset) == 0:
        raise ShapeError("dataset is empty")
    if dataset.d != model.data_dim:
        raise ShapeError(
            f"dataset dimension {dataset.d} != model dimension {model.data_dim}"
        )
    if S < 2:
        raise ConfigError(f"need at least 2 model draws per step, got {S}")
    return _pattern_groups(dataset)


def mc_criterion(
    theta,
    dataset: Dataset,
    kernel: KernelSpec,
    model: ModelInterface,
    S: int,
    rng: np.random.Generator,
) -> float:
    """Monte-Carlo estimate of the fitting criterion at theta, using one
    shared batch of S model draws for all observations."""
    groups = _prepare(dataset, model, S)
    Y = model.sample(theta, S, rng)
    _, crit = _step_terms(groups, Y, kernel.gamma2, len(dataset))
    return crit


def mc_gradient(
    theta,
    dataset: Dataset,
    kernel: KernelSpec,
    model: ModelInterface,
    S: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Unbiased Monte-Carlo estimate of the criterion gradient at theta:

        (2/(nS)) sum_i sum_j [ (1/(S-1)) sum_{j'!=j} k(y_j, y_j')_i
                               - k(x_i, y_j)_i ] * grad_theta log p_theta(y_j)
    """
    groups = _prepare(dataset, model, S)
    Y = model.sample(theta, S, rng)
    w, _ = _step_terms(groups, Y, kernel.gamma2, len(dataset))
    G = model.grad_log_density_batch(theta, Y)
    return (2.0 / (len(dataset) * S)) * (w @ G)


def data_driven_init(dataset: Dataset, model: ModelInterface) -> np.ndarray:
    """Coordinate-wise mean of observed entries (0 where a coordinate is
    never observed), clipped to the parameter set."""
    observed = ~dataset.mask
    counts = observed.sum(axis=0)
    sums = np.where(observed, dataset.values, 0.0).sum(axis=0)
    init = np.divide(sums, counts, out=np.zeros(dataset.d), where=counts > 0)
    return model.project_params(init)


def fit(
    config: SgdConfig,
    dataset: Dataset,
    kernel: KernelSpec,
    model: ModelInterface,
) -> FitResult:
    """Projected stochastic gradient descent on the missing-data criterion.

    Each step draws a fresh batch of S model samples shared across all
    observations, takes one projected gradient step, and is fully
    reproducible from the config seed.
    """
    S = config.model_samples_per_step
    groups = _prepare(dataset, model, S)
    n = len(dataset)
    gamma2 = kernel.gamma2
    rng = np.random.default_rng(config.seed)

    if config.theta_init is not None:
        theta = model.project_params(config.theta_init)
    else:
        theta = data_driven_init(dataset, model)

    eta0 = 0.1 * gamma2 if config.step_size is None else config.step_size
    T = config.steps
    trace_every = max(1, T // 100)
    tail = max(1, math.ceil(T / 4)) if config.averaging else 1
    tail_sum = np.zeros_like(theta)
    trace: list[tuple[int, float]] = []
    grad = np.zeros(model.param_dim)

    for t in range(1, T + 1):
        eta = eta0 if config.schedule == "constant" else eta0 / math.sqrt(t)
        Y = model.sample(theta, S, rng)
        w, crit = _step_terms(groups, Y, gamma2, n)
        G = model.grad_log_density_batch(theta, Y)
        grad = (2.0 / (n * S)) * (w @ G)
        theta = model.project_params(theta - eta * grad)
        if t % trace_every == 0:
            trace.append((t, crit))
        if t > T - tail:
            tail_sum += theta

    theta_hat = model.project_params(tail_sum / tail) if config.averaging else theta
    if not np.all(np.isfinite(theta_hat)):
        raise NumericalError("fit produced non-finite parameters")
    return FitResult(
        theta_hat=theta_hat,
        criterion_trace=trace,
        final_gradient_norm=float(np.linalg.norm(grad)),
        bandwidth_used=kernel.gamma,
    )
