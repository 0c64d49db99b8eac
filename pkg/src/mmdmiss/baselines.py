"""Simple comparison estimators: per-coordinate observed means (the
likelihood estimator that ignores the missingness mechanism, for identity
covariance), coordinate-wise medians, and the univariate midrange.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr  # standard normal cdf via erfc, ~1e-16 accuracy

from .data import Dataset
from .exceptions import DataError, ShapeError

BASELINE_KINDS = ("ignoring_mle_gaussian", "coordinate_median", "average_of_extremes")


def ignoring_mle_gaussian(dataset: Dataset) -> np.ndarray:
    """Coordinate-wise mean of the observed entries.

    For a Gaussian location model with identity covariance the per-pattern
    likelihoods factorize over coordinates, so maximizing the observed-data
    likelihood while ignoring the mechanism reduces to exactly this.
    """
    observed = ~dataset.mask
    counts = observed.sum(axis=0)
    never = np.flatnonzero(counts == 0)
    if never.size:
        raise DataError(f"coordinate {never[0] + 1} is never observed")
    sums = np.where(observed, dataset.values, 0.0).sum(axis=0)
    return sums / counts


def coordinate_median(dataset: Dataset) -> np.ndarray:
    """Coordinate-wise median of the observed entries (midpoint for even
    counts)."""
    observed = ~dataset.mask
    if not observed.sum(axis=0).all():
        never = np.flatnonzero(observed.sum(axis=0) == 0)
        raise DataError(f"coordinate {never[0] + 1} is never observed")
    out = np.empty(dataset.d)
    for j in range(dataset.d):
        out[j] = np.median(dataset.values[observed[:, j], j])
    return out


def average_of_extremes(dataset: Dataset) -> float:
    """Midrange (min + max)/2 of a univariate dataset's observed entries."""
    if dataset.d != 1:
        raise ShapeError(
            f"average_of_extremes is defined for d=1 only, got d={dataset.d}"
        )
    observed = dataset.values[~dataset.mask[:, 0], 0]
    if observed.size == 0:
        raise DataError("no observed entries")
    return float((observed.min() + observed.max()) / 2.0)


def _phi(x: float) -> float:
    if math.isinf(x):
        return 0.0
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def truncated_mle_limit(a: float, b: float = math.inf) -> float:
    """Population limit of the observed-entry mean when a standard normal
    is observed only inside the interval (a, b):

        -(phi(b) - phi(a)) / (Phi(b) - Phi(a))

    For left-truncation, b = +inf, this is phi(a) / (1 - Phi(a)).
    """
    if not a < b:
        raise ShapeError(f"need a < b, got a={a}, b={b}")
    denom = float(ndtr(b) - ndtr(a)) if not math.isinf(b) else float(1.0 - ndtr(a))
    if denom <= 0.0:
        raise DataError("interval has zero mass under the standard normal")
    return -(_phi(b) - _phi(a)) / denom
