"""Generative-model abstraction and the Gaussian fixed-covariance mean model.

A model exposes exactly what the stochastic fitting loop needs: sampling,
the parameter-gradient of the log density, and projection onto the
(compact, convex) parameter set.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from .exceptions import ConfigError, ShapeError


def project_box(theta, radius: float) -> np.ndarray:
    """Orthogonal projection onto the hypercube [-radius, radius]^d."""
    if not np.isfinite(radius) or radius <= 0:
        raise ConfigError(f"box radius must be positive, got {radius}")
    return np.clip(np.asarray(theta, dtype=float), -radius, radius)


def gaussian_sample(theta, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` i.i.d. draws from N(theta, I_d) as a (count, d) matrix."""
    theta = np.asarray(theta, dtype=float).ravel()
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    return theta[None, :] + rng.standard_normal((count, theta.size))


def gaussian_grad_log_density(theta, y) -> np.ndarray:
    """Gradient in theta of log N(y; theta, I_d), i.e. y - theta."""
    theta = np.asarray(theta, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if theta.shape != y.shape:
        raise ShapeError(f"length mismatch: {theta.size} vs {y.size}")
    return y - theta


class ModelInterface(ABC):
    """Capability set required from a parametric generative model."""

    param_dim: int
    data_dim: int

    @abstractmethod
    def sample(self, theta, count: int, rng: np.random.Generator) -> np.ndarray:
        """(count, data_dim) matrix of i.i.d. draws from P_theta."""

    @abstractmethod
    def grad_log_density(self, theta, y) -> np.ndarray:
        """Gradient of log p_theta(y) in theta, length param_dim."""

    @abstractmethod
    def project_params(self, theta) -> np.ndarray:
        """Idempotent projection onto the parameter set."""

    def grad_log_density_batch(self, theta, Y) -> np.ndarray:
        """(S, param_dim) stack of per-sample log-density gradients.

        Models with a vectorized form should override this; the default
        loops over rows.
        """
        Y = np.asarray(Y, dtype=float)
        return np.stack([self.grad_log_density(theta, y) for y in Y])


class GaussianMeanModel(ModelInterface):
    """N(theta, I_d) with theta restricted to the box [-R, R]^d.

    The box is large by default so that optima of the experiments stay
    interior while projection remains trivial.
    """

    def __init__(self, d: int, box_radius: float = 100.0):
        if d < 1:
            raise ConfigError(f"dimension must be >= 1, got {d}")
        if not np.isfinite(box_radius) or box_radius <= 0:
            raise ConfigError(f"box radius must be positive and finite")
        self.param_dim = d
        self.data_dim = d
        self.box_radius = float(box_radius)

    def sample(self, theta, count, rng):
        theta = self._check_theta(theta)
        return gaussian_sample(theta, count, rng)

    def grad_log_density(self, theta, y):
        return gaussian_grad_log_density(theta, y)

    def grad_log_density_batch(self, theta, Y):
        theta = self._check_theta(theta)
        Y = np.asarray(Y, dtype=float)
        if Y.ndim != 2 or Y.shape[1] != self.data_dim:
            raise ShapeError(f"expected (S, {self.data_dim}) samples, got {Y.shape}")
        return Y - theta[None, :]

    def project_params(self, theta):
        theta = self._check_theta(theta)
        return project_box(theta, self.box_radius)

    def _check_theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.size != self.param_dim:
            raise ShapeError(
                f"theta has length {theta.size}, expected {self.param_dim}"
            )
        return theta
