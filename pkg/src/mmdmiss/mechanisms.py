"""Synthetic data contamination and missingness-mechanism generators.

A mechanism is a conditional law of the mask given the data vector. All
variants except the adversarial one are "pointwise": they expose the
conditional mask probabilities at any x, which is what the deviation
diagnostics need. The adversarial variant rewrites masks at the dataset
level and has no per-row law.

Masks are bit tuples with 1 = missing. Mechanisms may produce the
all-missing mask; such rows are dropped (and counted) when building the
resulting dataset, since fully unobserved records carry no information.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .data import Dataset
from .exceptions import ConfigError, ShapeError, UnsupportedMechanismError

MaskTuple = tuple[int, ...]

_PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class DataContamination:
    """Mixture contamination of the complete-data law: with probability
    epsilon a row is drawn from the contaminant instead of N(theta*, I)."""

    epsilon: float
    kind: str | None = None  # "gaussian_mean" | "point_mass" | None
    param: np.ndarray | None = None

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.epsilon > 0.0 and self.kind not in ("gaussian_mean", "point_mass"):
            raise ConfigError(f"unknown contaminant kind {self.kind!r}")
        if self.kind is not None and self.param is None:
            raise ConfigError("contaminant parameter vector is required")
        if self.param is not None:
            object.__setattr__(
                self, "param", np.asarray(self.param, dtype=float).ravel()
            )

    @staticmethod
    def none() -> "DataContamination":
        return DataContamination(0.0)

    @staticmethod
    def gaussian_mean(epsilon: float, mu) -> "DataContamination":
        return DataContamination(epsilon, "gaussian_mean", np.asarray(mu, float))

    @staticmethod
    def point_mass(epsilon: float, xi) -> "DataContamination":
        return DataContamination(epsilon, "point_mass", np.asarray(xi, float))


def draw_complete(
    n: int,
    theta_star,
    contamination: DataContamination,
    rng: np.random.Generator,
) -> np.ndarray:
    """(n, d) complete-data matrix: each row independently from
    N(theta*, I_d) with probability 1-epsilon, else from the contaminant."""
    theta_star = np.asarray(theta_star, dtype=float).ravel()
    d = theta_star.size
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    pick = rng.random(n) < contamination.epsilon
    rows = theta_star[None, :] + rng.standard_normal((n, d))
    k = int(pick.sum())
    if k:
        param = contamination.param
        if param.size != d:
            raise ShapeError(
                f"contaminant parameter has length {param.size}, expected {d}"
            )
        if contamination.kind == "gaussian_mean":
            rows[pick] = param[None, :] + rng.standard_normal((k, d))
        else:  # point_mass
            rows[pick] = param[None, :]
    return rows


def mixture_cdf(
    contamination: DataContamination, beta, t, theta_star=None
):
    """cdf of beta' X where X follows the contaminated law.

    The clean component contributes Phi((t - beta'theta*) / ||beta||); the
    contaminant contributes either the shifted Gaussian cdf or, for a point
    mass, an exact step at beta'xi. Monotone nondecreasing with limits 0, 1.
    """
    beta = np.asarray(beta, dtype=float).ravel()
    norm = float(np.sqrt((beta * beta).sum()))
    if not np.isfinite(norm) or norm == 0.0:
        raise ConfigError("beta must be finite and nonzero")
    if theta_star is None:
        center = 0.0
    else:
        center = float(beta @ np.asarray(theta_star, dtype=float).ravel())
    t = np.asarray(t, dtype=float)
    eps = contamination.epsilon
    base = ndtr((t - center) / norm)
    if eps == 0.0:
        out = base
    elif contamination.kind == "gaussian_mean":
        shift = float(beta @ contamination.param)
        out = (1.0 - eps) * base + eps * ndtr((t - shift) / norm)
    else:  # point_mass
        step = (t >= float(beta @ contamination.param)).astype(float)
        out = (1.0 - eps) * base + eps * step
    return out if out.ndim else float(out)


class Mechanism(ABC):
    """Conditional law of the missingness mask given the data vector."""

    d: int
    pointwise: bool = True

    @abstractmethod
    def sample_masks(self, rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """(n, d) boolean mask matrix (True = missing) for the given rows."""

    @abstractmethod
    def support(self) -> list[MaskTuple]:
        """Masks this mechanism can produce."""

    @abstractmethod
    def mask_probability_matrix(self, rows: np.ndarray) -> np.ndarray:
        """(n, len(support)) conditional probabilities P[M = m | X = x_i]."""

    def mask_probabilities(self, x) -> dict[MaskTuple, float]:
        """Conditional mask law at a single point."""
        x = np.asarray(x, dtype=float).ravel()
        probs = self.mask_probability_matrix(x[None, :])[0]
        return dict(zip(self.support(), probs.tolist()))

    def _check_rows(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != self.d:
            raise ShapeError(f"expected (n, {self.d}) rows, got {rows.shape}")
        if rows.shape[0] == 0:
            raise ShapeError("empty row set")
        return rows


class McarMechanism(Mechanism):
    """Mask drawn independently of the data from a fixed pattern law."""

    def __init__(self, mask_probs: dict[MaskTuple, float]):
        if not mask_probs:
            raise ConfigError("need at least one mask")
        masks = [tuple(int(b) for b in m) for m in mask_probs]
        d = len(masks[0])
        for m in masks:
            if len(m) != d or any(b not in (0, 1) for b in m):
                raise ConfigError(f"invalid mask {m}")
        probs = np.asarray(list(mask_probs.values()), dtype=float)
        if (probs < 0).any() or (probs > 1).any():
            raise ConfigError("mask probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > _PROB_SUM_TOL:
            raise ConfigError(f"mask probabilities sum to {probs.sum()!r}, not 1")
        self.d = d
        self._masks = masks
        self._mask_matrix = np.asarray(masks, dtype=bool)
        self._probs = probs

    def sample_masks(self, rows, rng):
        rows = self._check_rows(rows)
        idx = rng.choice(len(self._masks), size=rows.shape[0], p=self._probs)
        return self._mask_matrix[idx]

    def support(self):
        return list(self._masks)

    def mask_probability_matrix(self, rows):
        rows = self._check_rows(rows)
        return np.tile(self._probs, (rows.shape[0], 1))


def blockwise_patterns(d: int) -> list[MaskTuple]:
    """The four-block pattern set used throughout the simulations: blocks
    {1,2,3}, {3,4,5}, {6,7,8} (1-based) each missing together, plus the
    complete pattern. Requires d >= 8."""
    if d < 8:
        raise ConfigError(f"blockwise patterns reference coordinates 1-8, need d >= 8")
    out = []
    for block in ((0, 1, 2), (2, 3, 4), (5, 6, 7)):
        bits = [0] * d
        for j in block:
            bits[j] = 1
        out.append(tuple(bits))
    out.append((0,) * d)
    return out


def blockwise_mcar(alphas, d: int = 10) -> McarMechanism:
    """MCAR mechanism over the four blockwise patterns with probabilities
    alphas (length 4, summing to 1)."""
    alphas = np.asarray(alphas, dtype=float).ravel()
    if alphas.size != 4:
        raise ConfigError(f"need 4 block probabilities, got {alphas.size}")
    return McarMechanism(dict(zip(blockwise_patterns(d), alphas)))


class TruncationMechanism(Mechanism):
    """Univariate deterministic mechanism: the value is observed exactly
    when it falls inside the open interval (lower, upper)."""

    def __init__(self, lower: float = -math.inf, upper: float = math.inf):
        if not lower < upper:
            raise ConfigError(f"need lower < upper, got {lower}, {upper}")
        self.d = 1
        self.lower = float(lower)
        self.upper = float(upper)

    def _observed(self, rows):
        x = rows[:, 0]
        return (x > self.lower) & (x < self.upper)

    def sample_masks(self, rows, rng):
        rows = self._check_rows(rows)
        return ~self._observed(rows)[:, None]

    def support(self):
        return [(0,), (1,)]

    def mask_probability_matrix(self, rows):
        rows = self._check_rows(rows)
        obs = self._observed(rows).astype(float)
        return np.column_stack([obs, 1.0 - obs])


class HuberMixtureMechanism(Mechanism):
    """With probability 1-eps the mask comes from the base mechanism, with
    probability eps from the contaminating mechanism."""

    def __init__(self, base: Mechanism, contaminant: Mechanism, eps: float):
        if not 0.0 <= eps < 1.0:
            raise ConfigError(f"mechanism contamination eps must be in [0, 1)")
        if base.d != contaminant.d:
            raise ConfigError(
                f"dimension mismatch: base d={base.d}, contaminant d={contaminant.d}"
            )
        if not (base.pointwise and contaminant.pointwise):
            raise ConfigError("both mixture components must be pointwise mechanisms")
        self.d = base.d
        self.base = base
        self.contaminant = contaminant
        self.eps = float(eps)

    def sample_masks(self, rows, rng):
        rows = self._check_rows(rows)
        pick = rng.random(rows.shape[0]) < self.eps
        masks = self.base.sample_masks(rows, rng)
        if pick.any():
            masks_cont = self.contaminant.sample_masks(rows, rng)
            masks[pick] = masks_cont[pick]
        return masks

    def support(self):
        seen = list(self.base.support())
        for m in self.contaminant.support():
            if m not in seen:
                seen.append(m)
        return seen

    def mask_probability_matrix(self, rows):
        rows = self._check_rows(rows)
        sup = self.support()
        pos = {m: k for k, m in enumerate(sup)}
        out = np.zeros((rows.shape[0], len(sup)))
        for mech, weight in ((self.base, 1.0 - self.eps), (self.contaminant, self.eps)):
            P = mech.mask_probability_matrix(rows)
            for k, m in enumerate(mech.support()):
                out[:, pos[m]] += weight * P[:, k]
        return out


class SelfCensoringMechanism(Mechanism):
    """Mask law depending on the data through the linear score beta'x:

        P[m_1 | x] = P[m_4 | x] = F(beta'x) / 2
        P[m_2 | x] = P[m_3 | x] = 1/2 - F(beta'x) / 2

    where F is a cdf (of beta'X under the data law, in the simulations), so
    the four probabilities are valid and sum to one for every x and every
    pattern keeps its marginal probability when the blocks start at 1/4.
    """

    def __init__(self, beta, masks: list[MaskTuple], cdf):
        beta = np.asarray(beta, dtype=float).ravel()
        if len(masks) != 4:
            raise ConfigError(f"self-censoring uses exactly 4 masks, got {len(masks)}")
        d = len(masks[0])
        if beta.size != d or any(len(m) != d for m in masks):
            raise ConfigError("beta and masks must share one dimension")
        self.d = d
        self.beta = beta
        self._masks = [tuple(int(b) for b in m) for m in masks]
        self._mask_matrix = np.asarray(self._masks, dtype=bool)
        self.cdf = cdf

    def _scores(self, rows):
        F = np.asarray(self.cdf(rows @ self.beta), dtype=float)
        if (F < -_PROB_SUM_TOL).any() or (F > 1.0 + _PROB_SUM_TOL).any():
            raise ConfigError("cdf returned values outside [0, 1]")
        return np.clip(F, 0.0, 1.0)

    def sample_masks(self, rows, rng):
        rows = self._check_rows(rows)
        P = self.mask_probability_matrix(rows)
        u = rng.random(rows.shape[0])
        idx = (u[:, None] > np.cumsum(P, axis=1)).sum(axis=1)
        return self._mask_matrix[idx]

    def support(self):
        return list(self._masks)

    def mask_probability_matrix(self, rows):
        rows = self._check_rows(rows)
        half_f = self._scores(rows) / 2.0
        return np.column_stack([half_f, 0.5 - half_f, 0.5 - half_f, half_f])


@dataclass(frozen=True)
class MixtureScoreCdf:
    """Picklable cdf of beta'X under the contaminated data law."""

    contamination: DataContamination
    beta: np.ndarray
    theta_star: np.ndarray | None = None

    def __call__(self, t):
        return mixture_cdf(self.contamination, self.beta, t, self.theta_star)


def self_censoring_blockwise(
    contamination: DataContamination, theta_star=None, d: int = 10
) -> SelfCensoringMechanism:
    """The simulation-study self-censoring law: beta = d^(-1/2) * ones,
    masks = the blockwise pattern set, F = cdf of beta'X under the
    contaminated data law."""
    beta = np.full(d, 1.0 / math.sqrt(d))
    return SelfCensoringMechanism(
        beta,
        blockwise_patterns(d),
        MixtureScoreCdf(contamination, beta, theta_star),
    )


class AdversarialMechanism(Mechanism):
    """Univariate MCAR masking followed by an adversarial rewrite: the
    masks of the smallest observed values are flipped to missing and the
    largest masked value is revealed.

    The flip-to-missing count is ceil(2 eps c) - 1 with c the number of
    initially observed rows ("figure1" budget), or ceil(eps/alpha c) - 1
    ("example3" budget); both floored at 0 and identical at alpha = 1/2.
    Ties in the smallest values are broken by first occurrence.
    """

    pointwise = False

    def __init__(self, alpha: float, eps: float, budget: str = "figure1"):
        if not 0.0 < alpha <= 1.0:
            raise ConfigError(f"alpha must be in (0, 1], got {alpha}")
        if not 0.0 < eps < alpha:
            raise ConfigError(f"need 0 < eps < alpha, got eps={eps}, alpha={alpha}")
        if budget not in ("figure1", "example3"):
            raise ConfigError(f"unknown budget form {budget!r}")
        self.d = 1
        self.alpha = float(alpha)
        self.eps = float(eps)
        self.budget = budget

    def flip_count(self, n_observed: int) -> int:
        rate = 2.0 * self.eps if self.budget == "figure1" else self.eps / self.alpha
        return max(0, math.ceil(rate * n_observed) - 1)

    def sample_masks(self, rows, rng):
        rows = self._check_rows(rows)
        x = rows[:, 0]
        missing = rng.random(rows.shape[0]) >= self.alpha
        mcar_masked = np.flatnonzero(missing)
        observed_idx = np.flatnonzero(~missing)
        k = self.flip_count(observed_idx.size)
        if k > 0:
            order = np.argsort(x[observed_idx], kind="stable")
            missing[observed_idx[order[:k]]] = True
        if mcar_masked.size:
            # reveal the largest value among the rows masked by the MCAR draw
            missing[mcar_masked[np.argmax(x[mcar_masked])]] = False
        return missing[:, None]

    def support(self):
        return [(0,), (1,)]

    def mask_probability_matrix(self, rows):
        raise UnsupportedMechanismError(
            "the adversarial mechanism has no per-row conditional law"
        )

    def mask_probabilities(self, x):
        raise UnsupportedMechanismError(
            "the adversarial mechanism has no per-row conditional law"
        )


def apply_mechanism(
    rows, mechanism: Mechanism, rng: np.random.Generator
) -> Dataset:
    """Mask complete rows with the mechanism and assemble a dataset.

    Rows ending up with every coordinate missing are dropped; their count
    is recorded in ``Dataset.n_dropped_rows``.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2:
        raise ShapeError(f"rows must be an (n, d) matrix, got shape {rows.shape}")
    masks = mechanism.sample_masks(rows, rng)
    keep = ~masks.all(axis=1)
    n_dropped = int((~keep).sum())
    if not keep.any():
        raise ShapeError("mechanism masked every row completely")
    return Dataset.from_arrays(rows[keep], masks[keep], n_dropped_rows=n_dropped)


@dataclass(frozen=True)
class DeviationEntry:
    mask: MaskTuple
    pi: float
    var: float


@dataclass(frozen=True)
class DeviationReport:
    """Monte-Carlo estimates of the mask-law variability: for each mask m,
    the marginal probability pi_m = E[P[M=m|X]] and the variance
    V[P[M=m|X]] over the data law. Constant conditional probabilities (an
    MCAR mechanism) give zero variances."""

    entries: tuple[DeviationEntry, ...]
    n_mc: int

    def expected_ratio(self) -> float:
        """E over non-empty masks m (weighted by pi_m) of V[pi_m(X)]/pi_m^2,
        which is sum_m V[pi_m(X)] / pi_m."""
        total = 0.0
        for e in self.entries:
            if all(b == 1 for b in e.mask):
                continue
            if e.pi > 0.0:
                total += e.var / e.pi
        return total

    def entry(self, mask: MaskTuple) -> DeviationEntry:
        for e in self.entries:
            if e.mask == tuple(mask):
                return e
        raise KeyError(mask)


def deviation_to_mcar(
    mechanism: Mechanism,
    theta_star,
    n_mc: int,
    rng: np.random.Generator,
    contamination: DataContamination | None = None,
) -> DeviationReport:
    """Estimate per-mask marginal probabilities and conditional-probability
    variances over ``n_mc`` draws of X from N(theta*, I) (optionally
    contaminated). Unsupported for the adversarial mechanism."""
    if not mechanism.pointwise:
        raise UnsupportedMechanismError(
            "deviation diagnostics need a pointwise conditional law"
        )
    if n_mc < 2:
        raise ConfigError(f"n_mc must be >= 2, got {n_mc}")
    if contamination is None:
        contamination = DataContamination.none()
    X = draw_complete(n_mc, theta_star, contamination, rng)
    P = mechanism.mask_probability_matrix(X)
    entries = tuple(
        DeviationEntry(mask, float(P[:, k].mean()), float(P[:, k].var(ddof=1)))
        for k, mask in enumerate(mechanism.support())
    )
    return DeviationReport(entries=entries, n_mc=n_mc)
