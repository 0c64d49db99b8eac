"""Hot numerical kernels: Gaussian-kernel sums over sample pairs.

Two interchangeable implementations live here. The numba path compiles
tight loops; the numpy path computes the same sums blockwise so memory
stays bounded. Selection happens once at import time:

* default: numba when importable,
* ``MMDMISS_PURE_NUMPY=1`` in the environment forces the numpy path.

Summation order is fixed within each backend, so repeated calls are
bit-reproducible. The two backends may differ by float rounding only.
``benchmarks/bench_backends.py`` compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

_BLOCK = 4096


def _env_wants_numpy() -> bool:
    return os.environ.get("MMDMISS_PURE_NUMPY", "").strip().lower() in (
        "1",
        "true",
        "yes",
    )


# ---------------------------------------------------------------------------
# numpy implementations (always available; also the fallback path)
# ---------------------------------------------------------------------------


def self_gram_row_sums_np(Y: np.ndarray, gamma2: float) -> np.ndarray:
    """Row sums (diagonal included) of the Gram matrix k(y_j, y_j')."""
    sq = np.einsum("ij,ij->i", Y, Y)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (Y @ Y.T)
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-d2 / gamma2).sum(axis=1)


def cross_col_sums_np(X: np.ndarray, Y: np.ndarray, gamma2: float) -> np.ndarray:
    """Per-column sums over rows of X of k(x_i, y_j); shape (len(Y),)."""
    out = np.zeros(Y.shape[0])
    sqy = np.einsum("ij,ij->i", Y, Y)
    for lo in range(0, X.shape[0], _BLOCK):
        Xb = X[lo : lo + _BLOCK]
        d2 = np.einsum("ij,ij->i", Xb, Xb)[:, None] + sqy[None, :] - 2.0 * (Xb @ Y.T)
        np.maximum(d2, 0.0, out=d2)
        out += np.exp(-d2 / gamma2).sum(axis=0)
    return out


def cross_total_np(A: np.ndarray, B: np.ndarray, gamma2: float) -> float:
    """Full sum of k(a_i, b_j) over all pairs."""
    return float(cross_row_sums_np(A, B, gamma2).sum())


def cross_row_sums_np(A: np.ndarray, B: np.ndarray, gamma2: float) -> np.ndarray:
    """Per-row sums over columns of k(a_i, b_j); shape (len(A),)."""
    out = np.zeros(A.shape[0])
    sqa = np.einsum("ij,ij->i", A, A)
    for lo in range(0, B.shape[0], _BLOCK):
        Bb = B[lo : lo + _BLOCK]
        d2 = sqa[:, None] + np.einsum("ij,ij->i", Bb, Bb)[None, :] - 2.0 * (A @ Bb.T)
        np.maximum(d2, 0.0, out=d2)
        out += np.exp(-d2 / gamma2).sum(axis=1)
    return out


def gram_total_sym_np(A: np.ndarray, gamma2: float) -> float:
    """Sum of k(a_i, a_j) over all ordered pairs, diagonal included."""
    n = A.shape[0]
    sq = np.einsum("ij,ij->i", A, A)
    total = float(n)  # diagonal: k(a, a) = 1
    for lo in range(0, n, _BLOCK):
        Ab = A[lo : lo + _BLOCK]
        d2 = sq[lo : lo + _BLOCK, None] + sq[None, :] - 2.0 * (Ab @ A.T)
        np.maximum(d2, 0.0, out=d2)
        K = np.exp(-d2 / gamma2)
        # strict upper triangle of the full matrix, counted twice
        cols = np.arange(n)[None, :]
        rows = np.arange(lo, lo + Ab.shape[0])[:, None]
        total += 2.0 * float(K[cols > rows].sum())
    return total


def pair_overlap_scaled_np(values0: np.ndarray, obs: np.ndarray, scale: float) -> np.ndarray:
    """For each pair i<j with overlapping observed coordinates, return
    scale * ||x_i - x_j||^2 / (#common coordinates), distances taken over
    the common coordinates only.

    ``values0`` must carry 0.0 at unobserved slots; ``obs`` is the 0/1
    observed indicator.
    """
    n = values0.shape[0]
    chunks = []
    sqv = values0 * values0
    for i in range(n - 1):
        rest = slice(i + 1, n)
        cnt = obs[rest] @ obs[i]
        ss = (
            sqv[rest] @ obs[i]
            + obs[rest] @ sqv[i]
            - 2.0 * (values0[rest] @ values0[i])
        )
        good = cnt > 0
        if good.any():
            chunks.append(scale * ss[good] / cnt[good])
    if not chunks:
        return np.empty(0)
    return np.concatenate(chunks)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

NUMBA_AVAILABLE = False
if not _env_wants_numpy():
    # the default omp threading layer is not fork-safe; replication pools fork
    os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
    try:
        from numba import njit, prange

        NUMBA_AVAILABLE = True
    except ImportError:  # pragma: no cover - depends on environment
        NUMBA_AVAILABLE = False

if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _self_gram_row_sums_nb(Y, gamma2):
        S, q = Y.shape
        inv = 1.0 / gamma2
        out = np.zeros(S)
        for j in range(S):
            out[j] += 1.0  # diagonal
            for jp in range(j + 1, S):
                s = 0.0
                for c in range(q):
                    d = Y[j, c] - Y[jp, c]
                    s += d * d
                k = np.exp(-s * inv)
                out[j] += k
                out[jp] += k
        return out

    @njit(cache=True)
    def _cross_col_sums_nb(X, Y, gamma2):
        n, q = X.shape
        S = Y.shape[0]
        inv = 1.0 / gamma2
        out = np.zeros(S)
        for i in range(n):
            for j in range(S):
                s = 0.0
                for c in range(q):
                    d = X[i, c] - Y[j, c]
                    s += d * d
                out[j] += np.exp(-s * inv)
        return out

    @njit(cache=True, parallel=True)
    def _cross_row_sums_nb(A, B, gamma2):
        nA, q = A.shape
        nB = B.shape[0]
        inv = 1.0 / gamma2
        out = np.zeros(nA)
        for i in prange(nA):
            acc = 0.0
            for j in range(nB):
                s = 0.0
                for c in range(q):
                    d = A[i, c] - B[j, c]
                    s += d * d
                acc += np.exp(-s * inv)
            out[i] = acc
        return out

    @njit(cache=True, parallel=True)
    def _gram_upper_row_sums_nb(A, gamma2):
        n, q = A.shape
        inv = 1.0 / gamma2
        out = np.zeros(n)
        for i in prange(n):
            acc = 0.0
            for j in range(i + 1, n):
                s = 0.0
                for c in range(q):
                    d = A[i, c] - A[j, c]
                    s += d * d
                acc += np.exp(-s * inv)
            out[i] = acc
        return out

    @njit(cache=True)
    def _pair_overlap_scaled_nb(values0, obs, scale):
        n, d = values0.shape
        out = np.empty(n * (n - 1) // 2)
        k = 0
        for i in range(n - 1):
            for j in range(i + 1, n):
                cnt = 0
                ss = 0.0
                for c in range(d):
                    if obs[i, c] != 0.0 and obs[j, c] != 0.0:
                        cnt += 1
                        diff = values0[i, c] - values0[j, c]
                        ss += diff * diff
                if cnt > 0:
                    out[k] = scale * ss / cnt
                    k += 1
        return out[:k].copy()

    def self_gram_row_sums(Y, gamma2):
        return _self_gram_row_sums_nb(np.ascontiguousarray(Y), gamma2)

    def cross_col_sums(X, Y, gamma2):
        return _cross_col_sums_nb(
            np.ascontiguousarray(X), np.ascontiguousarray(Y), gamma2
        )

    def cross_row_sums(A, B, gamma2):
        return _cross_row_sums_nb(
            np.ascontiguousarray(A), np.ascontiguousarray(B), gamma2
        )

    def cross_total(A, B, gamma2):
        return float(cross_row_sums(A, B, gamma2).sum())

    def gram_total_sym(A, gamma2):
        A = np.ascontiguousarray(A)
        upper = _gram_upper_row_sums_nb(A, gamma2)
        return float(A.shape[0] + 2.0 * upper.sum())

    def pair_overlap_scaled(values0, obs, scale):
        return _pair_overlap_scaled_nb(
            np.ascontiguousarray(values0), np.ascontiguousarray(obs), scale
        )

    BACKEND = "numba"
else:
    self_gram_row_sums = self_gram_row_sums_np
    cross_col_sums = cross_col_sums_np
    cross_row_sums = cross_row_sums_np
    cross_total = cross_total_np
    gram_total_sym = gram_total_sym_np
    pair_overlap_scaled = pair_overlap_scaled_np

    BACKEND = "numpy"
