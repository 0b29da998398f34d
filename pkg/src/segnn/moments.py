"""Moments of NNCT cell counts under random labeling.

Analytic expectations and variances hold for any number of classes; the
covariance between two diagonal cells is also closed form.  The full
two-class covariance follows from the fixed row sums
(``N_12 = n_1 - N_11``, ``N_21 = n_2 - N_22``).  For q > 2 the covariance
matrix is estimated by relabeling the fixed locations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AnalyticMomentsUnavailable, InvalidInputError, UnsupportedError
from .nnct import NNGraph, nnct_counts_batch
from .relabel import EXACT, relabelings

__all__ = [
    "PairProbabilities",
    "CellMoments",
    "pair_probabilities",
    "expected_counts",
    "cell_variance",
    "diag_cell_covariance",
    "full_cov_2class",
    "analytic_moments",
    "permutation_cov",
    "column_sum_cov",
]


def _sizes(n_i) -> np.ndarray:
    sizes = np.asarray(n_i, dtype=float)
    if sizes.ndim != 1 or sizes.size < 1 or np.any(sizes < 1) or np.any(sizes != np.round(sizes)):
        raise InvalidInputError("class sizes must be positive integers")
    if sizes.sum() < 2:
        raise InvalidInputError("need at least 2 points")
    return sizes


def _falling(x, k: int):
    out = np.ones_like(np.asarray(x, dtype=float))
    for t in range(k):
        out = out * (x - t)
    return out


@dataclass(frozen=True)
class PairProbabilities:
    """Probabilities that a random pair/triplet/quartet of distinct points carries given labels.

    ``p_ij``, ``p_iij`` and ``p_iijj`` are q x q arrays meaningful off the diagonal.
    """

    p_ii: np.ndarray
    p_ij: np.ndarray
    p_iii: np.ndarray
    p_iij: np.ndarray
    p_iijj: np.ndarray
    p_iiii: np.ndarray


def pair_probabilities(n_i) -> PairProbabilities:
    s = _sizes(n_i)
    n = s.sum()
    if n < 4:
        raise AnalyticMomentsUnavailable("quartet probabilities need n >= 4")
    f2, f3, f4 = _falling(n, 2), _falling(n, 3), _falling(n, 4)
    s2 = _falling(s, 2)
    return PairProbabilities(
        p_ii=s2 / f2,
        p_ij=np.outer(s, s) / f2,
        p_iii=_falling(s, 3) / f3,
        p_iij=np.outer(s2, s) / f3,
        p_iijj=np.outer(s2, s2) / f4,
        p_iiii=_falling(s, 4) / f4,
    )


def expected_counts(n_i) -> np.ndarray:
    """``E[N_ii] = n_i(n_i-1)/(n-1)`` and ``E[N_ij] = n_i n_j/(n-1)``."""
    s = _sizes(n_i)
    n = s.sum()
    e = np.outer(s, s)
    e[np.diag_indices_from(e)] = s * (s - 1)
    return e / (n - 1)


def _check_qr(n: float, Q, R):
    if Q < 0 or R < 0 or R > n or int(R) % 2:
        raise InvalidInputError(f"invalid join counts Q={Q}, R={R} for n={n:g}")


def cell_variance(n_i, Q: int, R: int) -> np.ndarray:
    s = _sizes(n_i)
    n = s.sum()
    _check_qr(n, Q, R)
    p = pair_probabilities(s)
    quad = n * n - 3 * n - Q + R
    var = n * p.p_ij + Q * p.p_iij + quad * p.p_iijj - (n * p.p_ij) ** 2
    diag = (n + R) * p.p_ii + (2 * n - 2 * R + Q) * p.p_iii + quad * p.p_iiii - (n * p.p_ii) ** 2
    var[np.diag_indices_from(var)] = diag
    return var


def diag_cell_covariance(n_i, Q: int, R: int, i: int, j: int) -> float:
    """``Cov[N_ii, N_jj]`` for two different classes."""
    if i == j:
        raise InvalidInputError("use cell_variance for i == j")
    s = _sizes(n_i)
    n = s.sum()
    _check_qr(n, Q, R)
    p = pair_probabilities(s)
    return float((n * n - 3 * n - Q + R) * p.p_iijj[i, j] - n * n * p.p_ii[i] * p.p_ii[j])


def full_cov_2class(n_i, Q: int, R: int) -> np.ndarray:
    """4 x 4 covariance over cells (11, 12, 21, 22)."""
    s = _sizes(n_i)
    if s.size != 2:
        raise UnsupportedError("the closed-form full covariance is two-class only")
    var = cell_variance(s, Q, R)
    v1, v2 = var[0, 0], var[1, 1]
    c = diag_cell_covariance(s, Q, R, 0, 1)
    return np.array(
        [
            [v1, -v1, -c, c],
            [-v1, v1, c, -c],
            [-c, c, v2, -v2],
            [c, -c, -v2, v2],
        ]
    )


@dataclass(frozen=True, eq=False)
class CellMoments:
    """Mean, variance and covariance (row-major cell order) of the NNCT cells."""

    expected: np.ndarray
    var: np.ndarray
    cov: np.ndarray
    source: str
    nperm: int | None = None

    @property
    def q(self) -> int:
        return self.expected.shape[0]


def analytic_moments(n_i, Q: int, R: int) -> CellMoments:
    s = _sizes(n_i)
    if s.size != 2:
        raise AnalyticMomentsUnavailable(
            "closed-form covariances for q > 2 are not provided; use permutation_cov"
        )
    return CellMoments(expected_counts(s), cell_variance(s, Q, R), full_cov_2class(s, Q, R), "analytic2class")


def permutation_cov(labels, g: NNGraph, nperm=2000, seed: int = 0, threads: int | None = None) -> CellMoments:
    """Sample mean and covariance of the cells over relabelings of fixed locations.

    ``labels`` may be a PointSet or a label array.  ``nperm="exact"``
    enumerates every labeling, giving the exact RL moments.
    """
    labels = np.asarray(getattr(labels, "labels", labels), dtype=np.int64)
    if nperm != EXACT and nperm < 100:
        warnings.warn(f"nperm={nperm} is small; covariance estimates will be noisy", stacklevel=2)
    q = int(labels.max()) + 1
    reps, exact = relabelings(labels, nperm, seed, tag=101, threads=threads)
    tables = nnct_counts_batch(reps, g.nn_id, q).reshape(reps.shape[0], q * q).astype(float)
    mean = tables.mean(axis=0)
    dev = tables - mean
    # exact enumeration is the population; random draws use the unbiased estimator
    denom = tables.shape[0] if exact else tables.shape[0] - 1
    cov = dev.T @ dev / denom
    cov = 0.5 * (cov + cov.T)
    return CellMoments(
        mean.reshape(q, q), np.diag(cov).reshape(q, q).copy(), cov, "permutation", None if exact else int(nperm)
    )


def column_sum_cov(cm: CellMoments) -> tuple[np.ndarray, np.ndarray]:
    """Covariances of cells with column sums, and between column sums.

    Returns ``(cov_nc, cov_cc)`` with ``cov_nc[a, k] = Cov[N_a, C_k]`` for
    row-major cell index ``a`` and ``cov_cc[j, l] = Cov[C_j, C_l]``.
    """
    q = cm.q
    # column-sum operator: C_k = sum_m N_mk
    col = np.zeros((q * q, q))
    for m in range(q):
        for k in range(q):
            col[m * q + k, k] = 1.0
    cov_nc = cm.cov @ col
    cov_cc = col.T @ cm.cov @ col
    return cov_nc, 0.5 * (cov_cc + cov_cc.T)
