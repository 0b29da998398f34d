"""Small symmetric linear algebra, tail probabilities and seeded random streams.

Matrices handled here are tiny (at most q^2 x q^2), so everything goes through
a dense symmetric eigendecomposition.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import special

from .errors import InvalidInputError

__all__ = [
    "as_sym",
    "sym_eigen",
    "pseudo_inverse",
    "matrix_inv_sqrt",
    "chi2_sf",
    "normal_sf",
    "clip_p",
    "format_p",
    "rng_stream",
]

P_FLOOR = 1e-16


def as_sym(m) -> np.ndarray:
    """Return ``m`` as a float array with exact symmetry enforced.

    Raises if the input is not square, not finite, or visibly asymmetric.
    """
    a = np.array(m, dtype=float, copy=True)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-8 * scale:
        raise InvalidInputError("matrix is not symmetric")
    return 0.5 * (a + a.T)


def sym_eigen(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and the matching orthonormal eigenvectors (columns)."""
    a = as_sym(m)
    w, v = np.linalg.eigh(a)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def pseudo_inverse(m, rel_tol: float = 1e-8, rank: int | None = None) -> tuple[np.ndarray, int]:
    """Moore-Penrose inverse of a symmetric matrix and its numerical rank.

    Eigenvalues with ``|lam| < rel_tol * max|lam|`` are treated as zero. When
    ``rank`` is given, only the ``rank`` eigen-directions of largest ``|lam|``
    are kept on top of that rule (a rank-truncated generalized inverse).
    """
    w, v = sym_eigen(m)
    if w.size == 0:
        return np.zeros((0, 0)), 0
    top = float(np.max(np.abs(w)))
    if top == 0.0:
        return np.zeros_like(v), 0
    keep = np.abs(w) >= rel_tol * top
    if rank is not None:
        if rank < 0:
            raise InvalidInputError("rank must be nonnegative")
        order = np.argsort(-np.abs(w), kind="stable")
        limit = np.zeros_like(keep)
        limit[order[:rank]] = True
        keep &= limit
    inv_w = np.zeros_like(w)
    inv_w[keep] = 1.0 / w[keep]
    pinv = (v * inv_w) @ v.T
    return 0.5 * (pinv + pinv.T), int(keep.sum())


def matrix_inv_sqrt(m, rel_tol: float = 1e-8) -> tuple[np.ndarray, int]:
    """Symmetric inverse square root ``V diag(lam^-1/2) V'`` with small eigenvalues zeroed."""
    w, v = sym_eigen(m)
    top = float(np.max(np.abs(w))) if w.size else 0.0
    if top == 0.0:
        return np.zeros_like(v), 0
    if w.min() < -1e-6 * top:
        raise InvalidInputError(f"matrix is not positive semidefinite (eigenvalue {w.min():.3g})")
    keep = w >= rel_tol * top
    inv_root = np.zeros_like(w)
    inv_root[keep] = 1.0 / np.sqrt(w[keep])
    out = (v * inv_root) @ v.T
    return 0.5 * (out + out.T), int(keep.sum())


def chi2_sf(x: float, df: int) -> float:
    """Upper tail of the chi-square distribution (regularized upper incomplete gamma)."""
    if isinstance(df, bool) or int(df) != df or df < 1:
        raise InvalidInputError(f"df must be a positive integer, got {df!r}")
    if x <= 0:
        return 1.0
    return float(special.gammaincc(0.5 * df, 0.5 * x))


def normal_sf(z: float) -> float:
    """Upper tail of the standard normal, via the complementary error function."""
    return float(0.5 * special.erfc(z / np.sqrt(2.0)))


def clip_p(p: float) -> float:
    return float(min(1.0, max(P_FLOOR, p)))


def format_p(p: float | None) -> str:
    """Render a p-value the way the published tables do (``<.0001`` below 1e-4)."""
    if p is None:
        return "NA"
    if p < 1e-4:
        return "<.0001"
    return f"{p:.4f}".lstrip("0") if p < 1 else "1.0000"


def rng_stream(seed: int, stream_id: int | Sequence[int] = 0) -> np.random.Generator:
    """Independent, reproducible generator for ``(seed, stream_id)``.

    Streams are derived through ``SeedSequence`` spawn keys, so replicate ``r``
    always sees the same numbers regardless of how many other replicates run
    or in which order.
    """
    key = (int(stream_id),) if np.isscalar(stream_id) else tuple(int(s) for s in stream_id)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))
