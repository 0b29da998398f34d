"""Nearest-neighbor digraph summaries (Q, R, Q_k) and the NN contingency table."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTableError, InvalidInputError
from .geometry import EUCLIDEAN, Metric, PointSet, nn_index

__all__ = [
    "NNGraph",
    "Nnct",
    "build_nngraph",
    "nngraph_from_nn",
    "build_nnct",
    "nnct_counts",
    "nnct_counts_batch",
]


@dataclass(frozen=True, eq=False)
class NNGraph:
    nn_id: np.ndarray
    nn_dist: np.ndarray
    indegree: np.ndarray
    Qk: dict
    Q: int
    R: int

    @property
    def n(self) -> int:
        return self.nn_id.shape[0]


def nngraph_from_nn(nn_id, nn_dist=None) -> NNGraph:
    """Summarize a nearest-neighbor map ``i -> nn_id[i]``.

    ``Q = sum_k k(k-1) Q_k`` counts ordered pairs of points sharing a NN and
    ``R`` is twice the number of reflexive (mutual NN) pairs.
    """
    nn = np.asarray(nn_id, dtype=np.int64)
    n = nn.shape[0]
    if n < 2:
        raise InvalidInputError("an NN graph needs at least 2 points")
    if np.any(nn == np.arange(n)) or nn.min() < 0 or nn.max() >= n:
        raise InvalidInputError("invalid nearest-neighbor ids")
    dist = np.full(n, np.nan) if nn_dist is None else np.asarray(nn_dist, dtype=float)
    indeg = np.bincount(nn, minlength=n)
    ks, counts = np.unique(indeg[indeg > 0], return_counts=True)
    qk = {int(k): int(c) for k, c in zip(ks, counts)}
    Q = int(sum(k * (k - 1) * c for k, c in qk.items()))
    R = int(np.count_nonzero(nn[nn] == np.arange(n)))
    return NNGraph(nn, dist, indeg, qk, Q, R)


def build_nngraph(ps: PointSet, metric: Metric = EUCLIDEAN) -> NNGraph:
    nn, dist = nn_index(ps, metric)
    return nngraph_from_nn(nn, dist)


@dataclass(frozen=True, eq=False)
class Nnct:
    """q x q table; rows are base classes, columns NN classes."""

    counts: np.ndarray
    class_names: tuple = field(default=())

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 2:
            raise InvalidInputError(f"an NNCT must be a q x q array with q >= 2, got {c.shape}")
        if np.any(c < 0) or np.any(c != np.round(c)):
            raise InvalidInputError("NNCT counts must be nonnegative integers")
        c = c.astype(np.int64)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        names = tuple(self.class_names) if self.class_names else tuple(range(c.shape[0]))
        object.__setattr__(self, "class_names", names)

    @property
    def q(self) -> int:
        return self.counts.shape[0]

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def require_nondegenerate(self):
        if np.any(self.row_sums == 0):
            raise DegenerateTableError("a class has no base points; NNCT tests are undefined")

    def permuted(self, perm) -> "Nnct":
        """Table after renaming class ``perm[i]`` -> ``i``."""
        perm = np.asarray(perm)
        return Nnct(self.counts[np.ix_(perm, perm)], tuple(self.class_names[i] for i in perm))

    def to_dict(self) -> dict:
        return {
            "classes": [str(c) for c in self.class_names],
            "counts": self.counts.tolist(),
            "row_sums": self.row_sums.tolist(),
            "col_sums": self.col_sums.tolist(),
            "n": self.n,
        }


def nnct_counts(labels, nn_id, q: int, base_mask=None) -> np.ndarray:
    labels = np.asarray(labels)
    base = labels if base_mask is None else labels[base_mask]
    nbr = labels[nn_id] if base_mask is None else labels[np.asarray(nn_id)[base_mask]]
    return np.bincount(base * q + nbr, minlength=q * q).reshape(q, q)


def nnct_counts_batch(label_rows, nn_id, q: int) -> np.ndarray:
    """NNCTs for many labelings of the same points; ``label_rows`` is (B, n)."""
    lab = np.asarray(label_rows)
    b = lab.shape[0]
    codes = lab * q + lab[:, nn_id] + (np.arange(b) * q * q)[:, None]
    return np.bincount(codes.ravel(), minlength=b * q * q).reshape(b, q, q)


def build_nnct(ps: PointSet, g: NNGraph, base_mask=None) -> Nnct:
    """Cross-tabulate (base label, NN label) over base points."""
    if g.n != ps.n:
        raise InvalidInputError("graph and point set sizes differ")
    mask = None if base_mask is None else np.asarray(base_mask, dtype=bool)
    if mask is not None and mask.shape != (ps.n,):
        raise InvalidInputError("base_mask must have one entry per point")
    table = Nnct(nnct_counts(ps.labels, g.nn_id, ps.q, mask), ps.class_names)
    table.require_nondegenerate()
    return table
