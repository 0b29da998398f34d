"""Random-labeling engine shared by the permutation tests and envelopes.

Replicate ``r`` of a run with seed ``s`` always draws from
``rng_stream(s, (tag, r))``, so results do not depend on batching, thread
count, or on how many replicates are requested (a longer run extends a
shorter one).
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import InvalidInputError
from .numerics import rng_stream

__all__ = [
    "EXACT",
    "n_labelings",
    "all_relabelings",
    "random_relabelings",
    "relabelings",
    "permutation_pvalue_from",
    "default_threads",
]

EXACT = "exact"
MAX_EXACT = 2_000_000


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("SEGNN_THREADS", "1")))
    except ValueError:
        return 1


def n_labelings(labels) -> int:
    sizes = np.bincount(np.asarray(labels))
    total = math.factorial(int(sizes.sum()))
    for s in sizes:
        total //= math.factorial(int(s))
    return total


def all_relabelings(labels) -> np.ndarray:
    """Every distinct assignment of the same class sizes to the positions."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    sizes = np.bincount(labels)
    count = n_labelings(labels)
    if count > MAX_EXACT:
        raise InvalidInputError(f"{count} labelings is too many to enumerate")
    out = np.empty((count, n), dtype=np.int64)
    row = 0

    def fill(free: tuple, cls: int, current: np.ndarray):
        nonlocal row
        if cls == sizes.size - 1:
            current[list(free)] = cls
            out[row] = current
            row += 1
            return
        for chosen in itertools.combinations(free, int(sizes[cls])):
            nxt = current.copy()
            nxt[list(chosen)] = cls
            rest = tuple(i for i in free if i not in set(chosen))
            fill(rest, cls + 1, nxt)

    fill(tuple(range(n)), 0, np.empty(n, dtype=np.int64))
    return out


def _draw(labels: np.ndarray, seed: int, tag: int, start: int, stop: int) -> np.ndarray:
    out = np.empty((stop - start, labels.shape[0]), dtype=np.int64)
    for j, r in enumerate(range(start, stop)):
        out[j] = rng_stream(seed, (tag, r)).permutation(labels)
    return out


def random_relabelings(labels, nperm: int, seed: int, tag: int = 0, threads: int | None = None) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if int(nperm) != nperm or nperm < 1:
        raise InvalidInputError("nperm must be a positive integer")
    nperm = int(nperm)
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or nperm < 256:
        return _draw(labels, seed, tag, 0, nperm)
    bounds = np.linspace(0, nperm, threads + 1).astype(int)
    with ThreadPoolExecutor(threads) as pool:
        parts = pool.map(lambda ab: _draw(labels, seed, tag, ab[0], ab[1]), zip(bounds[:-1], bounds[1:]))
        return np.concatenate(list(parts))


def relabelings(labels, nperm, seed: int, tag: int = 0, threads: int | None = None) -> tuple[np.ndarray, bool]:
    """Replicate labelings and whether they are the exhaustive set."""
    if nperm == EXACT:
        return all_relabelings(labels), True
    return random_relabelings(labels, nperm, seed, tag, threads), False


def permutation_pvalue_from(observed: float, replicates, exact: bool, rtol: float = 1e-9) -> float:
    """Upper-tail Monte Carlo p-value.

    Random replicates: ``(1 + #{rep >= obs}) / (nperm + 1)``.  Exhaustive
    enumeration (observed labeling included): ``#{rep >= obs} / M``.
    """
    reps = np.asarray(replicates, dtype=float)
    tol = rtol * max(1.0, abs(float(observed)))
    hits = int(np.count_nonzero(reps >= observed - tol))
    if exact:
        return hits / reps.size
    return (1 + hits) / (reps.size + 1)
