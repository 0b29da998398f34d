"""Ripley's K and L, kernel pair correlation, Diggle's D and simulation envelopes.

All estimators use isotropic edge correction for a rectangular window: the
pair (i, j) is weighted by the reciprocal of the fraction of the circle
centered at point i through point j that lies inside the window.  Distances
are limited to half the shorter side, so at most two adjacent edges cut a
circle and the fraction has a closed form.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInputError
from .geometry import PointSet, Rectangle, mean_nn_distance, pairwise_distances
from .numerics import rng_stream

__all__ = [
    "FunctionEstimate",
    "make_grid",
    "edge_weights",
    "ripley_k_uni",
    "ripley_k_biv",
    "l_function",
    "default_bandwidth",
    "pair_correlation",
    "diggle_d",
    "envelope",
    "csr_generator",
    "rl_generator",
]


@dataclass
class FunctionEstimate:
    name: str
    grid: np.ndarray
    values: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    nsim: int = 0
    band: float | None = None
    info: dict = field(default_factory=dict)

    def rows(self):
        for i, t in enumerate(self.grid):
            lo = None if self.lower is None else float(self.lower[i])
            hi = None if self.upper is None else float(self.upper[i])
            yield float(t), float(self.values[i]), lo, hi


def make_grid(t, region: Rectangle) -> np.ndarray:
    """Validate a distance grid: strictly increasing, positive, at most half the shorter side."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.ndim != 1 or t.size == 0:
        raise InvalidInputError("grid must be a nonempty 1-d array")
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise InvalidInputError("grid must be positive and strictly increasing")
    limit = 0.5 * min(region.width, region.height)
    if t[-1] > limit * (1 + 1e-12):
        raise InvalidInputError(f"grid max {t[-1]:g} exceeds half the shorter side ({limit:g})")
    return t


def edge_weights(centers, dists, region: Rectangle) -> np.ndarray:
    """Reciprocal in-window circumference fraction for circles (center, radius).

    ``centers`` is (m, 2) and ``dists`` (m,); valid for radii up to half the
    shorter side of the window.
    """
    c = np.atleast_2d(np.asarray(centers, dtype=float))
    d = np.asarray(dists, dtype=float)
    edges = np.stack(
        [c[:, 0] - region.xmin, c[:, 1] - region.ymin, region.xmax - c[:, 0], region.ymax - c[:, 1]]
    )  # left, bottom, right, top: consecutive entries are adjacent edges
    edges = np.maximum(edges, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d > 0, edges / d, np.inf)
    half = np.arccos(np.clip(ratio, -1.0, 1.0))  # half-angle of the arc cut off by each edge
    outside = 2.0 * half.sum(axis=0)
    for a in range(4):
        b = (a + 1) % 4
        outside -= np.maximum(0.0, half[a] + half[b] - 0.5 * np.pi)
    return 1.0 / (1.0 - outside / (2.0 * np.pi))


def _points(ps: PointSet, cls: int | None) -> np.ndarray:
    return ps.coords if cls is None else ps.class_coords(cls)


def _pairs(a: np.ndarray, b: np.ndarray | None, region: Rectangle, rmax: float):
    """Distances (< rmax, excluding self pairs when b is None) and their edge weights."""
    same = b is None
    d = pairwise_distances(a, a if same else b)
    ii, jj = np.nonzero(d < rmax)
    if same:
        keep = ii != jj
        ii, jj = ii[keep], jj[keep]
    dist = d[ii, jj]
    return dist, edge_weights(a[ii], dist, region)


def _cumulative(dist: np.ndarray, w: np.ndarray, grid: np.ndarray) -> np.ndarray:
    order = np.argsort(dist, kind="stable")
    cw = np.concatenate([[0.0], np.cumsum(w[order])])
    return cw[np.searchsorted(dist[order], grid, side="left")]  # strict d < t


def _k_uni_values(xy: np.ndarray, region: Rectangle, grid: np.ndarray) -> np.ndarray:
    n = xy.shape[0]
    dist, w = _pairs(xy, None, region, grid[-1])
    return region.area / (n * n) * _cumulative(dist, w, grid)


def _k_biv_values(a: np.ndarray, b: np.ndarray, region: Rectangle, grid: np.ndarray) -> np.ndarray:
    dist, w = _pairs(a, b, region, grid[-1])
    return region.area / (a.shape[0] * b.shape[0]) * _cumulative(dist, w, grid)


def l_function(k: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(k, 0.0) / np.pi)


def ripley_k_uni(ps: PointSet, grid, cls: int | None = None) -> FunctionEstimate:
    """``K(t) = (A / N^2) sum_{i != j} w_ij 1(d_ij < t)`` for one class (or all points)."""
    grid = make_grid(grid, ps.region)
    xy = _points(ps, cls)
    if xy.shape[0] < 2:
        raise InvalidInputError("K needs at least two points")
    k = _k_uni_values(xy, ps.region, grid)
    return FunctionEstimate("K", grid, k, info={"L": l_function(k), "class": cls, "lambda": xy.shape[0] / ps.region.area})


def ripley_k_biv(ps: PointSet, i: int, j: int, grid) -> FunctionEstimate:
    """Cross K from class ``i`` to class ``j``; edge weights are centered on the class-i point."""
    grid = make_grid(grid, ps.region)
    a, b = ps.class_coords(i), ps.class_coords(j)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise InvalidInputError("both classes must be nonempty")
    k = _k_biv_values(a, b, ps.region, grid)
    return FunctionEstimate("Kij", grid, k, info={"L": l_function(k), "classes": (i, j)})


def _g_values(a, b, region, grid, h) -> np.ndarray:
    dist, w = _pairs(a, b, region, grid[-1] + h)
    na = a.shape[0]
    nb = na if b is None else b.shape[0]
    u = (grid[:, None] - dist[None, :]) / h
    kern = np.where(np.abs(u) < 1, 0.75 * (1 - u * u) / h, 0.0)
    return region.area / (na * nb) * (kern * w[None, :]).sum(axis=1) / (2 * np.pi * grid)


def default_bandwidth(ps: PointSet, classes: tuple | None = None) -> float:
    """``0.15 / sqrt(lambda)``; the geometric mean intensity for a cross pair."""
    if classes is None:
        n = ps.n
    elif len(classes) == 1 or classes[0] == classes[1]:
        n = ps.class_sizes[classes[0]]
    else:
        n = np.sqrt(ps.class_sizes[classes[0]] * ps.class_sizes[classes[1]])
    return float(0.15 / np.sqrt(n / ps.region.area))


def pair_correlation(ps: PointSet, grid, bandwidth: float | None = None, classes: tuple | None = None) -> FunctionEstimate:
    """Epanechnikov kernel estimate of ``g(t) = K'(t) / (2 pi t)``.

    ``classes=None`` pools all points, ``(i,)`` or ``(i, i)`` is univariate for
    class i and ``(i, j)`` is the cross function.  Default bandwidth is
    ``0.15 / sqrt(lambda)``.
    """
    region = ps.region
    grid = make_grid(grid, region)
    if classes is None or len(classes) == 1 or classes[0] == classes[1]:
        a, b = _points(ps, None if classes is None else classes[0]), None
    else:
        a, b = ps.class_coords(classes[0]), ps.class_coords(classes[1])
    h = default_bandwidth(ps, classes) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise InvalidInputError("bandwidth must be positive")
    if grid[0] < h:
        raise InvalidInputError(f"grid starts below the bandwidth {h:g}")
    if grid[-1] + h > 0.5 * min(region.width, region.height) * (1 + 1e-12):
        raise InvalidInputError("grid max plus bandwidth exceeds half the shorter side")
    g = _g_values(a, b, region, grid, h)
    mnd = mean_nn_distance(ps)
    return FunctionEstimate(
        "g", grid, g, info={"bandwidth": h, "kernel": "epanechnikov", "mean_nn_distance": mnd,
                            "unreliable": grid < mnd, "classes": classes},
    )


def csr_generator(ps: PointSet) -> Callable:
    """Fresh uniform positions in the region, same class sizes."""
    r = ps.region

    def gen(rng: np.random.Generator) -> PointSet:
        xy = np.column_stack([rng.uniform(r.xmin, r.xmax, ps.n), rng.uniform(r.ymin, r.ymax, ps.n)])
        return PointSet(xy, ps.labels, r, ps.class_names)

    return gen


def rl_generator(ps: PointSet) -> Callable:
    """Random relabeling of the fixed positions."""

    def gen(rng: np.random.Generator) -> PointSet:
        return PointSet(ps.coords, rng.permutation(ps.labels), ps.region, ps.class_names)

    return gen


def envelope(generator: Callable, estimator: Callable, nsim: int, band: float = 0.95, seed: int = 0):
    """Pointwise simulation envelope.

    ``generator(rng) -> PointSet`` draws one null pattern, ``estimator(ps)``
    returns the curve.  Replicate ``r`` uses its own stream, so the first m
    replicates of a longer run equal a run with ``nsim=m``.  Returns
    ``(lower, upper, curves)``.
    """
    if int(nsim) != nsim or nsim < 1:
        raise InvalidInputError("nsim must be a positive integer")
    if not 0 < band <= 1:
        raise InvalidInputError("band must be in (0, 1]")
    curves = np.array([np.asarray(estimator(generator(rng_stream(seed, (404, r)))), dtype=float) for r in range(int(nsim))])
    if band == 1:
        return curves.min(axis=0), curves.max(axis=0), curves
    tail = (1 - band) / 2
    return np.quantile(curves, tail, axis=0), np.quantile(curves, 1 - tail, axis=0), curves


def diggle_d(ps: PointSet, case: int, control: int, grid, nsim: int = 99, seed: int = 0) -> FunctionEstimate:
    """``D(t) = K_case(t) - K_control(t)`` with +/- 2 relabeling standard errors."""
    grid = make_grid(grid, ps.region)
    a, b = ps.class_coords(case), ps.class_coords(control)
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise InvalidInputError("both classes need at least two points")
    region = ps.region
    d = _k_uni_values(a, region, grid) - _k_uni_values(b, region, grid)
    info = {"classes": (case, control)}
    if nsim < 20:
        info["warning"] = f"nsim={nsim} < 20; standard errors are rough"
        warnings.warn(info["warning"], stacklevel=2)
    pooled = np.vstack([a, b])
    is_case = np.r_[np.ones(a.shape[0], bool), np.zeros(b.shape[0], bool)]
    sims = np.empty((int(nsim), grid.size))
    for r in range(int(nsim)):
        lab = rng_stream(seed, (505, r)).permutation(is_case)
        sims[r] = _k_uni_values(pooled[lab], region, grid) - _k_uni_values(pooled[~lab], region, grid)
    se = sims.std(axis=0, ddof=1) if nsim > 1 else np.zeros(grid.size)
    info["relabel_mean"] = sims.mean(axis=0)
    info["se"] = se
    return FunctionEstimate("D", grid, d, -2 * se, 2 * se, int(nsim), None, info)
