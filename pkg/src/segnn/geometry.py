"""Labeled planar point sets, distances and (k-)nearest-neighbor queries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInputError

__all__ = [
    "Rectangle",
    "Metric",
    "EUCLIDEAN",
    "PointSet",
    "pairwise_distances",
    "nn_index",
    "knn_index",
    "buffer_filter",
    "mean_nn_distance",
]

# Above this size the kd-tree path is used; below it a full distance matrix.
BRUTE_FORCE_MAX = 512


@dataclass(frozen=True)
class Rectangle:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(np.isfinite(v) for v in vals):
            raise InvalidInputError("rectangle bounds must be finite")
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise InvalidInputError(f"degenerate rectangle {vals}")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, xy) -> np.ndarray:
        xy = np.atleast_2d(xy)
        return (
            (xy[:, 0] >= self.xmin)
            & (xy[:, 0] <= self.xmax)
            & (xy[:, 1] >= self.ymin)
            & (xy[:, 1] <= self.ymax)
        )

    def shrink(self, width: float) -> "Rectangle":
        return Rectangle(self.xmin + width, self.ymin + width, self.xmax - width, self.ymax - width)

    def shifted(self, dx: float, dy: float) -> "Rectangle":
        return Rectangle(self.xmin + dx, self.ymin + dy, self.xmax + dx, self.ymax + dy)

    @classmethod
    def unit(cls) -> "Rectangle":
        return cls(0.0, 0.0, 1.0, 1.0)

    @classmethod
    def bounding(cls, xy) -> "Rectangle":
        xy = np.asarray(xy, dtype=float)
        lo, hi = xy.min(axis=0), xy.max(axis=0)
        # a collinear or single-point set still needs positive extent
        span = np.where(hi > lo, 0.0, 0.5)
        return cls(lo[0] - span[0], lo[1] - span[1], hi[0] + span[0], hi[1] + span[1])


@dataclass(frozen=True)
class Metric:
    kind: str = "euclidean"
    region: Rectangle | None = None

    def __post_init__(self):
        if self.kind not in ("euclidean", "toroidal"):
            raise InvalidInputError(f"unknown metric {self.kind!r}")
        if self.kind == "toroidal" and self.region is None:
            raise InvalidInputError("toroidal metric requires a region")

    @classmethod
    def toroidal(cls, region: Rectangle) -> "Metric":
        return cls("toroidal", region)


EUCLIDEAN = Metric()


@dataclass(frozen=True, eq=False)
class PointSet:
    """Labeled points in a rectangular study region.

    ``labels`` are class ids ``0..q-1``; every id must occur.  ``class_names``
    keeps the original labels (e.g. strings from a CSV) in id order.
    """

    coords: np.ndarray
    labels: np.ndarray
    region: Rectangle | None = None
    class_names: tuple = field(default=())

    def __post_init__(self):
        xy = np.array(self.coords, dtype=float)
        if xy.ndim != 2 or xy.shape[1] != 2:
            raise InvalidInputError(f"coords must have shape (n, 2), got {xy.shape}")
        lab = np.asarray(self.labels)
        if lab.ndim != 1 or lab.shape[0] != xy.shape[0]:
            raise InvalidInputError("coords and labels must have equal length")
        if xy.shape[0] < 1:
            raise InvalidInputError("a point set needs at least one point")
        if not np.all(np.isfinite(xy)):
            raise InvalidInputError("coordinates must be finite")
        if not np.issubdtype(lab.dtype, np.integer):
            if np.any(np.asarray(lab, dtype=float) != np.round(np.asarray(lab, dtype=float))):
                raise InvalidInputError("labels must be integer class ids")
        lab = lab.astype(np.int64)
        if lab.min() < 0:
            raise InvalidInputError("labels must be nonnegative")
        q = int(lab.max()) + 1
        if np.unique(lab).size != q:
            raise InvalidInputError("every class id 0..q-1 must occur at least once")
        region = self.region if self.region is not None else Rectangle.bounding(xy)
        if not np.all(region.contains(xy)):
            raise InvalidInputError("all points must lie inside the region")
        names = tuple(self.class_names) if self.class_names else tuple(range(q))
        if len(names) != q:
            raise InvalidInputError("class_names must have one entry per class")
        xy.setflags(write=False)
        lab.setflags(write=False)
        object.__setattr__(self, "coords", xy)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "region", region)
        object.__setattr__(self, "class_names", names)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def q(self) -> int:
        return len(self.class_names)

    @property
    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.q)

    def relabel(self, labels) -> "PointSet":
        return PointSet(self.coords, labels, self.region, self.class_names)

    def select(self, mask) -> "PointSet":
        """Sub-pattern of the masked points, class ids compacted in order."""
        mask = np.asarray(mask, dtype=bool)
        lab = self.labels[mask]
        present = np.unique(lab)
        remap = np.full(self.q, -1)
        remap[present] = np.arange(present.size)
        return PointSet(
            self.coords[mask], remap[lab], self.region, tuple(self.class_names[i] for i in present)
        )

    def class_coords(self, cls: int) -> np.ndarray:
        return self.coords[self.labels == cls]


def _check_metric(ps: PointSet, metric: Metric):
    if metric.kind == "toroidal" and not np.all(metric.region.contains(ps.coords)):
        raise InvalidInputError("points must lie in the toroidal metric's region")


def pairwise_distances(a, b=None, metric: Metric = EUCLIDEAN) -> np.ndarray:
    """Distance matrix between two coordinate arrays under ``metric``."""
    a = np.asarray(a, dtype=float)
    b = a if b is None else np.asarray(b, dtype=float)
    dx = np.abs(a[:, None, 0] - b[None, :, 0])
    dy = np.abs(a[:, None, 1] - b[None, :, 1])
    if metric.kind == "toroidal":
        w, h = metric.region.width, metric.region.height
        dx = np.minimum(dx, w - dx)
        dy = np.minimum(dy, h - dy)
    return np.sqrt(dx * dx + dy * dy)


def _row_distances(xy: np.ndarray, i: int, cand: np.ndarray, metric: Metric) -> np.ndarray:
    # must use the exact arithmetic of pairwise_distances so both paths agree bitwise
    return pairwise_distances(xy[i : i + 1], xy[cand], metric)[0]


def _knn_brute(xy: np.ndarray, k: int, metric: Metric) -> tuple[np.ndarray, np.ndarray]:
    d = pairwise_distances(xy, metric=metric)
    np.fill_diagonal(d, np.inf)
    # stable sort: equal distances keep ascending index order
    order = np.argsort(d, axis=1, kind="stable")[:, :k]
    return order, np.take_along_axis(d, order, axis=1)


def _knn_tree(xy: np.ndarray, k: int, metric: Metric) -> tuple[np.ndarray, np.ndarray]:
    n = xy.shape[0]
    if metric.kind == "toroidal":
        r = metric.region
        shifted = np.column_stack(
            [np.mod(xy[:, 0] - r.xmin, r.width), np.mod(xy[:, 1] - r.ymin, r.height)]
        )
        tree = cKDTree(shifted, boxsize=(r.width, r.height))
        query_pts = shifted
    else:
        tree = cKDTree(xy)
        query_pts = xy
    dist, _ = tree.query(query_pts, k=k + 1)
    radius = dist[:, -1] * (1 + 1e-9) + 1e-300
    idx = np.empty((n, k), dtype=np.int64)
    dd = np.empty((n, k))
    for i in range(n):
        cand = np.asarray(tree.query_ball_point(query_pts[i], radius[i]), dtype=np.int64)
        cand = np.sort(cand[cand != i])
        di = _row_distances(xy, i, cand, metric)
        order = np.argsort(di, kind="stable")[:k]
        idx[i] = cand[order]
        dd[i] = di[order]
    return idx, dd


def knn_index(
    ps: PointSet, k: int, metric: Metric = EUCLIDEAN, method: str = "auto"
) -> tuple[np.ndarray, np.ndarray]:
    """The ``k`` nearest other points of every point.

    Returns ``(idx, dist)`` of shape ``(n, k)`` sorted by nondecreasing distance,
    ties broken by the lower point index.  ``method`` is ``"auto"``, ``"brute"``
    or ``"tree"``; all give identical answers.
    """
    if int(k) != k or k < 1:
        raise InvalidInputError("k must be a positive integer")
    k = int(k)
    if k >= ps.n:
        raise InvalidInputError(f"k={k} needs at least {k + 1} points, have {ps.n}")
    _check_metric(ps, metric)
    if method == "auto":
        method = "brute" if ps.n <= BRUTE_FORCE_MAX else "tree"
    if method == "brute":
        return _knn_brute(ps.coords, k, metric)
    if method == "tree":
        return _knn_tree(ps.coords, k, metric)
    raise InvalidInputError(f"unknown method {method!r}")


def nn_index(ps: PointSet, metric: Metric = EUCLIDEAN, method: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    """Nearest neighbor id and distance of every point (lowest index wins ties)."""
    if ps.n < 2:
        raise InvalidInputError("nearest neighbors need at least 2 points")
    idx, dist = knn_index(ps, 1, metric, method)
    return idx[:, 0], dist[:, 0]


def mean_nn_distance(ps: PointSet, metric: Metric = EUCLIDEAN) -> float:
    return float(nn_index(ps, metric)[1].mean())


def buffer_filter(ps: PointSet, width: float | None = None, mode: str = "inner") -> np.ndarray:
    """Mask of points eligible as base points under a buffer-zone edge correction.

    ``inner``: the region is the study area and points within ``width`` of its
    boundary only serve as neighbors.  ``outer``: the region already includes a
    surrounding frame of ``width``; base points are those in the analysis
    rectangle inside that frame.  ``width=None`` uses the mean NN distance.
    Neighbor searches still run over all points.
    """
    if width is None:
        width = mean_nn_distance(ps)
    if width < 0:
        raise InvalidInputError("buffer width must be nonnegative")
    if width == 0:
        return np.ones(ps.n, dtype=bool)
    r = ps.region
    if not (r.width > 2 * width and r.height > 2 * width):
        raise InvalidInputError(f"buffer width {width} leaves an empty analysis region")
    x, y = ps.coords[:, 0], ps.coords[:, 1]
    if mode == "inner":
        edge = np.minimum.reduce([x - r.xmin, r.xmax - x, y - r.ymin, r.ymax - y])
        return edge > width
    if mode == "outer":
        return r.shrink(width).contains(ps.coords)
    raise InvalidInputError(f"unknown buffer mode {mode!r}")


def as_pointset(coords: Sequence, labels: Sequence, region: Rectangle | None = None) -> PointSet:
    return PointSet(np.asarray(coords, dtype=float), np.asarray(labels), region)
