"""Points, datasets, and squared-distance cost machinery.

All arithmetic is float64. Per-point squared distances are accumulated
coordinate by coordinate (never via norm expansions), so each point's value
is produced by the same IEEE-754 op sequence no matter how the dataset is
sliced across workers. Totals use correctly rounded summation, which makes
them independent of summation grouping as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

REL_TOL = 1e-9


def as_points(obj) -> np.ndarray:
    """Coerce to an (n, d) float64 point array; 1-D input is n points in R^1."""
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"expected a point array, got shape {arr.shape}")
    return arr


def as_point(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise ValueError("point must have dimension >= 1")
    return arr


def sq_dists(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance from every row of `points` to `center`.

    Accumulates over coordinates with a fixed op order per point, which
    keeps per-point values bit-identical across any row subsetting.
    """
    center = as_point(center)
    if points.shape[1] != center.shape[0]:
        raise ValueError(
            f"dimension mismatch: points are {points.shape[1]}-dimensional, "
            f"center is {center.shape[0]}-dimensional"
        )
    acc = np.zeros(points.shape[0])
    for j in range(points.shape[1]):
        diff = points[:, j] - center[j]
        acc += diff * diff
    return acc


def exact_sum(values) -> float:
    """Correctly rounded float sum; invariant under reordering and sharding."""
    return math.fsum(values)


def sum_partials(values, partials: list[float] | None = None) -> list[float]:
    """Shewchuk accumulation: non-overlapping floats whose exact sum equals
    the exact (real-arithmetic) sum of `values` plus any incoming partials.

    Workers ship these instead of a rounded local sum; `exact_sum` over the
    concatenated partials of all shards then equals `exact_sum` over all the
    raw values, bit for bit.
    """
    ps = list(partials) if partials else []
    for x in values:
        x = float(x)
        i = 0
        for y in ps:
            if abs(x) < abs(y):
                x, y = y, x
            hi = x + y
            lo = y - (hi - x)
            if lo:
                ps[i] = lo
                i += 1
            x = hi
        ps[i:] = [x]
    return ps


@dataclass
class GroundTruth:
    """Reference clustering: partition of point indices, centers, and cost."""

    partition: np.ndarray  # (n,) int cluster id per point, ids 0..k*-1
    centers: np.ndarray    # (k*, d)
    phi_star: float

    def __post_init__(self):
        self.partition = np.asarray(self.partition, dtype=np.int64)
        self.centers = as_points(self.centers)
        self.phi_star = float(self.phi_star)
        self._cluster_opt_costs: np.ndarray | None = None

    @property
    def k(self) -> int:
        return self.centers.shape[0]


@dataclass
class Dataset:
    """Indexed point set plus optional ground truth and free-form metadata."""

    points: np.ndarray
    ground_truth: GroundTruth | None = None
    label: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = as_points(self.points)
        if self.points.shape[0] < 1:
            raise ValueError("dataset must contain at least one point")
        if not np.isfinite(self.points).all():
            raise ValueError("dataset coordinates must all be finite")
        if self.ground_truth is not None:
            self._validate_ground_truth()

    def _validate_ground_truth(self):
        gt = self.ground_truth
        n = self.points.shape[0]
        if gt.partition.shape != (n,):
            raise ValueError(f"ground-truth partition must have length {n}")
        if gt.centers.shape[1] != self.points.shape[1]:
            raise ValueError("ground-truth centers dimension mismatch")
        ids = np.unique(gt.partition)
        if ids.min() < 0 or ids.max() >= gt.k or len(ids) != gt.k:
            raise ValueError("partition ids must cover 0..k-1 with no empty cluster")
        recomputed = cost(self.points, gt.centers)
        if abs(recomputed - gt.phi_star) > REL_TOL * max(abs(recomputed), abs(gt.phi_star)):
            raise ValueError(
                f"stored phi_star {gt.phi_star!r} disagrees with recomputed "
                f"cost {recomputed!r}"
            )

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


class CenterSet:
    """Append-only ordered list of centers with provenance.

    Provenance per center: the sampling round it was chosen in and the index
    of the source point (-1 for synthetic coordinates such as centroids).
    """

    def __init__(self, dim: int):
        self.dim = int(dim)
        self.rounds: list[int] = []
        self.sources: list[int] = []
        self._rows: list[np.ndarray] = []
        self._stacked: np.ndarray | None = None

    @classmethod
    def from_array(cls, coords, rounds=None, sources=None) -> "CenterSet":
        coords = as_points(coords)
        cs = cls(coords.shape[1])
        m = coords.shape[0]
        rounds = list(rounds) if rounds is not None else [-1] * m
        sources = list(sources) if sources is not None else [-1] * m
        for row, r, s in zip(coords, rounds, sources):
            cs.add(row, r, s)
        return cs

    def add(self, point, round_index: int = -1, source: int = -1) -> None:
        point = as_point(point)
        if point.shape[0] != self.dim:
            raise ValueError("center dimension mismatch")
        self._rows.append(point.copy())
        self.rounds.append(int(round_index))
        self.sources.append(int(source))
        self._stacked = None

    def as_array(self) -> np.ndarray:
        if self._stacked is None:
            if self._rows:
                self._stacked = np.vstack(self._rows)
            else:
                self._stacked = np.empty((0, self.dim))
        return self._stacked

    def coords(self, i: int) -> np.ndarray:
        return self._rows[i]

    def copy(self) -> "CenterSet":
        return CenterSet.from_array(self.as_array(), self.rounds, self.sources)

    def __len__(self) -> int:
        return len(self._rows)


def _center_rows(centers) -> np.ndarray:
    if isinstance(centers, CenterSet):
        return centers.as_array()
    return as_points(centers)


def cost(Y, C) -> float:
    """Total squared distance from each point of Y to its nearest center.

    Empty Y costs 0; an empty center set is invalid.
    """
    pts = Y.points if isinstance(Y, Dataset) else as_points(Y)
    ctr = _center_rows(C)
    if ctr.shape[0] == 0:
        raise ValueError("center set must be nonempty")
    if pts.shape[0] == 0:
        return 0.0
    best = sq_dists(pts, ctr[0])
    for c in ctr[1:]:
        best = np.minimum(best, sq_dists(pts, c))
    return exact_sum(best)


def centroid(Y) -> np.ndarray:
    """Coordinate-wise mean, the single center minimizing the cost of Y."""
    pts = Y.points if isinstance(Y, Dataset) else as_points(Y)
    if pts.shape[0] == 0:
        raise ValueError("centroid of an empty point set is undefined")
    return pts.mean(axis=0)


class CostCache:
    """Per-point squared distance to the nearest current center.

    Supports incremental extension when centers are appended; the result is
    identical to a full recompute because min-updates are order-exact and
    ties keep the lowest center ordinal (strict-< replacement).
    """

    def __init__(self, points, centers=None):
        self.points = as_points(points)
        n = self.points.shape[0]
        self.nearest_sq_dist = np.full(n, np.inf)
        self.nearest_center = np.full(n, -1, dtype=np.int64)
        self.n_centers = 0
        self.total_cost = math.inf
        if centers is not None and len(_center_rows(centers)) > 0:
            self.extend(centers)

    def extend(self, new_centers) -> None:
        rows = _center_rows(new_centers)
        for c in rows:
            dsq = sq_dists(self.points, c)
            better = dsq < self.nearest_sq_dist
            self.nearest_center[better] = self.n_centers
            self.nearest_sq_dist = np.minimum(self.nearest_sq_dist, dsq)
            self.n_centers += 1
        self.total_cost = exact_sum(self.nearest_sq_dist)

    def cost_partials(self) -> list[float]:
        """Exact-sum partials of the per-point entries (what a worker ships)."""
        return sum_partials(self.nearest_sq_dist)


def assign_nearest(X, C) -> np.ndarray:
    """Map each point to the ordinal of its nearest center (ties: lowest)."""
    pts = X.points if isinstance(X, Dataset) else as_points(X)
    ctr = _center_rows(C)
    if ctr.shape[0] == 0:
        raise ValueError("center set must be nonempty")
    cache = CostCache(pts, ctr)
    return cache.nearest_center.copy()
