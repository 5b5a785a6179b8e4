"""Weighted k-means++ seeding and optional Lloyd refinement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    CenterSet,
    CostCache,
    Dataset,
    as_points,
    assign_nearest,
    cost,
    exact_sum,
)
from .sampling import TAG_KMPP, RngStream, sample_from_weights

LLOYD_REL_TOL = 1e-9


@dataclass
class WeightedInstance:
    """Point set with nonnegative per-point mass (1 everywhere if unweighted)."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.points = as_points(self.points)
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if self.weights.shape[0] != self.points.shape[0]:
            raise ValueError("weights must match the number of points")
        if not np.isfinite(self.weights).all() or (self.weights < 0).any():
            raise ValueError("weights must be finite and nonnegative")

    @classmethod
    def unweighted(cls, points) -> "WeightedInstance":
        points = as_points(points)
        return cls(points, np.ones(points.shape[0]))

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass
class SeedingResult:
    centers: CenterSet
    shortfall: bool  # fewer than k distinct positive-weight points existed


def kmeanspp(inst: WeightedInstance, k: int, rng: RngStream) -> SeedingResult:
    """Weighted k-means++: first center drawn with probability proportional
    to weight, each next one proportional to weight times current cost.

    Stops early (shortfall) once every positive-weight point coincides with
    a chosen center, i.e. when the distinct support is exhausted.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    centers = CenterSet(inst.points.shape[1])
    first = sample_from_weights(inst.weights, rng.uniform(TAG_KMPP, 0))
    centers.add(inst.points[first], round_index=0, source=first)
    cache = CostCache(inst.points, [inst.points[first]])
    for step in range(1, k):
        masses = inst.weights * cache.nearest_sq_dist
        if not masses.sum() > 0.0:
            break
        idx = sample_from_weights(masses, rng.uniform(TAG_KMPP, step))
        centers.add(inst.points[idx], round_index=step, source=idx)
        cache.extend([inst.points[idx]])
    return SeedingResult(centers, shortfall=len(centers) < k)


def weighted_cost(inst: WeightedInstance, C) -> float:
    """Sum of weight * squared distance to the nearest center."""
    cache = CostCache(inst.points, C)
    return exact_sum(inst.weights * cache.nearest_sq_dist)


def lloyd(X: Dataset, C: CenterSet, max_iters: int = 100) -> CenterSet:
    """Alternate nearest assignment and per-cluster centroids.

    Stops when the relative cost improvement drops below 1e-9 or after
    max_iters updates. Empty clusters keep their previous center, so the
    cost sequence is non-increasing.
    """
    if len(C) == 0:
        raise ValueError("center set must be nonempty")
    pts = X.points if isinstance(X, Dataset) else as_points(X)
    current = C.as_array().copy()
    prev_cost = cost(pts, current)
    for _ in range(max_iters):
        assignment = assign_nearest(pts, current)
        updated = current.copy()
        for j in range(current.shape[0]):
            members = pts[assignment == j]
            if members.shape[0] > 0:
                updated[j] = members.mean(axis=0)
        new_cost = cost(pts, updated)
        if new_cost > prev_cost:  # cannot happen mathematically; guard fp drift
            break
        current = updated
        if prev_cost - new_cost <= LLOYD_REL_TOL * max(prev_cost, 1e-300):
            prev_cost = new_cost
            break
        prev_cost = new_cost
    return CenterSet.from_array(current)
