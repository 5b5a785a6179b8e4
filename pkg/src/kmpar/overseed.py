"""Overseeding rounds and the full oversample-then-reduce pipeline.

Each round adds every point independently with probability
min(1, ell * cost_x / total_cost), evaluated against the cache state at the
start of the round. Selected points accumulate as candidate centers; a
weighted k-means++ pass then reduces them to k final centers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import CenterSet, CostCache, Dataset, exact_sum
from .sampling import (
    TAG_INIT,
    TAG_REDUCE,
    RngStream,
    bernoulli_round,
    sample_uniform,
)
from .seeding import SeedingResult, WeightedInstance, kmeanspp

TRACE_HEADER = "round,centers,added,phi_x,phi_u,k_unsettled,alpha,heavy_count,massive_count"


@dataclass
class OverseedConfig:
    """Inputs of the overseeding loop.

    ell may be fractional to support sweeps with ell = alpha * k.
    stop_threshold, when set, ends the loop once total cost falls to or
    below it (used for stop-at-20*phi_star runs).
    """

    k: int
    ell: float
    rounds: int
    warm_start: CenterSet | None = None
    stop_when_cost_zero: bool = True
    stop_threshold: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.ell > 0:
            raise ValueError("ell must be positive")
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")


@dataclass
class TraceExtras:
    """Ground-truth diagnostic fields; NaN/-1 when no ground truth is known."""

    phi_u: float = math.nan
    k_unsettled: int = -1
    alpha: float = math.nan
    heavy_count: int = -1
    massive_count: int = -1


@dataclass
class RoundTrace:
    """One record per executed sampling round (comm filled by the simulator)."""

    round_index: int
    centers: int
    added: int
    phi_x: float
    phi_u: float = math.nan
    k_unsettled: int = -1
    alpha: float = math.nan
    heavy_count: int = -1
    massive_count: int = -1
    comm: object | None = None

    def csv_row(self) -> str:
        return ",".join([
            str(self.round_index),
            str(self.centers),
            str(self.added),
            repr(self.phi_x),
            repr(self.phi_u),
            str(self.k_unsettled),
            repr(self.alpha),
            str(self.heavy_count),
            str(self.massive_count),
        ])


def trace_to_csv(rows: list[RoundTrace]) -> str:
    return "\n".join([TRACE_HEADER] + [r.csv_row() for r in rows]) + "\n"


@dataclass
class OverseedResult:
    centers: CenterSet
    per_round: list[RoundTrace]
    final_cost: float
    initial_cost: float


def _apply_tracer(tracer, row: RoundTrace, centers, costs, total) -> None:
    if tracer is None:
        return
    extras = tracer(row.round_index, centers, costs, total)
    row.phi_u = extras.phi_u
    row.k_unsettled = extras.k_unsettled
    row.alpha = extras.alpha
    row.heavy_count = extras.heavy_count
    row.massive_count = extras.massive_count


def overseed(X: Dataset, cfg: OverseedConfig, rng: RngStream,
             tracer=None) -> OverseedResult:
    """Run the overseeding rounds sequentially.

    Starts from warm-start centers when given, otherwise from one uniformly
    sampled point. The optional tracer is called with
    (round_index, centers, per_point_costs, total) after initialization
    (round 0) and after each executed round.
    """
    pts = X.points
    centers = CenterSet(X.dim)
    chosen: set[int] = set()
    if cfg.warm_start is not None and len(cfg.warm_start) > 0:
        for i in range(len(cfg.warm_start)):
            centers.add(cfg.warm_start.coords(i), cfg.warm_start.rounds[i],
                        cfg.warm_start.sources[i])
            if cfg.warm_start.sources[i] >= 0:
                chosen.add(cfg.warm_start.sources[i])
    else:
        idx = sample_uniform(X, rng.child(TAG_INIT))
        centers.add(pts[idx], round_index=0, source=idx)
        chosen.add(idx)
    cache = CostCache(pts, centers.as_array())
    initial_cost = cache.total_cost
    if tracer is not None:
        tracer(0, centers, cache.nearest_sq_dist, cache.total_cost)

    per_round: list[RoundTrace] = []
    for r in range(1, cfg.rounds + 1):
        total = cache.total_cost
        if total == 0.0:
            if cfg.stop_when_cost_zero:
                break
            row = RoundTrace(r, len(centers), 0, total)
            _apply_tracer(tracer, row, centers, cache.nearest_sq_dist, total)
            per_round.append(row)
            continue
        if cfg.stop_threshold is not None and total <= cfg.stop_threshold:
            break
        selected = bernoulli_round(X, cache, cfg.ell, r, rng)
        fresh = [int(i) for i in selected if int(i) not in chosen]
        chosen.update(fresh)
        for i in fresh:
            centers.add(pts[i], round_index=r, source=i)
        if fresh:
            cache.extend(pts[np.array(fresh, dtype=np.int64)])
        row = RoundTrace(r, len(centers), len(fresh), cache.total_cost)
        _apply_tracer(tracer, row, centers, cache.nearest_sq_dist,
                      cache.total_cost)
        per_round.append(row)
    return OverseedResult(centers, per_round, final_cost=cache.total_cost,
                          initial_cost=initial_cost)


def weigh_centers(X: Dataset, B: CenterSet) -> WeightedInstance:
    """Weight each candidate center by how many points it is nearest to."""
    if len(B) == 0:
        raise ValueError("center set must be nonempty")
    cache = CostCache(X.points, B.as_array())
    weights = np.bincount(cache.nearest_center, minlength=len(B)).astype(np.float64)
    return WeightedInstance(B.as_array().copy(), weights)


@dataclass
class PipelineResult:
    centers: CenterSet
    overseed: OverseedResult
    shortfall: bool


def kmeans_parallel(X: Dataset, cfg: OverseedConfig, rng: RngStream,
                    tracer=None) -> PipelineResult:
    """Full pipeline: overseed, weight the candidates, reduce with weighted
    k-means++ to at most k centers."""
    if cfg.k > len(X):
        raise ValueError("k cannot exceed the number of points")
    result = overseed(X, cfg, rng, tracer=tracer)
    inst = weigh_centers(X, result.centers)
    seeded = kmeanspp(inst, cfg.k, rng.child(TAG_REDUCE))
    return PipelineResult(seeded.centers, result, seeded.shortfall)
