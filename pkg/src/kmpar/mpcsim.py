"""Round-based coordinator/worker simulation of distributed overseeding.

The dataset is sharded across workers; each protocol round broadcasts the
current global cost and the centers added last, and gathers per-shard
Bernoulli selections plus exact-sum cost partials. Because all draws are
counter-based and totals are correctly rounded sums of shard partials, the
output is bit-identical to the sequential loop for any shard count, shard
policy, and worker scheduling.

Message accounting counts scalars actually exchanged by the protocol;
ground-truth instrumentation (the optional tracer) reads worker state out of
band and is not billed to the ledger.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import CenterSet, CostCache, Dataset, exact_sum, sum_partials
from .overseed import OverseedConfig, OverseedResult, RoundTrace, _apply_tracer
from .sampling import TAG_INIT, RngStream, _mix, oversample_mask, uniform_index

LEDGER_HEADER = "round,broadcast_scalars,gathered_scalars,candidate_points_sent"

_HASH_SHARD_SALT = 0x5A17


@dataclass
class Shard:
    shard_id: int
    indices: np.ndarray   # global point indices, ascending
    points: np.ndarray    # rows of the dataset at those indices

    def __len__(self) -> int:
        return len(self.indices)


def shard_dataset(X: Dataset, m: int, policy: str = "contiguous") -> list[Shard]:
    """Partition the dataset index range exactly into m shards."""
    if m < 1:
        raise ValueError("need at least one shard")
    n = len(X)
    if policy == "contiguous":
        groups = np.array_split(np.arange(n), m)
    elif policy == "hash":
        owners = np.array([_mix(_HASH_SHARD_SALT ^ i) % m for i in range(n)])
        groups = [np.flatnonzero(owners == s) for s in range(m)]
    else:
        raise ValueError(f"unknown shard policy {policy!r}")
    return [Shard(s, idx.astype(np.int64), X.points[idx])
            for s, idx in enumerate(groups)]


@dataclass
class CommRound:
    round_index: int
    broadcast_scalars: int = 0
    gathered_scalars: int = 0
    candidate_points_sent: int = 0


@dataclass
class CommLedger:
    rounds: list[CommRound] = field(default_factory=list)

    @property
    def total_broadcast(self) -> int:
        return sum(r.broadcast_scalars for r in self.rounds)

    @property
    def total_gathered(self) -> int:
        return sum(r.gathered_scalars for r in self.rounds)

    @property
    def total_candidates(self) -> int:
        return sum(r.candidate_points_sent for r in self.rounds)

    def to_csv(self) -> str:
        lines = [LEDGER_HEADER]
        for r in self.rounds:
            lines.append(f"{r.round_index},{r.broadcast_scalars},"
                         f"{r.gathered_scalars},{r.candidate_points_sent}")
        return "\n".join(lines) + "\n"


class _Worker:
    """Holds one shard and its local nearest-center cache."""

    def __init__(self, shard: Shard):
        self.shard = shard
        self.cache: CostCache | None = None

    def build_cache(self, center_coords: np.ndarray) -> list[float]:
        self.cache = CostCache(self.shard.points, center_coords)
        return sum_partials(self.cache.nearest_sq_dist)

    def extend(self, center_coords: np.ndarray) -> list[float]:
        if len(center_coords):
            self.cache.extend(center_coords)
        return sum_partials(self.cache.nearest_sq_dist)

    def select(self, round_index: int, total: float, ell: float,
               rng: RngStream):
        if len(self.shard) == 0:
            return np.empty(0, dtype=np.int64), np.empty((0, self.shard.points.shape[1]))
        mask = oversample_mask(self.cache.nearest_sq_dist, total, ell,
                               round_index, rng, self.shard.indices)
        return self.shard.indices[mask], self.shard.points[mask]

    def fetch_point(self, global_index: int) -> np.ndarray:
        local = int(np.searchsorted(self.shard.indices, global_index))
        return self.shard.points[local]


def _validate_partition(shards: list[Shard], n: int) -> None:
    merged = np.concatenate([s.indices for s in shards]) if shards else np.empty(0)
    if len(merged) != n or not np.array_equal(np.sort(merged), np.arange(n)):
        raise ValueError("shards must partition the dataset indices exactly")


def run_distributed_overseed(shards: list[Shard], cfg: OverseedConfig,
                             master_seed: int, tracer=None,
                             parallel: bool = False):
    """Execute overseeding as an explicit round protocol over the shards.

    Returns (OverseedResult, CommLedger); the result is bit-identical to
    `overseed` with an RngStream on the same master seed.
    """
    n = sum(len(s) for s in shards)
    if n == 0:
        raise ValueError("empty dataset")
    dim = shards[0].points.shape[1]
    _validate_partition(shards, n)
    workers = [_Worker(s) for s in shards]
    rng = RngStream(master_seed)
    pool = ThreadPoolExecutor(max_workers=len(workers)) if parallel else None

    def each(fn, *args):
        # Map a worker method across all workers; merge in shard_id order.
        if pool is not None:
            futures = [pool.submit(fn, w, *args) for w in workers]
            return [f.result() for f in futures]
        return [fn(w, *args) for w in workers]

    ledger = CommLedger()
    centers = CenterSet(dim)
    chosen: set[int] = set()

    # --- protocol round 0: install the initial centers, learn the cost ---
    init_comm = CommRound(0)
    if cfg.warm_start is not None and len(cfg.warm_start) > 0:
        for i in range(len(cfg.warm_start)):
            centers.add(cfg.warm_start.coords(i), cfg.warm_start.rounds[i],
                        cfg.warm_start.sources[i])
            if cfg.warm_start.sources[i] >= 0:
                chosen.add(cfg.warm_start.sources[i])
    else:
        idx = uniform_index(n, rng.child(TAG_INIT))
        owner = next(w for w in workers if idx in w.shard.indices)
        point = owner.fetch_point(idx)
        init_comm.gathered_scalars += dim
        centers.add(point, round_index=0, source=idx)
        chosen.add(idx)
    init_coords = centers.as_array()
    init_comm.broadcast_scalars += init_coords.shape[0] * dim
    partials = each(_Worker.build_cache, init_coords)
    init_comm.gathered_scalars += sum(len(p) for p in partials)
    total = exact_sum([x for p in partials for x in p])
    ledger.rounds.append(init_comm)
    initial_cost = total
    if tracer is not None:
        tracer(0, centers, _gather_costs(workers, n), total)

    per_round: list[RoundTrace] = []
    for r in range(1, cfg.rounds + 1):
        if total == 0.0:
            if cfg.stop_when_cost_zero:
                break
            comm = CommRound(r)
            ledger.rounds.append(comm)
            row = RoundTrace(r, len(centers), 0, total, comm=comm)
            _apply_tracer(tracer, row, centers,
                          _gather_costs(workers, n) if tracer else None, total)
            per_round.append(row)
            continue
        if cfg.stop_threshold is not None and total <= cfg.stop_threshold:
            break
        comm = CommRound(r)

        # broadcast the global cost; gather this round's candidate points
        comm.broadcast_scalars += 1
        selections = each(_Worker.select, r, total, cfg.ell, rng)
        merged_idx = np.concatenate([s[0] for s in selections])
        merged_pts = np.concatenate([s[1] for s in selections])
        comm.candidate_points_sent += len(merged_idx)
        comm.gathered_scalars += len(merged_idx) * (dim + 1)
        order = np.argsort(merged_idx, kind="stable")
        fresh_rows = []
        for pos in order:
            gi = int(merged_idx[pos])
            if gi in chosen:
                continue
            chosen.add(gi)
            centers.add(merged_pts[pos], round_index=r, source=gi)
            fresh_rows.append(merged_pts[pos])
        added = len(fresh_rows)

        # broadcast the accepted centers; gather refreshed cost partials
        new_coords = np.vstack(fresh_rows) if fresh_rows else np.empty((0, dim))
        comm.broadcast_scalars += added * dim
        partials = each(_Worker.extend, new_coords)
        comm.gathered_scalars += sum(len(p) for p in partials)
        total = exact_sum([x for p in partials for x in p])
        ledger.rounds.append(comm)

        row = RoundTrace(r, len(centers), added, total, comm=comm)
        if tracer is not None:
            _apply_tracer(tracer, row, centers, _gather_costs(workers, n), total)
        per_round.append(row)

    if pool is not None:
        pool.shutdown()
    result = OverseedResult(centers, per_round, final_cost=total,
                            initial_cost=initial_cost)
    return result, ledger


def _gather_costs(workers: list[_Worker], n: int) -> np.ndarray:
    """Out-of-band instrumentation: the full per-point cost vector."""
    full = np.empty(n)
    for w in workers:
        full[w.shard.indices] = w.cache.nearest_sq_dist
    return full
