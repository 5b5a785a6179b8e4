"""Experiment runner: generate instances, run pipelines, verify sampling
bounds, and sweep parameter grids.

Exit codes: 0 success (and verifier pass), 1 verifier failure, 2 usage or
configuration error, 3 I/O error. All commands honor --seed: identical
invocations produce identical output files.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .diagnostics import (
    GroundTruthTracer,
    gamma_of,
    settling_battery,
    verify_d2_lemma,
    verify_settling_bound,
    verify_uniform_lemma,
)
from .geometry import CenterSet, Dataset, cost
from .instances import (
    LowerBoundParams,
    ParseError,
    SimplexParams,
    gen_lower_bound,
    gen_simplex,
    load_dataset,
    save_dataset,
)
from .mpcsim import run_distributed_overseed, shard_dataset
from .overseed import OverseedConfig, OverseedResult, trace_to_csv, weigh_centers
from .sampling import TAG_REDUCE, RngStream, derive_seed
from .seeding import kmeanspp

SUMMARY_HEADER = ("replicate,seed,final_cost,overseed_cost,candidates,"
                  "shortfall,rounds_executed,rounds_to_20phistar,rounds_to_zero")
AGGREGATE_HEADER = ("replicates,final_cost_mean,final_cost_p10,final_cost_p50,"
                    "final_cost_p90,rounds_to_20phistar_median,"
                    "rounds_to_zero_median,zero_fraction,gamma")


def _write_atomic(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _load_warm_start(path) -> CenterSet:
    ds = load_dataset(path)
    return CenterSet.from_array(ds.points)


def _build_config(args, ds: Dataset) -> OverseedConfig:
    warm = _load_warm_start(args.warm_start) if args.warm_start else None
    threshold = None
    stop_zero = True
    if args.stop_at == "rounds":
        stop_zero = False
    elif args.stop_at == "20phistar":
        if ds.ground_truth is None:
            raise ValueError("--stop-at 20phistar needs a ground-truth sidecar")
        threshold = 20.0 * ds.ground_truth.phi_star
    return OverseedConfig(k=args.k, ell=args.ell, rounds=args.rounds,
                          warm_start=warm, stop_when_cost_zero=stop_zero,
                          stop_threshold=threshold)


@dataclass
class ReplicateOutcome:
    replicate: int
    seed: int
    final_cost: float
    overseed_cost: float
    candidates: int
    shortfall: bool
    rounds_executed: int
    rounds_to_20phistar: int
    rounds_to_zero: int
    trace_csv: str
    ledger_csv: str


def _rounds_to(result: OverseedResult, threshold: float) -> int:
    if result.initial_cost <= threshold:
        return 0
    for row in result.per_round:
        if row.phi_x <= threshold:
            return row.round_index
    return -1


def _run_replicate(ds: Dataset, cfg: OverseedConfig, rep: int, base_seed: int,
                   shards_m: int, policy: str) -> ReplicateOutcome:
    seed = derive_seed(base_seed, rep)
    tracer = None
    if ds.ground_truth is not None:
        tracer = GroundTruthTracer(ds, cfg.k)
    shards = shard_dataset(ds, shards_m, policy)
    result, ledger = run_distributed_overseed(shards, cfg, seed, tracer=tracer)
    inst = weigh_centers(ds, result.centers)
    seeded = kmeanspp(inst, cfg.k, RngStream(seed).child(TAG_REDUCE))
    final_cost = cost(ds.points, seeded.centers)
    to_zero = _rounds_to(result, 0.0)
    to_thresh = -1
    if ds.ground_truth is not None:
        to_thresh = _rounds_to(result, 20.0 * ds.ground_truth.phi_star)
    return ReplicateOutcome(
        replicate=rep, seed=seed, final_cost=final_cost,
        overseed_cost=result.final_cost, candidates=len(result.centers),
        shortfall=seeded.shortfall, rounds_executed=len(result.per_round),
        rounds_to_20phistar=to_thresh, rounds_to_zero=to_zero,
        trace_csv=trace_to_csv(result.per_round), ledger_csv=ledger.to_csv())


def _run_batch(ds: Dataset, cfg: OverseedConfig, base_seed: int,
               replicates: int, shards_m: int, policy: str,
               jobs: int) -> list[ReplicateOutcome]:
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_replicate, ds, cfg, rep, base_seed,
                                   shards_m, policy)
                       for rep in range(replicates)]
            return [f.result() for f in futures]
    return [_run_replicate(ds, cfg, rep, base_seed, shards_m, policy)
            for rep in range(replicates)]


def _median_valid(values: list[int]) -> float:
    valid = [v for v in values if v >= 0]
    return float(np.median(valid)) if valid else math.nan


def _aggregate_row(outcomes: list[ReplicateOutcome], gamma) -> str:
    costs = np.array([o.final_cost for o in outcomes])
    med20 = _median_valid([o.rounds_to_20phistar for o in outcomes])
    med0 = _median_valid([o.rounds_to_zero for o in outcomes])
    zero_frac = sum(1 for o in outcomes if o.rounds_to_zero >= 0) / len(outcomes)
    g = gamma if gamma is not None else math.nan
    return ",".join([
        str(len(outcomes)),
        repr(float(costs.mean())),
        repr(float(np.percentile(costs, 10))),
        repr(float(np.percentile(costs, 50))),
        repr(float(np.percentile(costs, 90))),
        repr(med20),
        repr(med0),
        repr(zero_frac),
        repr(float(g)),
    ])


def _summary_rows(outcomes: list[ReplicateOutcome]) -> str:
    lines = [SUMMARY_HEADER]
    for o in outcomes:
        lines.append(",".join([
            str(o.replicate), str(o.seed), repr(o.final_cost),
            repr(o.overseed_cost), str(o.candidates),
            str(int(o.shortfall)), str(o.rounds_executed),
            str(o.rounds_to_20phistar), str(o.rounds_to_zero)]))
    return "\n".join(lines) + "\n"


def cmd_generate(args) -> int:
    if args.kind == "lower-bound":
        params = LowerBoundParams(k=args.k, L=args.L, T=args.T,
                                  origin_multiplicity=args.origin_multiplicity)
        ds = gen_lower_bound(params)
    else:
        params = SimplexParams(k=args.k, points_per_cluster=args.per_cluster,
                               scale=args.scale, noise_sigma=args.sigma)
        ds = gen_simplex(params, RngStream(args.seed))
    save_dataset(ds, args.out)
    print(f"wrote {ds.n} points in dimension {ds.dim} to {args.out} "
          f"(+ {args.out}.gt)")
    return 0


def cmd_run(args) -> int:
    ds = load_dataset(args.dataset)
    cfg = _build_config(args, ds)
    os.makedirs(args.out, exist_ok=True)
    outcomes = _run_batch(ds, cfg, args.seed, args.replicates, args.shards,
                          args.policy, args.jobs)
    for o in outcomes:
        _write_atomic(os.path.join(args.out, f"trace_rep{o.replicate:04d}.csv"),
                      o.trace_csv)
        _write_atomic(os.path.join(args.out, f"ledger_rep{o.replicate:04d}.csv"),
                      o.ledger_csv)
    _write_atomic(os.path.join(args.out, "summary.csv"), _summary_rows(outcomes))
    gamma = None
    if ds.ground_truth is not None and ds.ground_truth.phi_star > 0:
        gamma = gamma_of(ds)
    agg = AGGREGATE_HEADER + "\n" + _aggregate_row(outcomes, gamma) + "\n"
    _write_atomic(os.path.join(args.out, "aggregate.csv"), agg)
    sys.stdout.write(agg)
    return 0


def _verify_instance(args):
    if args.dataset:
        return load_dataset(args.dataset).points
    gen = RngStream(args.seed).generator(0xA5)
    return gen.normal(0.0, 1.0, size=(args.n, args.d))


def cmd_verify(args) -> int:
    rng = RngStream(args.seed)
    reports = []
    if args.lemma == "uniform":
        reports.append(verify_uniform_lemma(_verify_instance(args),
                                            args.trials, rng))
    elif args.lemma == "d2":
        pts = _verify_instance(args)
        gen = RngStream(args.seed).generator(0xC3)
        centers = gen.normal(4.0, 1.0, size=(2, pts.shape[1]))
        reports.append(verify_d2_lemma(pts, centers, args.trials, rng))
    else:  # settling
        for i, cfgd in enumerate(settling_battery()):
            reports.append(verify_settling_bound(
                cfgd["dataset"], cfgd["centers"], cfgd["cluster"],
                cfgd["ell"], args.trials, rng.child(i)))
    text = "\n".join(r.as_text() for r in reports)
    if args.out:
        _write_atomic(args.out, text)
    sys.stdout.write(text)
    return 0 if all(r.passed for r in reports) else 1


def _parse_vary(specs: list[str]) -> list[tuple[str, list[float]]]:
    allowed = {"k", "ell", "alpha", "rounds", "L", "T", "shards", "seed"}
    grid = []
    for spec in specs:
        if "=" not in spec:
            raise ValueError(f"--vary expects name=v1,v2,..., got {spec!r}")
        name, _, values = spec.partition("=")
        name = name.strip()
        if name not in allowed:
            raise ValueError(f"cannot vary {name!r}; choose from {sorted(allowed)}")
        parsed = [float(v) for v in values.split(",") if v.strip()]
        if not parsed:
            raise ValueError(f"--vary {name} needs at least one value")
        grid.append((name, parsed))
    return grid


def _sweep_cells(grid):
    cells = [{}]
    for name, values in grid:
        cells = [dict(cell, **{name: v}) for cell in cells for v in values]
    return cells


def cmd_sweep(args) -> int:
    grid = _parse_vary(args.vary or [])
    cells = _sweep_cells(grid)
    varied = [name for name, _ in grid]
    base_ds = load_dataset(args.dataset) if args.dataset else None
    if base_ds is None and args.instance is None:
        raise ValueError("sweep needs --dataset or --instance")
    lines = [",".join(varied + AGGREGATE_HEADER.split(","))]
    for cell in cells:
        k = int(cell.get("k", args.k))
        ell = float(cell.get("ell", args.ell))
        if "alpha" in cell:
            ell = cell["alpha"] * k
        rounds = int(cell.get("rounds", args.rounds))
        shards_m = int(cell.get("shards", args.shards))
        seed = int(cell.get("seed", args.seed))
        if base_ds is not None and not ({"L", "T"} & set(cell)):
            ds = base_ds
        elif args.instance == "lower-bound":
            L = float(cell.get("L", args.L))
            T = int(cell.get("T", args.T))
            if T == 0:  # derive the tier count from L
                T = max(2, round(L / math.log(L)))
            ds = gen_lower_bound(LowerBoundParams(k=k, L=L, T=T))
        elif args.instance == "simplex":
            ds = gen_simplex(SimplexParams(
                k=k, points_per_cluster=args.per_cluster, scale=args.scale,
                noise_sigma=args.sigma), RngStream(seed))
        else:
            raise ValueError("varying L/T requires --instance lower-bound")
        cfg = OverseedConfig(k=k, ell=ell, rounds=rounds,
                             stop_when_cost_zero=True)
        outcomes = _run_batch(ds, cfg, seed, args.replicates, shards_m,
                              args.policy, args.jobs)
        gamma = None
        if ds.ground_truth is not None and ds.ground_truth.phi_star > 0:
            gamma = gamma_of(ds)
        prefix = [repr(cell[name]) for name in varied]
        lines.append(",".join(prefix + [_aggregate_row(outcomes, gamma)]))
    table = "\n".join(lines) + "\n"
    if args.out:
        _write_atomic(args.out, table)
    sys.stdout.write(table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kmpar",
        description="k-means|| overseeding experiments: generate, run, verify, sweep")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic instance")
    gsub = gen.add_subparsers(dest="kind", required=True)
    glb = gsub.add_parser("lower-bound", help="tiered orthogonal-axes instance")
    glb.add_argument("--k", type=int, required=True)
    glb.add_argument("--L", type=float, required=True)
    glb.add_argument("--T", type=int, required=True)
    glb.add_argument("--origin-multiplicity", type=int, default=None)
    glb.add_argument("--out", required=True)
    glb.set_defaults(func=cmd_generate, kind="lower-bound", seed=0)
    gsx = gsub.add_parser("simplex", help="Gaussian clusters at simplex vertices")
    gsx.add_argument("--k", type=int, required=True)
    gsx.add_argument("--per-cluster", type=int, required=True)
    gsx.add_argument("--scale", type=float, default=1.0)
    gsx.add_argument("--sigma", type=float, default=0.0)
    gsx.add_argument("--seed", type=int, default=0)
    gsx.add_argument("--out", required=True)
    gsx.set_defaults(func=cmd_generate, kind="simplex")

    run = sub.add_parser("run", help="run the pipeline, emit traces + summary")
    run.add_argument("--dataset", required=True)
    run.add_argument("--k", type=int, required=True)
    run.add_argument("--ell", type=float, required=True)
    run.add_argument("--rounds", type=int, required=True)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--replicates", type=int, default=1)
    run.add_argument("--shards", type=int, default=1)
    run.add_argument("--policy", choices=["contiguous", "hash"],
                     default="contiguous")
    run.add_argument("--warm-start", default=None,
                     help="centers file in dataset format")
    run.add_argument("--stop-at", choices=["cost-zero", "20phistar", "rounds"],
                     default="cost-zero")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--out", required=True)
    run.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", help="statistical verifier for sampling bounds")
    ver.add_argument("--lemma", choices=["uniform", "d2", "settling"],
                     required=True)
    ver.add_argument("--trials", type=int, default=100000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--dataset", default=None)
    ver.add_argument("--n", type=int, default=30)
    ver.add_argument("--d", type=int, default=3)
    ver.add_argument("--out", default=None)
    ver.set_defaults(func=cmd_verify)

    sweep = sub.add_parser("sweep", help="grid of runs, one aggregate row per cell")
    sweep.add_argument("--dataset", default=None)
    sweep.add_argument("--instance", choices=["lower-bound", "simplex"],
                       default=None)
    sweep.add_argument("--k", type=int, default=5)
    sweep.add_argument("--ell", type=float, default=5.0)
    sweep.add_argument("--rounds", type=int, default=20)
    sweep.add_argument("--L", type=float, default=4.0)
    sweep.add_argument("--T", type=int, default=2,
                       help="tier count; 0 derives it from L as round(L/ln L)")
    sweep.add_argument("--per-cluster", type=int, default=50)
    sweep.add_argument("--scale", type=float, default=1.0)
    sweep.add_argument("--sigma", type=float, default=0.05)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--replicates", type=int, default=10)
    sweep.add_argument("--shards", type=int, default=1)
    sweep.add_argument("--policy", choices=["contiguous", "hash"],
                       default="contiguous")
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.add_argument("--vary", action="append", default=[],
                       metavar="NAME=V1,V2,...")
    sweep.add_argument("--out", default=None)
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
