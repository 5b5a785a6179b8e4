#!/usr/bin/env python3
"""Emit a 100-replicate trace directory showing per-round unsettled-cost decay.

The traces feed plots/ (decay figure). Usage:

    python3 scripts/decay_traces.py --out runs/decay [--replicates 100]
"""

import argparse
import os
import sys

from kmpar.cli import main as kmpar_main


def run(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/decay")
    ap.add_argument("--replicates", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    dataset = os.path.join(args.out, "instance.txt")
    rc = kmpar_main(["generate", "simplex", "--k", "10", "--per-cluster", "30",
                     "--sigma", "0.01", "--seed", str(args.seed),
                     "--out", dataset])
    if rc:
        return rc
    # ell = 0.2*k stretches the decay over enough rounds to see the slope
    return kmpar_main(["run", "--dataset", dataset, "--k", "10", "--ell", "2",
                       "--rounds", "8", "--seed", str(args.seed),
                       "--replicates", str(args.replicates),
                       "--stop-at", "rounds", "--jobs", "4",
                       "--out", args.out])


if __name__ == "__main__":
    sys.exit(run())
