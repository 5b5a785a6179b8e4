#!/usr/bin/env python3
"""Sweep the lower-bound instance over L and record rounds-to-zero medians.

The summary feeds plots/ (scaling figure with the L/log L reference). Usage:

    python3 scripts/scaling_sweep.py --out runs/scaling.csv [--replicates 100]
"""

import argparse
import os
import sys

from kmpar.cli import main as kmpar_main


def run(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/scaling.csv")
    ap.add_argument("--replicates", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    return kmpar_main(["sweep", "--instance", "lower-bound", "--k", "21",
                       "--ell", "21", "--rounds", "30", "--T", "0",
                       "--seed", str(args.seed),
                       "--replicates", str(args.replicates),
                       "--vary", "L=4,8,16,32", "--jobs", "4",
                       "--out", args.out])


if __name__ == "__main__":
    sys.exit(run())
