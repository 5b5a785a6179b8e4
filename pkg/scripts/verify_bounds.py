#!/usr/bin/env python3
"""Run all three statistical verifiers back to back; nonzero exit on any fail."""

import sys

from kmpar.cli import main as kmpar_main


def run():
    worst = 0
    for lemma, trials in (("uniform", "100000"), ("d2", "100000"),
                          ("settling", "10000")):
        rc = kmpar_main(["verify", "--lemma", lemma, "--trials", trials,
                         "--seed", "1"])
        worst = max(worst, rc)
    return worst


if __name__ == "__main__":
    sys.exit(run())
