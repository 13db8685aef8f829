#!/usr/bin/env python3
"""Replicated Bayes factors for digit sequences with an over-represented zero.

    python scripts/simulation_study.py --reps 1000 --digits 1000000 --out results/sim.csv
"""

import argparse

from digitlaw.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--digits", type=int, default=10**6)
    ap.add_argument("--bias", default="0:0.11")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--out", default="simulation.csv")
    args = ap.parse_args()

    argv = ["simulate", "--reps", str(args.reps), "--digits-per-rep", str(args.digits), "--bias", args.bias,
            "--seed", str(args.seed), "--priors", "a1,a50", "--out", args.out]
    if args.jobs:
        argv += ["--jobs", str(args.jobs)]
    raise SystemExit(cli(argv))


if __name__ == "__main__":
    main()
