#!/usr/bin/env python3
"""Write evidence trajectories for each constant as CSV tables.

    python scripts/reproduce_figures.py --digit-dir ~/digits --out-dir results

Uses <digit-dir>/<constant>.txt when present, otherwise generates the
digits in memory (only practical up to a few million digits).
"""

import argparse
import os

from digitlaw.cli import main as cli
from digitlaw.constants import CONSTANTS


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--digit-dir", default=os.environ.get("DIGITLAW_DATA_DIR", os.path.expanduser("~/digits")))
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--max-digits", type=int, default=10**8)
    ap.add_argument("--constants", default=",".join(CONSTANTS))
    ap.add_argument("--priors", default="a1,a50,mix:5:0.2:0.5")
    args = ap.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    for name in args.constants.split(","):
        path = os.path.join(args.digit_dir, f"{name}.txt")
        source = ["--digits", path] if os.path.exists(path) else ["--constant", name]
        out = os.path.join(args.out_dir, f"{name}.csv")
        print(f"{name}:", flush=True)
        code = cli(["analyze", *source, "--max-digits", str(args.max_digits), "--priors", args.priors,
                    "--out", out])
        if code:
            raise SystemExit(code)


if __name__ == "__main__":
    main()
