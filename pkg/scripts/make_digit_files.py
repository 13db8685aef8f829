#!/usr/bin/env python3
"""Generate digit cache files for the full-scale (10^8 digit) analyses.

    python scripts/make_digit_files.py --length 100000000 --out-dir ~/digits

Writes <out-dir>/<constant>.txt in the digit cache format (fractional
digits only, 100 per line).  Expect several minutes and ~2 GB of memory
per constant at 10^8 digits; pi is the slowest.
"""

import argparse
import os
import time

from digitlaw.constants import CONSTANTS, generate_digits


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, default=10**8)
    ap.add_argument("--out-dir", default=os.path.expanduser("~/digits"))
    ap.add_argument("--constants", default=",".join(CONSTANTS))
    args = ap.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    for name in args.constants.split(","):
        path = os.path.join(args.out_dir, f"{name}.txt")
        if os.path.exists(path):
            print(f"{path} exists, skipping")
            continue
        t0 = time.time()
        stream = generate_digits(name, args.length, ceiling=args.length)
        tmp = path + ".partial"
        n = stream.write(tmp)
        os.replace(tmp, path)
        print(f"{name}: {n} digits -> {path} ({time.time() - t0:.0f} s)", flush=True)


if __name__ == "__main__":
    main()
