#!/usr/bin/env python3
"""Write the possible/impossible parameter grid as CSV.

Sweeps latency against send rate and records, for every point, the three
thresholds and the three verdicts.  The output feeds straight into a
plotting tool or a spreadsheet.
"""

import argparse
import sys

from acnbounds.atlas import emit_grid


def _frange(spec):
    lo, hi, steps = spec.split(":")
    lo, hi, steps = float(lo), float(hi), int(steps)
    if steps < 2:
        return [lo]
    return [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--lam", type=float, default=256.0)
    ap.add_argument("--poly-lambda", type=float, default=None)
    ap.add_argument("--lmax-range", default="1:12",
                    help="lo:hi inclusive integer range")
    ap.add_argument("--beta-range", default="0.01:0.99:25",
                    help="lo:hi:steps linear range")
    ap.add_argument("--out", default="-", help="output file, - for stdout")
    args = ap.parse_args()

    lo, hi = (int(x) for x in args.lmax_range.split(":"))
    lines = emit_grid(range(lo, hi + 1), _frange(args.beta_range),
                      n=args.n, lam=args.lam, poly_lambda=args.poly_lambda)
    fh = sys.stdout if args.out == "-" else open(args.out, "w")
    try:
        for line in lines:
            print(line, file=fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
