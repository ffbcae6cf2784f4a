#!/usr/bin/env python3
"""Tabulate truncated geometric mean and tails as CSV.

    python scripts/geom_table.py --k 0 --l 50 --t 1 5 10 > geom.csv
"""
import argparse
import csv
import sys

import numpy as np

from lcdk.closed_forms import TruncGeomParams, normalizing_constant, trunc_geom_mean, trunc_geom_tail
from lcdk.deviations import mean_deviation_bound


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--k", type=int, default=0)
    ap.add_argument("--l", type=int, default=50)
    ap.add_argument("--log-p", type=float, nargs=2, default=(-3.0, 3.0), metavar=("LO", "HI"))
    ap.add_argument("--points", type=int, default=25)
    ap.add_argument("--t", type=float, nargs="*", default=(1.0, 5.0, 10.0))
    args = ap.parse_args()

    w = csv.writer(sys.stdout)
    header = ["p", "C", "mean"]
    for t in args.t:
        header += [f"tail_{t:g}", f"mean_bound_{t:g}"]
    w.writerow(header)
    for lp in np.linspace(*args.log_p, args.points):
        params = TruncGeomParams(float(np.exp(lp)), args.k, args.l)
        m = trunc_geom_mean(params)
        row = [f"{params.p:.6g}", f"{normalizing_constant(params):.6e}", f"{m:.6f}"]
        for t in args.t:
            row += [f"{trunc_geom_tail(params, t):.6e}", f"{min(1.0, mean_deviation_bound(t, m)):.6e}"]
        w.writerow(row)


if __name__ == "__main__":
    main()
