#!/usr/bin/env python3
"""Run every inequality sweep at full scale and write one JSON report per sweep.

    python scripts/run_sweeps.py --out reports/
    python scripts/run_sweeps.py --only dilation prekopa-leindler
"""
import argparse
import json
import time
from pathlib import Path

from lcdk.sweeps import SWEEPS


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="reports", help="output directory")
    ap.add_argument("--only", nargs="*", choices=sorted(SWEEPS), help="subset of sweeps to run")
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failed = []
    for name in args.only or SWEEPS:
        t0 = time.perf_counter()
        rep = SWEEPS[name](seed=args.seed)
        dt = time.perf_counter() - t0
        (out / f"{name}.json").write_text(json.dumps(rep.to_json(), indent=2, sort_keys=True) + "\n")
        status = "ok" if rep.ok else "FAILED"
        print(f"{name:22s} {status:6s} {rep.instances_checked:>12,d} instances  "
              f"worst slack {rep.worst_slack: .3e}  {dt:6.1f}s")
        if not rep.ok:
            failed.append(name)
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
