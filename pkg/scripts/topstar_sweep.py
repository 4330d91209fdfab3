"""Solve and verify a set of top-star branches, printing one line per branch.

    python3 scripts/topstar_sweep.py --workers 4 c0 c29 c23_l4
"""

import argparse
import time

from emc4.pipeline import parse_branch
from emc4.topstar import branches, run_all_branches


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("branches", nargs="*", help="branch ids (default: all 63)")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    sel = [parse_branch(b) for b in args.branches] or branches()
    t0 = time.perf_counter()
    bad = 0
    for r in run_all_branches(args.workers, sel):
        bad += not r.verified
        print(f"{r.branch.id:>7}  verified={r.verified}  gap={r.gap}  lp={r.lp_value}  t8_rows={r.materialized_t8}")
    print(f"{len(sel) - bad}/{len(sel)} verified in {time.perf_counter() - t0:.0f}s")
    raise SystemExit(1 if bad else 0)


if __name__ == "__main__":
    main()
