#!/usr/bin/env python3
"""Run the four small-k reductions over a range of k with per-k checkpoints.

Interrupted runs resume from the checkpoint directory.  The maxima over the range
are printed at the end together with the k where they occur.
"""

import argparse
import logging

from pillai.pipeline import SMALL_K_LIMITS, SMALL_K_N_BOUND, small_k_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k-lo", type=int, default=4)
    ap.add_argument("--k-hi", type=int, default=600)
    ap.add_argument("--checkpoint-dir", default=".pillai_cache/small_k")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(message)s")

    results = small_k_sweep(args.k_lo, args.k_hi, args.checkpoint_dir)
    limits = dict(SMALL_K_LIMITS, gamma3=SMALL_K_LIMITS["gamma3"] - 1, n_bound=SMALL_K_N_BOUND - 1)
    ok = True
    for key in ("gamma_n", "gamma_m", "gamma1", "gamma2", "gamma3", "n_bound"):
        worst = max(results, key=lambda r: getattr(r, key))
        val = getattr(worst, key)
        ok &= val <= limits[key]
        print(f"{key:8s} max {val:4d} at k={worst.k:<4d} limit {limits[key]}")
    unhandled = [r.k for r in results if r.unhandled]
    print(f"k without a bound for some member: {unhandled or 'none'}")
    return 0 if ok and not unhandled else 1


if __name__ == "__main__":
    raise SystemExit(main())
