#!/usr/bin/env python3
"""Replay the large-k iteration and print the table of (M, n - n1, m - m1, k) rows."""

import argparse
import logging

from pillai.pipeline import TABLE1, CertificationReport, PipelineConfig, emit_report, run_large_k_phase


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--precision", type=int, default=6000, help="working precision in bits")
    ap.add_argument("--max-rows", type=int, default=12)
    ap.add_argument("--json", metavar="PATH", help="also write the phase report here")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    phase = run_large_k_phase(PipelineConfig(large_k_precision=args.precision, max_rows=args.max_rows))
    print(f"{'row':>3} {'M':>7} {'n-n1':>6} {'m-m1':>6} {'k':>6}   published")
    for i, r in enumerate(phase.data["rows"], start=1):
        ref = TABLE1[i - 1] if i <= len(TABLE1) else None
        got = (r["M_exp"], r["n_diff"], r["m_diff"], r["k"])
        mark = "" if ref is None else ("same" if ref == got else f"{ref}")
        print(f"{i:>3} {'10^' + str(r['M_exp']):>7} {r['n_diff']:>6} {r['m_diff']:>6} {r['k']:>6}   {mark}")
    print(f"phase {phase.status}")
    for c in phase.checks + phase.comparisons:
        if not c.ok:
            print(f"  differs: {c.name}: {c.detail}")
    if args.json:
        with open(args.json, "wb") as fh:
            fh.write(emit_report(CertificationReport(phases=[phase])))
    return 0 if phase.status == "PASS" else 1


if __name__ == "__main__":
    raise SystemExit(main())
