#!/usr/bin/env python3
"""Certified continued fraction of log 3 / log 2 with the facts the Legendre step uses."""

import argparse
import json

from pillai.contfrac import cf_expand, max_partial_quotient
from pillai.realball import log_int, sci


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--digits", type=int, default=1800)
    ap.add_argument("--up-to", type=int, default=972, help="largest l in max a_(l+1)")
    ap.add_argument("--show", type=int, nargs="*", default=[972, 973, 975, 976, 977],
                    help="0-based convergent indices to print")
    args = ap.parse_args()

    bits = int(args.digits * 3.3219280948873626) + 64
    tau = log_int(3, bits) / log_int(2, bits)
    cf = cf_expand(tau)
    a_max, where = max_partial_quotient(cf, args.up_to)
    out = {"digits": args.digits, "certified_quotients": cf.certified_len,
           "max_quotient": {"l_max": args.up_to, "value": a_max, "index": where},
           "q": {str(i): sci(cf.q(i), 5) for i in args.show if i < cf.certified_len}}
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
