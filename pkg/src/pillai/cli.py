"""Command line entry point: ``pillai <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import List, Optional

from . import baker
from .contfrac import cf_expand
from .dpreduce import ReductionCase, dp_reduce, required_precision
from .errors import PillaiError
from .kfib import fib_at, make_context
from .pipeline import PipelineConfig, certify, emit_report
from .realball import DEFAULT_PRECISION, parse_expr, sci
from .search import SearchConfig, search


def _bits(digits: int) -> int:
    return int(digits * 3.3219280948873626) + 64


def cmd_fib(args) -> int:
    print(fib_at(args.k, args.n))
    return 0


def cmd_root(args) -> int:
    ctx = make_context(args.k, _bits(args.digits))
    print(ctx.alpha.str(args.digits))
    return 0


def cmd_cf(args) -> int:
    x = parse_expr(args.expr, _bits(args.digits))
    exp = cf_expand(x, to_index=args.to_index) if args.to_index is not None else cf_expand(x)
    stop = exp.certified_len if args.to_index is None else args.to_index + 1
    out = {"certified_len": exp.certified_len, "quotients": list(exp.quotients[:stop])}
    picks = args.show or [exp.certified_len - 1]
    out["convergents"] = {str(i): {"p": sci(exp.p(i), 5), "q": sci(exp.q(i), 5),
                                   "q_digits": len(str(exp.q(i)))} for i in picks}
    print(json.dumps(out, indent=2))
    return 0


def cmd_bounds(args) -> int:
    vals = baker.bd_chain_at(args.k, args.n)
    out = {"k": args.k, "n": args.n, "M_k": str(baker.lemma_bd_bound(args.k)),
           "at_k": {name: sci(v.upper, 6) for name, v in vals.items()},
           "chain": [s.to_dict() for s in baker.bd_chain()],
           "repaired_chain": [s.to_dict() for s in baker.bd_chain(repaired=True)]}
    print(json.dumps(out, indent=2))
    return 0


def cmd_reduce(args) -> int:
    M = int(args.M)
    prec = args.precision or max(DEFAULT_PRECISION, required_precision(M, 36 * M * M))
    tau = parse_expr(args.tau, prec)
    case = ReductionCase(tau, parse_expr(args.mu, prec), parse_expr(args.A, prec),
                         parse_expr(args.B, prec), M)
    cf = cf_expand(tau, 6 * M, extra=args.retries + 1)
    print(json.dumps(dp_reduce(case, cf, max_retries=args.retries).to_dict(), indent=2))
    return 0


def cmd_search(args) -> int:
    cfg = SearchConfig((args.k_lo, args.k_hi), (3, args.n_max), (2, args.m_max), modulus=args.modulus)
    result = search(cfg, workers=args.workers)
    for rec in result.records:
        print(json.dumps(rec.to_dict(), sort_keys=True))
    logging.info("%d candidates, %d rejected", result.candidates, result.rejected)
    return 0


def cmd_certify(args) -> int:
    kw = dict(checkpoint_dir=args.resume, workers=args.workers)
    if args.k_hi is not None:
        kw["k_hi"] = args.k_hi
    if args.precision is not None:
        kw["large_k_precision"] = args.precision
    cfg = PipelineConfig.full(**kw) if args.full else PipelineConfig(**kw)
    report = certify(cfg)
    blob = emit_report(report, args.format)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(blob)
    else:
        sys.stdout.write(blob.decode())
    logging.info("status %s", report.status)
    return 0 if report.status == "PASS" else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pillai", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fib", help="exact k-generalized Fibonacci term")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_fib)

    p = sub.add_parser("root", help="certified enclosure of the dominant root")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--digits", type=int, default=30)
    p.set_defaults(func=cmd_root)

    p = sub.add_parser("cf", help="certified continued fraction of an expression")
    p.add_argument("--expr", required=True)
    p.add_argument("--to-index", type=int)
    p.add_argument("--digits", type=int, default=100)
    p.add_argument("--show", type=int, nargs="*", help="convergent indices to print")
    p.set_defaults(func=cmd_cf)

    p = sub.add_parser("bounds", help="bound chain and M_k as JSON")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, default=baker.N_MIN)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("reduce", help="one Dujella-Petho reduction")
    for name in ("--tau", "--mu", "--A", "--B"):
        p.add_argument(name, required=True)
    p.add_argument("--M", required=True)
    p.add_argument("--precision", type=int)
    p.add_argument("--retries", type=int, default=8)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("search", help="exhaustive search, JSON lines")
    p.add_argument("--k-lo", type=int, default=4)
    p.add_argument("--k-hi", type=int, default=60)
    p.add_argument("--n-max", type=int, default=600)
    p.add_argument("--m-max", type=int, default=600)
    p.add_argument("--modulus", type=int, default=10 ** 20)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("certify", help="run every phase and emit a report")
    p.add_argument("--full", action="store_true", help="small-k sweep up to k = 600")
    p.add_argument("--k-hi", type=int)
    p.add_argument("--precision", type=int, help="bits for the large-k phase")
    p.add_argument("--out")
    p.add_argument("--resume", metavar="DIR", help="checkpoint directory for the small-k sweep")
    p.add_argument("--format", choices=("json", "markdown"), default="json")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_certify)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (PillaiError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
