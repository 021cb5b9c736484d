"""Replay of the whole certification: search, small-k sweeps, large-k iteration.

Every phase returns a :class:`PhaseReport` holding two kinds of entries:

* ``checks`` are certified inequalities the argument needs.  A phase is PASS
  only when every check holds.
* ``comparisons`` set recomputed numbers against the published ones.  A
  mismatch becomes a flag in the report but does not by itself make the
  argument unsound.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from . import baker
from .contfrac import CFExpansion, cf_expand, max_partial_quotient
from .dpreduce import (MAX_RETRIES, FamilySummary, ReductionCase, dp_reduce, dp_reduce_grid,
                       homogeneous_reduce, merge_summaries, s_unit_exponents)
from .errors import CoefficientUnderivable, PillaiError, PrecisionExhausted, UnclassifiedSolution
from .kfib import make_context
from .realball import RealBall, log_int, sci
from .search import SearchConfig, completeness_report, representations, search

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
N_ASSUMED = 600  # the small-k argument works under n > 600
GUARD = 20  # Gamma forms assume min{n - n1, m - m1} >= GUARD

# ranges that each small-k sweep hands to the next one, as published
SMALL_K_LIMITS = {"gamma_n": 600, "gamma_m": 375, "gamma1": 377, "gamma2": 603, "gamma3": 378}
SMALL_K_N_BOUND = 473

# published rows: M exponent, n - n1, m - m1, k
TABLE1 = ((507, 1708, 1074, 3428), (88, 319, 197, 662), (80, 287, 180, 590),
          (79, 282, 180, 584), (79, 282, 180, 584))

LARGE_K_PRECISION = 6000
LARGE_K_START = 507


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": bool(self.ok), "detail": self.detail}


@dataclass
class PhaseReport:
    name: str
    checks: List[Check] = field(default_factory=list)
    comparisons: List[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "PASS" if self.checks and all(c.ok for c in self.checks) else "FAIL"

    def check(self, name: str, ok, detail: str = "") -> bool:
        self.checks.append(Check(name, ok is True, detail))
        return ok is True

    def compare(self, name: str, ok, detail: str = "") -> bool:
        self.comparisons.append(Check(name, ok is True, detail))
        return ok is True

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status,
                "checks": [c.to_dict() for c in self.checks],
                "comparisons": [c.to_dict() for c in self.comparisons],
                "data": self.data}


@dataclass
class PipelineConfig:
    k_lo: int = 4
    k_hi: int = 60
    n_max: int = 600
    m_max: int = 600
    modulus: int = 10 ** 20
    checkpoint_dir: Optional[str] = None
    large_k_precision: int = LARGE_K_PRECISION
    max_rows: int = 12
    workers: int = 1

    @classmethod
    def full(cls, **kw) -> "PipelineConfig":
        kw.setdefault("k_hi", 600)
        return cls(**kw)


@dataclass
class CertificationReport:
    config: dict = field(default_factory=dict)
    solutions: List[dict] = field(default_factory=list)
    phases: List[PhaseReport] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)

    def phase(self, name: str) -> Optional[PhaseReport]:
        for p in self.phases:
            if p.name == name:
                return p
        return None

    @property
    def status(self) -> str:
        if not self.phases:
            return "FAIL"
        return "PASS" if all(p.status == "PASS" for p in self.phases) else "FAIL"

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "status": self.status, "config": self.config,
                "solutions": self.solutions, "flags": self.flags,
                "phases": {p.name: p.to_dict() for p in self.phases}}


# -- small k ---------------------------------------------------------------------------

@dataclass
class SmallKResult:
    """Sweep statistics for one ``k`` (all bounds after the ``GUARD`` router)."""

    k: int
    M: int
    precision: int
    gamma_n: int
    gamma_m: int
    gamma1: int
    gamma2: int
    gamma3: int
    gamma3_X: float
    n_bound: int
    min_epsilon: Dict[str, float]
    routed: Dict[str, int]  # members per family bounded by the offset homogeneous form
    failures: Dict[str, list]

    @property
    def unhandled(self) -> int:
        return sum(len(v) for v in self.failures.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["M"] = str(self.M)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SmallKResult":
        d = dict(d)
        d["M"] = int(d["M"])
        # older checkpoints listed every routed label
        d["routed"] = {k: len(v) if isinstance(v, list) else v for k, v in d["routed"].items()}
        return cls(**d)


def _limit_unit(r: Fraction) -> Optional[Tuple[int, int]]:
    """``(a, b)`` with ``log r / log 3 = a + b log 2 / log 3`` when ``r`` is a {2,3}-unit."""
    e = s_unit_exponents(r, (2, 3))
    return None if e is None else (e[1], e[0])


def _unit_offset(mu: RealBall, tau: RealBall, limits: Sequence[Fraction]) -> Optional[Tuple[int, int, Fraction]]:
    """Closest ``a + b tau`` to ``mu`` among the ``{2,3}``-unit ``limits``, with ``|mu - a - b tau|``."""
    best = None
    for r in limits:
        unit = _limit_unit(r)
        if unit is None:
            continue
        a, b = unit
        size = abs(mu - (a + b * tau)).upper
        if best is None or size < best[2]:
            best = (a, b, size)
    return best


class _Offsets:
    """Lazily computed unit offsets of the parts ``mu = x + y`` of a member."""

    def __init__(self, tau: RealBall, values: Dict[Hashable, RealBall], limits):
        self.tau, self.values, self.limits, self.cache = tau, values, limits, {}

    def __call__(self, key):
        if key not in self.cache:
            self.cache[key] = _unit_offset(self.values[key], self.tau, self.limits(key))
        return self.cache[key]


@lru_cache(maxsize=4)
def _joint_unit_pairs(l_hi: int, j_hi: int) -> frozenset:
    """``(l, j)`` with ``(2^l - 1)/(3^j - 1)`` a ``{2,3}``-unit."""
    out = set()
    odd = {}
    for j in range(1, j_hi + 1):
        v = 3 ** j - 1
        odd[j] = v >> ((v & -v).bit_length() - 1)
    for l in range(1, l_hi + 1):
        v = 2 ** l - 1
        while v % 3 == 0:
            v //= 3
        out.update((l, j) for j, o in odd.items() if o == v)
    return frozenset(out)


def _near_degenerate(family: FamilySummary, tau: RealBall, cf: CFExpansion, M: int,
                     parts, n_trivial, A: RealBall, B: RealBall) -> Tuple[FamilySummary, List]:
    """Re-reduce failed members whose ``mu`` is close to some ``a + b tau``.

    For large ``k`` the root is ``2`` up to ``2^-k`` and ``f_k(alpha)`` is
    ``1/2`` up to a similar amount.  A member built from parts with
    ``{2,3}``-unit limit values (``2^l`` or ``2^l - 1`` over ``3^j`` or
    ``3^j - 1``, the bare powers standing in when the dropped 1 is negligible)
    then has ``mu - (a + b tau)`` far below ``1/q``, and every convergent gives
    ``eps <= 0``.  Those members are bounded by :func:`homogeneous_reduce`
    with ``|delta|`` at most the sum of the parts' offsets.  ``parts(label)``
    lists alternative decompositions, each a list of the parts'
    ``(a, b, |delta|)`` (None when a part has no unit limit); the tightest
    usable one is taken.
    The offset-only case ``u + b = 0 = v - a`` would force
    ``n = n_trivial(label, b)``, which must not exceed ``N_ASSUMED``.
    """
    # the bound grows with |delta| and otherwise depends only on the convergent
    # q_L <= M + |b|, so one reduction per L, at the largest |delta|, covers a group
    groups: Dict[int, tuple] = {}
    members: Dict[int, List[Hashable]] = {}
    left = []
    L_of: Dict[int, int] = {}
    for lab, reason in family.failures:
        best = None
        for comps in parts(lab):
            if any(c is None for c in comps):
                continue
            a, b = sum(c[0] for c in comps), sum(c[1] for c in comps)
            size = sum(c[2] for c in comps)
            if n_trivial(lab, b) <= N_ASSUMED and (best is None or size < best[0]):
                best = (size, a, b)
        if best is None:
            left.append((lab, reason))
            continue
        size, a, b = best
        if abs(b) not in L_of:
            L_of[abs(b)] = cf.first_index_above(M + abs(b)) - 1
        L = L_of[abs(b)]
        if L not in groups or size > groups[L][0]:
            groups[L] = (size, lab, a, b)
        members.setdefault(L, []).append(lab)
    fixed, routed = [], []
    for L, (size, lab, a, b) in sorted(groups.items()):
        try:
            delta = RealBall(size, tau.precision_bits)
            fixed.append(homogeneous_reduce(tau, cf, a, b, A, B, M, lab, delta=delta))
            routed.extend(members[L])
        except PillaiError as exc:
            left.extend((m, type(exc).__name__) for m in members[L])
    family.failures = []
    extra = FamilySummary()
    for out in fixed:
        extra.absorb(out, None)
    family.members -= len(routed)
    merged = merge_summaries([family, extra])
    merged.members += len(routed) - len(fixed)
    merged.failures = left
    return merged, routed


def _small_k_attempt(k: int, prec: int) -> SmallKResult:
    M = baker.lemma_bd_bound(k)
    c = make_context(k, prec)
    l3 = log_int(3, prec)
    three = RealBall(3, prec)
    alpha, fk = c.alpha, c.fk_alpha
    tau = c.log_alpha / l3
    cf = cf_expand(tau, 6 * M, extra=MAX_RETRIES + 2)
    mu0 = fk.log() / l3
    a6 = alpha.pow_int(6)
    L1, J1 = SMALL_K_LIMITS["gamma_n"], SMALL_K_LIMITS["gamma_m"]
    L3, J3 = SMALL_K_LIMITS["gamma2"], SMALL_K_LIMITS["gamma1"]

    xs = {l: (fk * (alpha.pow_int(l) - 1)).log() / l3 for l in range(1, L3 + 1)}
    ys = {j: -RealBall(3 ** j - 1, prec).log() / l3 for j in range(1, J3 + 1)}
    # unit offsets of the parts: f -> 1/2, alpha^l - 1 -> 2^l - 1 or 2^l, 3^j - 1 -> itself or 3^j
    off0 = _Offsets(tau, {0: mu0}, lambda _: [Fraction(1, 2)])
    offx = _Offsets(tau, xs, lambda l: [Fraction(2 ** l - 1, 2), Fraction(2 ** (l - 1))])
    offy = _Offsets(tau, ys, lambda j: [Fraction(1, 3 ** j - 1), Fraction(1, 3 ** j)])

    # Gamma: one mu, two (A, B) choices sharing the same q and eps
    fam0 = {}
    for tag, A, B in (("gamma_n", 2 * a6, alpha), ("gamma_m", 6 / l3, three)):
        s = FamilySummary()
        try:
            s.absorb(dp_reduce(ReductionCase(tau, mu0, A, B, M, 0), cf), None)
        except PillaiError as exc:
            s.fail(0, type(exc).__name__)
        fam0[tag], _ = _near_degenerate(s, tau, cf, M, lambda lab: [[off0(0)]], lambda lab, b: 1 - b, A, B)

    # Gamma_1: mu = log(f (alpha^l - 1)) / log 3, u = n1 - 1, v = m
    g1_mu = {l: xs[l] for l in range(1, L1 + 1)}
    g1 = dp_reduce_grid(tau, cf, M, g1_mu, None, 6 / l3, three)
    g1, r1 = _near_degenerate(g1, tau, cf, M, lambda l: [[offx(l)]], lambda l, b: 1 - b + l, 6 / l3, three)
    # Gamma_2: mu = log(f / (3^j - 1)) / log 3, u = n - 1, v = m1
    g2_mu = {j: mu0 + ys[j] for j in range(1, J1 + 1)}
    g2 = dp_reduce_grid(tau, cf, M, g2_mu, None, 2 * a6 / l3, alpha)
    g2, r2 = _near_degenerate(g2, tau, cf, M, lambda j: [[off0(0), offy(j)]], lambda j, b: 1 - b,
                              2 * a6 / l3, alpha)
    # Gamma_3: mu = x_l + y_j, u = n1 - 1, v = m1, bound 1328 * 3^(-0.8 n)
    g3 = dp_reduce_grid(tau, cf, M, xs, ys, RealBall(1328, prec), three)
    pairs = _joint_unit_pairs(L3, J3)
    offxy = _Offsets(tau, {lab: xs[lab[0]] + ys[lab[1]] for lab in pairs},
                     lambda lab: [Fraction(2 ** lab[0] - 1, 2 * (3 ** lab[1] - 1))])
    g3, r3 = _near_degenerate(g3, tau, cf, M,
                              lambda lab: [[offx(lab[0]), offy(lab[1])]] + ([[offxy(lab)]] if lab in pairs else []),
                              lambda lab, b: 1 - b + lab[0], RealBall(1328, prec), three)

    def guarded(s: FamilySummary) -> int:
        return max(s.max_w_bound if s.max_w_bound is not None else 0, GUARD - 1)

    X3 = g3.max_X.upper
    n_bound = -((-(X3 * 5)) // 4) - 1  # 0.8 n < X
    eps = {}
    for tag, s in (("gamma", fam0["gamma_n"]), ("gamma1", g1), ("gamma2", g2), ("gamma3", g3)):
        eps[tag] = None if s.min_epsilon is None else float(s.min_epsilon.lower)
    return SmallKResult(
        k=k, M=M, precision=prec,
        gamma_n=guarded(fam0["gamma_n"]), gamma_m=guarded(fam0["gamma_m"]),
        gamma1=guarded(g1), gamma2=guarded(g2), gamma3=g3.max_w_bound,
        gamma3_X=float(X3), n_bound=max(n_bound, 0), min_epsilon=eps,
        routed={"gamma": len(fam0["gamma_n"].homogeneous), "gamma1": len(r1), "gamma2": len(r2),
                "gamma3": len(r3)},
        failures={"gamma": [l for l, _ in fam0["gamma_n"].failures + fam0["gamma_m"].failures],
                  "gamma1": [l for l, _ in g1.failures], "gamma2": [l for l, _ in g2.failures],
                  "gamma3": [list(l) for l, _ in g3.failures]},
    )


def reduce_small_k(k: int, precision: Optional[int] = None) -> SmallKResult:
    """All four small-k reductions for one ``k``, raising precision on demand."""
    M = baker.lemma_bd_bound(k)
    prec = precision or 2 * (6 * M).bit_length() + 256
    for _ in range(4):
        try:
            return _small_k_attempt(k, prec)
        except PrecisionExhausted:
            prec *= 2
    raise PrecisionExhausted(f"k={k}: small-k reduction undecided at {prec} bits")


def _checkpoint_path(directory: str, k: int) -> str:
    return os.path.join(directory, f"k_{k:04d}.json")


def small_k_sweep(k_lo: int, k_hi: int, checkpoint_dir: Optional[str] = None) -> List[SmallKResult]:
    """Run :func:`reduce_small_k` over a range, resuming from per-k checkpoint files."""
    out = []
    if checkpoint_dir:
        os.makedirs(checkpoint_dir, exist_ok=True)
    for k in range(k_lo, k_hi + 1):
        path = _checkpoint_path(checkpoint_dir, k) if checkpoint_dir else None
        if path and os.path.exists(path):
            with open(path) as fh:
                out.append(SmallKResult.from_dict(json.load(fh)))
            continue
        res = reduce_small_k(k)
        log.info("k=%d: gamma %d/%d, gamma1 %d, gamma2 %d, gamma3 %d, n < %d",
                 k, res.gamma_n, res.gamma_m, res.gamma1, res.gamma2, res.gamma3, res.n_bound + 1)
        if path:
            tmp = path + ".tmp"
            with open(tmp, "w") as fh:
                json.dump(res.to_dict(), fh, sort_keys=True)
            os.replace(tmp, path)
        out.append(res)
    return out


def solution_phase(cfg: PipelineConfig, report: Optional[CertificationReport] = None) -> PhaseReport:
    phase = PhaseReport("solutions")
    scfg = SearchConfig((cfg.k_lo, cfg.k_hi), (3, cfg.n_max), (2, cfg.m_max), cfg.modulus)
    res = search(scfg, workers=cfg.workers)
    try:
        comp = completeness_report(scfg, res.records)
    except UnclassifiedSolution as exc:
        phase.check("classified", False, str(exc))
        return phase
    phase.check("classified", True, f"{len(res.records)} records in families (i) and (ii)")
    phase.check("families_exact", comp["exact"],
                "missing/extra: " + json.dumps({k: comp[k] for k in
                                                ("missing_i", "extra_i", "missing_ii", "extra_ii")}))
    phase.data.update(search=scfg.to_dict(), candidates=res.candidates, rejected=res.rejected,
                      records=len(res.records), family_ii=comp["family_ii"])
    if 6 in scfg.ks:
        reps = representations(res.records, 6, 5)
        phase.data["k6_c5_representations"] = reps
        phase.compare("k6_c5_printed_partner", (6, 1) in reps,
                      f"representations of 5 for k=6: {reps}; printed partner is (n1, m1) = (6, 1)")
    if report is not None:
        report.solutions = [r.to_dict() for r in res.records]
    return phase


def run_small_k_phase(k_lo: int = 4, k_hi: int = 60, cfg: Optional[PipelineConfig] = None,
                      report: Optional[CertificationReport] = None,
                      ks: Optional[Sequence[int]] = None) -> PhaseReport:
    """Search plus the four reduction sweeps over ``k_lo <= k <= k_hi`` (or the listed ``ks``)."""
    cfg = cfg or PipelineConfig(k_lo=k_lo, k_hi=k_hi)
    phase = PhaseReport("small_k")
    sol = solution_phase(PipelineConfig(**{**asdict(cfg), "k_lo": k_lo, "k_hi": k_hi}), report)
    phase.checks.extend(sol.checks)
    phase.comparisons.extend(sol.comparisons)
    phase.data["search"] = sol.data
    if ks is None:
        results = small_k_sweep(k_lo, k_hi, cfg.checkpoint_dir)
    else:
        results = [reduce_small_k(k) for k in ks]
    if not results:
        phase.check("nonempty", False, "no k in range")
        return phase
    worst = {key: max(results, key=lambda r: getattr(r, key)) for key in
             ("gamma_n", "gamma_m", "gamma1", "gamma2", "gamma3", "n_bound")}
    lim = SMALL_K_LIMITS
    phase.check("gamma_n_within", worst["gamma_n"].gamma_n <= lim["gamma_n"],
                f"n - n1 <= {worst['gamma_n'].gamma_n} (k={worst['gamma_n'].k}), gamma_1 sweeps l <= {lim['gamma_n']}")
    phase.check("gamma_m_within", worst["gamma_m"].gamma_m <= lim["gamma_m"],
                f"m - m1 <= {worst['gamma_m'].gamma_m} (k={worst['gamma_m'].k}), gamma_2 sweeps j <= {lim['gamma_m']}")
    phase.check("gamma1_within", worst["gamma1"].gamma1 <= lim["gamma1"],
                f"m - m1 <= {worst['gamma1'].gamma1} (k={worst['gamma1'].k}), gamma_3 sweeps j <= {lim['gamma1']}")
    phase.check("gamma2_within", worst["gamma2"].gamma2 <= lim["gamma2"],
                f"n - n1 <= {worst['gamma2'].gamma2} (k={worst['gamma2'].k}), gamma_3 sweeps l <= {lim['gamma2']}")
    phase.check("gamma3_within", worst["gamma3"].gamma3 < lim["gamma3"],
                f"max floor(X) = {worst['gamma3'].gamma3} (k={worst['gamma3'].k})")
    nb = worst["n_bound"].n_bound
    phase.check("n_bound", nb < SMALL_K_N_BOUND, f"n <= {nb} < {SMALL_K_N_BOUND}")
    phase.check("contradiction", nb <= N_ASSUMED, f"n <= {nb} contradicts n > {N_ASSUMED}")
    unhandled = {r.k: r.failures for r in results if r.unhandled}
    phase.check("no_unhandled_failures", not unhandled, json.dumps(unhandled)[:400])
    phase.data.update(
        k_range=[results[0].k, results[-1].k], ks=len(results),
        maxima={key: {"value": getattr(r, key), "k": r.k} for key, r in worst.items()},
        routed={r.k: r.routed for r in results if any(r.routed.values())},
    )
    return phase


# -- large k ---------------------------------------------------------------------------

@dataclass
class LegendreStep:
    L: int
    a_max: int
    a_max_index: int
    Y: int
    n_diff: int
    m_diff: int
    k_bound: int


def legendre_step(cf: CFExpansion, M: int) -> LegendreStep:
    """Bounds from ``n/m = p_l/q_l`` with ``q_l <= m < M``.

    ``1/((a_{l+1}+2) q_l q_{l+1}) < |tau - p_l/q_l|`` against the three-term
    upper bound gives ``min{2^(n-n1), 3^(m-m1), 2^(k/2)} <= Y`` with
    ``Y = 26 (a_max + 2) q_{L+1}``; members where the criterion fails satisfy
    the same inequality with ``52 M <= Y``.
    """
    L = cf.last_index_below(M)
    a_max, where = max_partial_quotient(cf, L)
    Y = max(26 * (a_max + 2) * cf.q(L + 1), 52 * M)
    j = 0
    while 3 ** (j + 1) <= Y:
        j += 1
    return LegendreStep(L, a_max, where, Y, Y.bit_length() - 1, j, (Y * Y).bit_length() - 1)


class _LargeKData:
    """``tau = log 3/log 2``, its expansion and the offsets, shared by all rows."""

    def __init__(self, precision: int):
        self.prec = precision
        self.l2 = log_int(2, precision)
        self.tau = log_int(3, precision) / self.l2
        self.cf = cf_expand(self.tau)
        self._x: Dict[int, RealBall] = {}
        self._y: Dict[int, RealBall] = {}

    def x(self, l: int) -> RealBall:  # log(2^l - 1)/log 2
        if l not in self._x:
            self._x[l] = RealBall(2 ** l - 1, self.prec).log() / self.l2
        return self._x[l]

    def y(self, j: int) -> RealBall:  # log(3^j - 1)/log 2
        if j not in self._y:
            self._y[j] = RealBall(3 ** j - 1, self.prec).log() / self.l2
        return self._y[j]


def _unit_2(r: Fraction) -> Optional[Tuple[int, int]]:
    # log r / log 2 = a + b log 3/log 2
    return s_unit_exponents(r, (2, 3))


def _k_from(X: RealBall) -> int:
    """Largest ``k`` with ``k/2 < X``."""
    two_x = 2 * X.upper
    return -((-two_x.numerator) // two_x.denominator) - 1


def _reduce_with_units(data: _LargeKData, M: int, xs, ys, ratio, A: int, B: int) -> FamilySummary:
    """Grid sweep; members whose offset is a {2,3}-unit go to the exact homogeneous bound."""
    Ab, Bb = RealBall(A, data.prec), RealBall(B, data.prec)
    skip, homog = [], []
    labels = list(xs) if ys is None else [(a, b) for a in xs for b in ys]
    for lab in labels:
        unit = _unit_2(ratio(lab))
        if unit is not None:
            skip.append(lab)
            homog.append(homogeneous_reduce(data.tau, data.cf, unit[0], unit[1], Ab, Bb, M, lab))
    grid = dp_reduce_grid(data.tau, data.cf, M, xs, ys, Ab, Bb, skip=skip)
    extra = FamilySummary()
    for out in homog:
        extra.absorb(out, None)
    return merge_summaries([grid, extra])


@dataclass
class LargeKRow:
    M_exp: int
    legendre: LegendreStep
    n_diff: int
    m_diff: int
    k_bound: int
    families: Dict[str, dict]

    def bounds(self) -> Tuple[int, int, int]:
        return self.n_diff, self.m_diff, self.k_bound


def large_k_row(data: _LargeKData, M_exp: int) -> LargeKRow:
    M = 10 ** M_exp
    leg = legendre_step(data.cf, M)
    N1, J1 = leg.n_diff, leg.m_diff
    xs1 = {l: -data.x(l) for l in range(1, N1 + 1)}
    ratio1 = lambda l: Fraction(1, 2 ** l - 1)
    z1 = _reduce_with_units(data, M, xs1, None, ratio1, 78, 3)
    z1k = _reduce_with_units(data, M, xs1, None, ratio1, 94, 2)
    ys2 = {j: data.y(j) for j in range(1, J1 + 1)}
    z2 = _reduce_with_units(data, M, ys2, None, lambda j: Fraction(3 ** j - 1), 94, 2)
    W1, W2 = z1.max_w_bound, z2.max_w_bound
    n_diff, m_diff = max(N1, W2), max(J1, W1)
    xs3 = {l: -data.x(l) for l in range(1, n_diff + 1)}
    ys3 = {j: data.y(j) for j in range(1, m_diff + 1)}
    z3 = _reduce_with_units(data, M, xs3, ys3, lambda lab: Fraction(3 ** lab[1] - 1, 2 ** lab[0] - 1), 94, 2)
    ks = {"legendre": leg.k_bound, "z1": _k_from(z1k.max_X), "z2": _k_from(z2.max_X), "z3": _k_from(z3.max_X)}
    fams = {"z1": z1.to_dict(), "z1_k": z1k.to_dict(), "z2": z2.to_dict(), "z3": z3.to_dict(), "k_bounds": ks}
    for name, s in (("z1", z1), ("z1_k", z1k), ("z2", z2), ("z3", z3)):
        fams[name]["unhandled"] = len(s.failures)
    return LargeKRow(M_exp, leg, n_diff, m_diff, max(ks.values()), fams)


def next_M_exp(k_bound: int) -> int:
    """Smallest ``e`` with ``10^e`` at least the certified upper end of ``4e42 k^11 (log k)^7``."""
    up = baker.bd_real(k_bound).upper
    n = -((-up.numerator) // up.denominator)
    return len(str(n - 1))


def run_large_k_phase(cfg: Optional[PipelineConfig] = None, data: Optional[_LargeKData] = None) -> PhaseReport:
    """Legendre step, the three reductions and the iteration on ``M``."""
    cfg = cfg or PipelineConfig()
    phase = PhaseReport("large_k")
    data = data or _LargeKData(cfg.large_k_precision)
    cf = data.cf
    leg = legendre_step(cf, 10 ** LARGE_K_START)
    phase.data["legendre"] = {"L": leg.L, "a_max": leg.a_max, "a_max_index": leg.a_max_index,
                              "q_L": sci(cf.q(leg.L)), "q_L_plus_1": sci(cf.q(leg.L + 1)),
                              "first_q_above_6M_index": cf.first_index_above(6 * 10 ** LARGE_K_START),
                              "first_q_above_6M": sci(cf.q(cf.first_index_above(6 * 10 ** LARGE_K_START))),
                              "certified_quotients": cf.certified_len}
    phase.check("legendre_applies", leg.Y >= 52 * 10 ** LARGE_K_START, f"Y = {sci(leg.Y)}")
    phase.compare("a_max_3308", leg.a_max == 3308, f"max a_(l+1), l <= {leg.L}: {leg.a_max}")

    rows: List[LargeKRow] = []
    M_exp = LARGE_K_START
    while len(rows) < cfg.max_rows:
        row = large_k_row(data, M_exp)
        rows.append(row)
        log.info("M=1e%d: n-n1 <= %d, m-m1 <= %d, k <= %d", M_exp, *row.bounds())
        if len(rows) >= 2 and rows[-2].M_exp == row.M_exp and rows[-2].bounds() == row.bounds():
            break
        M_exp = next_M_exp(row.k_bound)
    phase.data["rows"] = [{"M_exp": r.M_exp, "n_diff": r.n_diff, "m_diff": r.m_diff, "k": r.k_bound,
                           "legendre": asdict(r.legendre) | {"Y": sci(r.legendre.Y)},
                           "families": r.families} for r in rows]
    unhandled = sum(f["unhandled"] for r in rows for k, f in r.families.items() if k != "k_bounds")
    phase.check("no_unhandled_failures", unhandled == 0, f"{unhandled} members without a bound")
    # each row is sound on its own, so only the k column must shrink for the
    # iteration to converge; the other columns are reported per row
    k_mono = all(b.k_bound <= a.k_bound for a, b in zip(rows, rows[1:]))
    phase.check("k_nonincreasing", k_mono, " -> ".join(str(r.k_bound) for r in rows))
    for i, (a, b) in enumerate(zip(rows, rows[1:]), start=2):
        ok = all(x <= y for x, y in zip(b.bounds(), a.bounds()))
        phase.compare(f"monotone_row{i}", ok, f"{b.bounds()} after {a.bounds()}")
    stable = len(rows) >= 2 and rows[-1].bounds() == rows[-2].bounds() and rows[-1].M_exp == rows[-2].M_exp
    phase.check("stabilized", stable, f"after {len(rows)} rows")
    final_k = rows[-1].k_bound
    phase.check("k_below_cutoff", final_k <= N_ASSUMED, f"k <= {final_k} contradicts k > {N_ASSUMED}")
    for i, (r, ref) in enumerate(zip(rows, TABLE1), start=1):
        got = (r.M_exp,) + r.bounds()
        phase.compare(f"table1_row{i}", got == ref, f"got {got}, published {ref}")
    phase.compare("final_k_584", final_k == 584, f"k <= {final_k}")
    return phase


# -- bounds ----------------------------------------------------------------------------

CASE_SPLIT_TARGETS = (("Gamma_vs_5.88e8", "5.88e8"), ("Gamma1_5.3.2", "6.43e19"),
                      ("min_5.3.2", "6.44e19"), ("Gamma3_5.3.4", "1.86e31"), ("k_final", "5.42e31"))


def run_case_split_bounds() -> PhaseReport:
    """Matveev constants of the case split and the bound chain, against their quoted values.

    Raises :class:`CoefficientUnderivable` when a recomputed constant exceeds its
    quoted value by more than 1%.
    """
    phase = PhaseReport("bounds")
    split = baker.case_split_chain()
    chain = baker.bd_chain()
    repaired = baker.bd_chain(repaired=True)
    for step in split + chain:
        if step.within_tolerance is not True:
            raise CoefficientUnderivable(f"{step.name}: {step.recomputed.str(8)} vs {sci(step.stated)}")
    for step in split:
        phase.compare(f"split_{step.name}", step.majorant, f"{sci(step.recomputed.upper, 6)} <= {sci(step.stated)}")
    for step in chain:
        phase.compare(f"chain_{step.name}", step.majorant and step.form_ok,
                      f"{sci(step.recomputed.upper, 6)} <= {sci(step.stated)}; form_ok={step.form_ok}")
    # what the later argument consumes: the final k constant and the lemma bound
    phase.check("k_final_majorant", baker.chain_step(split, "k_final").majorant,
                sci(baker.chain_step(split, "k_final").recomputed.upper, 6))
    for name in ("T", "lemma_bd"):
        st = baker.chain_step(repaired, name)
        phase.check(f"repaired_{name}", st.majorant and st.form_ok,
                    f"{sci(st.recomputed.upper, 6)} <= {sci(st.stated)}")
    cut = baker.cutoff_k()
    phase.check("cutoff_k", cut <= 601, f"cutoff k = {cut}")
    kb, nb = baker.absolute_bounds()
    phase.check("absolute_k", kb < 10 ** 41, f"k < {sci(kb, 6)}")
    phase.check("absolute_n", nb < 10 ** 507, f"n < {sci(nb, 6)}")
    phase.data.update(case_split=[s.to_dict() for s in split], chain=[s.to_dict() for s in chain],
                      repaired=[s.to_dict() for s in repaired], cutoff_k=cut,
                      absolute_k=sci(kb, 6), absolute_n=sci(nb, 6))
    return phase


# -- driver and output -----------------------------------------------------------------

def certify(cfg: PipelineConfig) -> CertificationReport:
    report = CertificationReport(config={k: (str(v) if isinstance(v, int) and v > 2 ** 53 else v)
                                         for k, v in asdict(cfg).items() if k != "checkpoint_dir"})
    for name, run in (("bounds", run_case_split_bounds),
                      ("small_k", lambda: run_small_k_phase(cfg.k_lo, cfg.k_hi, cfg, report)),
                      ("large_k", lambda: run_large_k_phase(cfg))):
        try:
            report.phases.append(run())
        except PillaiError as exc:
            failed = PhaseReport(name)
            failed.check("completed", False, f"{type(exc).__name__}: {exc}")
            report.phases.append(failed)
    for p in report.phases:
        for c in p.comparisons:
            if not c.ok:
                report.flags.append(f"{p.name}.{c.name}: {c.detail}")
    if cfg.k_hi < N_ASSUMED:
        report.flags.append(f"scope: small-k sweep covers k <= {cfg.k_hi}; the argument needs k <= {N_ASSUMED}")
    return report


def emit_report(report: CertificationReport, fmt: str = "json") -> bytes:
    """Deterministic serialization: versioned JSON or a markdown summary."""
    if fmt == "json":
        return (json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n").encode()
    if fmt != "markdown":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [f"# Certification report (schema {SCHEMA_VERSION})", "", f"Status: **{report.status}**", ""]
    if not report.phases:
        lines.append("No phases were run.")
    for p in report.phases:
        lines += [f"## {p.name}: {p.status}", ""]
        for c in p.checks:
            lines.append(f"- [{'x' if c.ok else ' '}] {c.name}: {c.detail}")
        for c in p.comparisons:
            lines.append(f"- ({'match' if c.ok else 'differs'}) {c.name}: {c.detail}")
        lines.append("")
        if p.name == "large_k" and "rows" in p.data:
            lines += ["| | M | n-n1 <= | m-m1 <= | k <= |", "|---|---|---|---|---|"]
            for i, r in enumerate(p.data["rows"], start=1):
                lines.append(f"| {i} | 10^{r['M_exp']} | {r['n_diff']} | {r['m_diff']} | {r['k']} |")
            lines.append("")
    if report.flags:
        lines += ["## Flags", ""] + [f"- {f}" for f in report.flags] + [""]
    return "\n".join(lines).encode()
