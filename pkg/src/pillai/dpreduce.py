"""Dujella-Petho reduction of ``0 < |u tau - v + mu| < A B^(-w)`` with ``u <= M``.

For a convergent denominator ``q > 6M`` of ``tau`` put
``eps = ||mu q|| - M ||tau q||``.  When ``eps > 0`` no solution has
``w >= log(A q / eps) / log B``, so ``w <= floor(log(A q / eps) / log B)``.

Three entry points:

* :func:`dp_reduce` runs one instance with ball arithmetic.
* :func:`dp_reduce_grid` sweeps a family ``mu = x_i + y_j`` (or a single
  list) with exact fixed-point integers: every term is rounded outward to a
  multiple of ``2^-P`` once, after which each member costs one integer
  subtraction.  This is the workhorse for the large sweeps.
* :func:`homogeneous_reduce` handles ``mu in Z + Z tau``, where ``eps`` is
  never positive; it uses the best-approximation property of convergents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .contfrac import CFExpansion
from .errors import (DomainError, EpsilonNonPositive, IndexBeyondCertified, MuNearZero,
                     PillaiError, PrecisionExhausted)
from .realball import RealBall, dist_to_nearest_int, floor, floor_upper, gt, lt

MAX_RETRIES = 8


@dataclass(frozen=True)
class ReductionCase:
    """One instance: bound ``|u tau - v + mu| < A B^(-w)`` with ``0 < u <= M``."""

    tau: RealBall
    mu: RealBall
    A: RealBall
    B: RealBall
    M: int
    label: Hashable = None

    def __post_init__(self):
        if self.M < 1:
            raise DomainError("M must be at least 1")
        if lt(0, self.A) is not True:
            raise DomainError("A must be certified positive")
        if lt(1, self.B) is not True:
            raise DomainError("B must be certified above 1")


@dataclass(frozen=True)
class ReductionOutcome:
    """Result of one reduction.

    ``w_bound`` is the certified floor of ``X = log(A q / eps) / log B`` or,
    when the ball for ``X`` straddles an integer, the floor of its upper end
    with ``sharp`` set to False.
    """

    q: int
    epsilon: RealBall
    w_bound: int
    convergent_index: int
    attempts: int
    X: RealBall
    sharp: bool = True
    label: Hashable = None
    method: str = "dujella-petho"

    def to_dict(self) -> dict:
        return {
            "label": _jsonable(self.label),
            "method": self.method,
            "convergent_index": self.convergent_index,
            "q_digits": len(str(self.q)),
            "epsilon_lower": float(self.epsilon.lower),
            "X_upper": float(self.X.upper),
            "w_bound": self.w_bound,
            "sharp": self.sharp,
            "attempts": self.attempts,
        }


def _jsonable(label):
    if isinstance(label, tuple):
        return list(label)
    return label


def _w_from(A: RealBall, B: RealBall, q: Union[int, RealBall], eps: RealBall) -> Tuple[RealBall, int, bool]:
    X = (A * q / eps).log() / B.log()
    w = floor(X)
    if w is not None:
        return X, w, True
    return X, floor_upper(X), False


def required_precision(M: int, q: int, slack: int = 96) -> int:
    """Bits so that ``M ||tau q||`` and ``||mu q||`` are resolved far below 1."""
    return M.bit_length() + q.bit_length() + slack


def _first_index(cf: CFExpansion, M: int) -> int:
    return cf.first_index_above(6 * M)


def dp_reduce(case: ReductionCase, cf: CFExpansion, max_retries: int = MAX_RETRIES) -> ReductionOutcome:
    """Reduce one instance, trying up to ``max_retries`` further convergents."""
    if case.mu.contains_zero():
        raise MuNearZero(f"mu ball {case.mu.str(10)} contains 0")
    i0 = _first_index(cf, case.M)
    undecided = 0
    for attempt, i in enumerate(range(i0, i0 + max_retries + 1), start=1):
        if i >= cf.certified_len:
            raise PrecisionExhausted(f"convergent {i} is beyond the certified expansion")
        q = cf.q(i)
        eps = dist_to_nearest_int(case.mu * q) - case.M * dist_to_nearest_int(case.tau * q)
        verdict = gt(eps, 0)
        if verdict:
            X, w, sharp = _w_from(case.A, case.B, q, eps)
            return ReductionOutcome(q, eps, w, i, attempt, X, sharp, case.label)
        if verdict is None:
            undecided += 1
    if undecided:
        raise PrecisionExhausted(f"eps undecided at {undecided} convergents; raise precision")
    raise EpsilonNonPositive(f"eps <= 0 at convergents {i0}..{i0 + max_retries}")


# -- degenerate offsets ----------------------------------------------------------------

def s_unit_exponents(r: Fraction, primes: Tuple[int, int] = (2, 3)) -> Optional[Tuple[int, int]]:
    """``(a, b)`` with ``r = p^a * s^b`` for ``(p, s) = primes``, or None."""
    r = Fraction(r)
    if r <= 0:
        return None
    exps = []
    num, den = r.numerator, r.denominator
    for p in primes:
        e = 0
        while num % p == 0:
            num //= p
            e += 1
        while den % p == 0:
            den //= p
            e -= 1
        exps.append(e)
    if num != 1 or den != 1:
        return None
    return exps[0], exps[1]


def homogeneous_reduce(tau: RealBall, cf: CFExpansion, a: int, b: int, A: RealBall, B: RealBall,
                       M: int, label: Hashable = None, delta: Optional[RealBall] = None) -> ReductionOutcome:
    """Bound ``w`` when ``mu = a + b tau + delta`` with ``delta`` tiny (zero by default).

    Then ``u tau - v + mu = u' tau - v' + delta`` with ``u' = u + b`` and
    ``|u'| <= M + |b|``.  For ``u' != 0`` the best-approximation property gives
    ``|u' tau - v'| >= ||q_L tau||`` where ``q_L`` is the largest convergent
    denominator not exceeding ``M + |b|``, so the form is at least
    ``||q_L tau|| - |delta|``.  For ``u' = 0`` the form is ``delta - v'``; with
    ``v' != 0`` it is at least ``1 - |delta|``.  The case ``u' = v' = 0`` leaves
    only ``delta`` itself: it is impossible when ``delta = 0`` (the form is
    nonzero) and the caller must exclude it otherwise.
    """
    bound = M + abs(b)
    L = cf.first_index_above(bound) - 1
    if L < 0:
        raise IndexBeyondCertified("no convergent below the bound")
    qL = cf.q(L)
    d = dist_to_nearest_int(tau * qL)
    slack = RealBall(abs(delta).upper, tau.precision_bits) if delta is not None else None
    if slack is not None:
        d = d - slack
    if lt(0, d) is not True:
        raise PrecisionExhausted("||q_L tau|| - |delta| is not certified positive")
    X = (A / d).log() / B.log()
    X0 = (A / (1 - slack)).log() / B.log() if slack is not None else A.log() / B.log()
    if X0.upper > X.upper:
        X = X0
    w = floor(X)
    sharp = w is not None
    if w is None:
        w = floor_upper(X)
    return ReductionOutcome(qL, d, w, L, 1, X, sharp, label, method="homogeneous")


# -- family sweeps ----------------------------------------------------------------------

@dataclass
class FamilySummary:
    """Aggregate of a family sweep.

    ``max_w_bound`` is the statistic a reduction table reports; ``min_epsilon``
    is the smallest certified ``eps`` over members reduced by Dujella-Petho
    and ``min_epsilon_first_q`` the same restricted to members that succeeded
    at the first admissible convergent.
    """

    members: int = 0
    max_w_bound: Optional[int] = None
    max_label: Hashable = None
    max_X: Optional[RealBall] = None
    sharp: bool = True
    min_epsilon: Optional[RealBall] = None
    min_epsilon_label: Hashable = None
    min_epsilon_first_q: Optional[RealBall] = None
    min_epsilon_first_q_label: Hashable = None
    failures: List[Tuple[Hashable, str]] = field(default_factory=list)
    convergents_used: Dict[int, int] = field(default_factory=dict)
    homogeneous: List[Hashable] = field(default_factory=list)

    def absorb(self, out: ReductionOutcome, first_index: Optional[int]) -> None:
        self.members += 1
        if self.max_w_bound is None or out.w_bound > self.max_w_bound or (
                out.w_bound == self.max_w_bound and self.max_X is not None
                and out.X.upper > self.max_X.upper):
            self.max_w_bound, self.max_label, self.max_X = out.w_bound, out.label, out.X
        self.sharp = self.sharp and out.sharp
        if out.method == "homogeneous":
            self.homogeneous.append(out.label)
            return
        self.convergents_used[out.convergent_index] = self.convergents_used.get(out.convergent_index, 0) + 1
        if self.min_epsilon is None or out.epsilon.lower < self.min_epsilon.lower:
            self.min_epsilon, self.min_epsilon_label = out.epsilon, out.label
        if out.convergent_index == first_index and (
                self.min_epsilon_first_q is None or out.epsilon.lower < self.min_epsilon_first_q.lower):
            self.min_epsilon_first_q, self.min_epsilon_first_q_label = out.epsilon, out.label

    def fail(self, label: Hashable, reason: str) -> None:
        self.members += 1
        self.failures.append((label, reason))

    def to_dict(self) -> dict:
        return {
            "members": self.members,
            "max_w_bound": self.max_w_bound,
            "max_label": _jsonable(self.max_label),
            "max_X_upper": None if self.max_X is None else float(self.max_X.upper),
            "sharp": self.sharp,
            "min_epsilon_lower": None if self.min_epsilon is None else float(self.min_epsilon.lower),
            "min_epsilon_label": _jsonable(self.min_epsilon_label),
            "min_epsilon_first_q_lower": (None if self.min_epsilon_first_q is None
                                          else float(self.min_epsilon_first_q.lower)),
            "min_epsilon_first_q_label": _jsonable(self.min_epsilon_first_q_label),
            "failures": [[_jsonable(l), r] for l, r in self.failures],
            "convergents_used": {str(k): v for k, v in sorted(self.convergents_used.items())},
            "homogeneous": [_jsonable(l) for l in self.homogeneous],
        }


def dp_reduce_family(cases: Sequence[ReductionCase], cf: CFExpansion,
                     max_retries: int = MAX_RETRIES) -> FamilySummary:
    """Run :func:`dp_reduce` on every member; errors land in ``failures``."""
    if not cases:
        raise DomainError("empty family")
    summary = FamilySummary()
    first = _first_index(cf, cases[0].M)
    for case in cases:
        try:
            summary.absorb(dp_reduce(case, cf, max_retries), first)
        except PillaiError as exc:
            summary.fail(case.label, type(exc).__name__)
    return summary


class _FixedPoint:
    """Outward rounding of balls to integer multiples of ``2^-P``."""

    def __init__(self, P: int):
        self.P = P
        self.S = 1 << P

    def interval(self, x: RealBall) -> Tuple[int, int]:
        lo, hi = x.lower * self.S, x.upper * self.S
        return lo.numerator // lo.denominator, -((-hi.numerator) // hi.denominator)

    def dist_bounds(self, L: int, U: int) -> Tuple[int, int]:
        """Lower and upper bounds (units ``2^-P``) of ``||z||`` over ``z in [L, U] 2^-P``."""
        S = self.S
        if U - L >= S:
            return 0, S >> 1
        jl, rl = divmod(L, S)
        ju, ru = divmod(U, S)
        dl = min(rl, S - rl)
        du = min(ru, S - ru)
        if jl != ju or rl == 0:
            lo = 0
        else:
            lo = min(dl, du)
        half = S >> 1
        if (jl == ju and rl <= half <= ru) or jl != ju and (rl <= half or ru >= half):
            hi = half
        else:
            hi = max(dl, du)
        return lo, hi


def dp_reduce_grid(tau: RealBall, cf: CFExpansion, M: int,
                   xs: Mapping[Hashable, RealBall], ys: Optional[Mapping[Hashable, RealBall]],
                   A: RealBall, B: RealBall, *, max_retries: int = MAX_RETRIES,
                   skip: Iterable[Hashable] = (), P: Optional[int] = None) -> FamilySummary:
    """Sweep ``mu = x + y`` over all pairs (or ``mu = x`` when ``ys`` is None).

    Labels are ``(x_label, y_label)`` for pairs and ``x_label`` otherwise.
    Members listed in ``skip`` are left out (the caller reduces them another
    way).  The result agrees with :func:`dp_reduce_family` on the same members
    up to the rounding slack of ``2^-P`` in ``eps``.
    """
    if M < 1 or lt(0, A) is not True or lt(1, B) is not True:
        raise DomainError("need M >= 1, A > 0, B > 1")
    i0 = _first_index(cf, M)
    fx = _FixedPoint(P if P is not None else 96)
    skip = set(skip)
    if ys is None:
        pending = [lab for lab in xs if lab not in skip]
    else:
        pending = [(a, b) for a in xs for b in ys if (a, b) not in skip]
    total = len(pending)
    summary = FamilySummary()
    best_per_index: Dict[int, Tuple[int, int, Hashable]] = {}
    for attempt, i in enumerate(range(i0, i0 + max_retries + 1), start=1):
        if not pending:
            break
        if i >= cf.certified_len:
            raise PrecisionExhausted(f"convergent {i} is beyond the certified expansion")
        q = cf.q(i)
        mt = M * dist_to_nearest_int(tau * q)
        mt_lo, mt_hi = fx.interval(mt)
        xq = {lab: fx.interval(xs[lab] * q) for lab in xs}
        yq = {lab: fx.interval(ys[lab] * q) for lab in ys} if ys is not None else None
        still: List[Hashable] = []
        best = None
        S, mask = fx.S, fx.S - 1
        thr = mt_hi
        # eps_lo > 0 needs z's whole interval inside one cell, farther than
        # mt_hi from both cell ends; the candidate test is two comparisons
        if yq is None:
            rows = [(None, 0, 0, [(lab, xq[lab][0], xq[lab][1]) for lab in pending])]
        else:
            by_x: Dict[Hashable, list] = {}
            for lab in pending:
                by_x.setdefault(lab[0], []).append(lab)
            rows = [(xl_lab, xq[xl_lab][0], xq[xl_lab][1],
                     [(lab, yq[lab[1]][0], yq[lab[1]][1]) for lab in labs])
                    for xl_lab, labs in by_x.items()]
        for _, xl, xu, cols in rows:
            for lab, yl, yu in cols:
                L = xl + yl
                r = L & mask
                r_hi = r + (xu + yu - L)
                if r > thr and S - r_hi > thr:
                    e_lo = min(r, S - r_hi) - thr
                    if best is None or e_lo < best[0]:
                        best = (e_lo, L, xu + yu, lab)
                else:
                    still.append(lab)
        if best is not None:
            _, bl, bu, blab = best
            dlo, dhi = fx.dist_bounds(bl, bu)
            best = (dlo - mt_hi, dhi - mt_lo, blab)
        if best is not None:
            best_per_index[i] = best
            summary.convergents_used[i] = len(pending) - len(still)
        pending = still
    for lab in pending:
        summary.failures.append((lab, "EpsilonNonPositive"))
    prec = max(tau.precision_bits, 128)
    for i, (e_lo, e_hi, lab) in sorted(best_per_index.items()):
        eps = RealBall.from_interval(Fraction(e_lo, fx.S), Fraction(e_hi, fx.S), prec)
        X, w, sharp = _w_from(A, B, cf.q(i), RealBall(Fraction(e_lo, fx.S), prec))
        summary.absorb(ReductionOutcome(cf.q(i), eps, w, i, i - i0 + 1, X, sharp, lab), i0)
    summary.members = total
    return summary


def merge_summaries(parts: Sequence[FamilySummary]) -> FamilySummary:
    """Combine sweeps of disjoint member sets (e.g. a grid plus degenerate members)."""
    total = FamilySummary()
    for part in parts:
        total.members += part.members
        if part.max_w_bound is not None and (
                total.max_w_bound is None or part.max_w_bound > total.max_w_bound
                or (part.max_w_bound == total.max_w_bound and part.max_X.upper > total.max_X.upper)):
            total.max_w_bound, total.max_label, total.max_X = part.max_w_bound, part.max_label, part.max_X
        total.sharp = total.sharp and part.sharp
        for attr in ("min_epsilon", "min_epsilon_first_q"):
            mine, theirs = getattr(total, attr), getattr(part, attr)
            if theirs is not None and (mine is None or theirs.lower < mine.lower):
                setattr(total, attr, theirs)
                setattr(total, attr + "_label", getattr(part, attr + "_label"))
        total.failures.extend(part.failures)
        total.homogeneous.extend(part.homogeneous)
        for k, v in part.convergents_used.items():
            total.convergents_used[k] = total.convergents_used.get(k, 0) + v
    return total
