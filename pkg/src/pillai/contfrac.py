"""Certified continued fractions of real balls.

Indices are 0-based in the usual way: ``x = [a_0; a_1, a_2, ...]`` with
convergents ``p_l / q_l`` and ``q_0 = 1``.  A quotient is emitted only when the
Euclidean algorithm run on both endpoints of the ball agrees on it, so every
quotient returned is correct for every real number inside the ball.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import List, Optional, Tuple, Union

from .errors import IndexBeyondCertified, PrecisionExhausted, RationalTerminated
from .realball import DEFAULT_PRECISION, RealBall, lt


@dataclass(frozen=True)
class CFExpansion:
    """Partial quotients and convergents of ``value``, all exact integers."""

    value: RealBall
    quotients: Tuple[int, ...]
    convergents: Tuple[Tuple[int, int], ...]
    certified_len: int
    terminated: bool = False  # the ball is a single rational whose expansion ended

    def p(self, l: int) -> int:
        return self.convergents[self._idx(l)][0]

    def q(self, l: int) -> int:
        return self.convergents[self._idx(l)][1]

    def a(self, l: int) -> int:
        return self.quotients[self._idx(l)]

    def _idx(self, l: int) -> int:
        if not 0 <= l < self.certified_len:
            raise IndexBeyondCertified(f"index {l} outside certified range [0, {self.certified_len})")
        return l

    def first_index_above(self, bound: int) -> int:
        """Smallest ``l`` with ``q_l > bound``."""
        for l, (_, q) in enumerate(self.convergents):
            if q > bound:
                return l
        raise IndexBeyondCertified(f"no certified convergent with q > {bound}")

    def last_index_below(self, bound: int) -> int:
        """Largest ``l`` with ``q_l < bound``; needs a certified ``q_{l+1} >= bound``."""
        return self.first_index_above(bound - 1) - 1

    def index_of(self, x: int, y: int) -> Optional[int]:
        for l, (p, q) in enumerate(self.convergents):
            if q == y and p == x:
                return l
            if q > y:
                break
        return None


def _endpoints(x: Union[RealBall, Fraction, int]) -> Tuple[Fraction, Fraction, RealBall]:
    if isinstance(x, RealBall):
        return x.lower, x.upper, x
    x = Fraction(x)
    return x, x, RealBall(x, DEFAULT_PRECISION)


def _quotient_stream(lo: Fraction, hi: Fraction):
    """Yield certified quotients shared by every real in ``[lo, hi]``.

    Each endpoint is a fraction ``P/Q`` run through Euclid; the remainder
    interval flips orientation at every step, which is harmless because only
    the floors are compared.  Yields ``(a, done)`` where ``done`` means no
    later quotient can be certified (an endpoint's expansion has ended).
    """
    P1, Q1 = lo.numerator, lo.denominator
    P2, Q2 = hi.numerator, hi.denominator
    while True:
        a1, r1 = divmod(P1, Q1)
        a2, r2 = divmod(P2, Q2)
        if a1 != a2:
            return
        if r1 == 0 or r2 == 0:
            # an endpoint is exactly [..., a]; other points share a, but the
            # next remainder interval is unbounded
            yield a1, True
            return
        yield a1, False
        P1, Q1 = Q1, r1
        P2, Q2 = Q2, r2


def cf_expand(x: Union[RealBall, Fraction, int], min_q: Optional[int] = None, *,
              to_index: Optional[int] = None, extra: int = 0) -> CFExpansion:
    """Expand ``x`` until ``q_l > min_q`` (plus ``extra`` more quotients).

    With ``to_index`` the target is instead the certified quotient ``a_to_index``.
    Without either target every certifiable quotient is returned.

    Raises :class:`RationalTerminated` when ``x`` is one rational whose
    expansion ends before the target, and :class:`PrecisionExhausted` when the
    ball is too wide to certify the next quotient.
    """
    lo, hi, ball = _endpoints(x)
    exact = lo == hi
    quotients: List[int] = []
    convergents: List[Tuple[int, int]] = []
    p0, p1 = 1, 0  # p_{l-1}, p_{l-2}
    q0, q1 = 0, 1
    goal_index = None
    terminated = False
    for a, done in _quotient_stream(lo, hi):
        p0, p1 = a * p0 + p1, p0
        q0, q1 = a * q0 + q1, q0
        quotients.append(a)
        convergents.append((p0, q0))
        l = len(quotients) - 1
        if goal_index is None:
            if to_index is not None and l >= to_index:
                goal_index = l + extra
            elif min_q is not None and to_index is None and q0 > min_q:
                goal_index = l + extra
        if goal_index is not None and l >= goal_index:
            break
        if done:
            terminated = exact
            break
    have = len(quotients)
    wanted = to_index is not None or min_q is not None
    if wanted and (goal_index is None or have <= goal_index):
        if terminated:
            raise RationalTerminated(
                f"{lo} has only {have} quotients, short of the requested target")
        raise PrecisionExhausted(
            f"only {have} quotients certifiable at {ball.precision_bits} bits")
    return CFExpansion(value=ball, quotients=tuple(quotients), convergents=tuple(convergents),
                       certified_len=have, terminated=terminated)


def max_partial_quotient(exp: CFExpansion, l_hi: int) -> Tuple[int, int]:
    """``max{a_{l+1} : 0 <= l <= l_hi}`` and the index of the maximising quotient."""
    if l_hi < 0:
        raise ValueError("l_hi must be nonnegative")
    if l_hi + 1 >= exp.certified_len:
        raise IndexBeyondCertified(f"a_{l_hi + 1} is not certified (certified_len={exp.certified_len})")
    best, where = -1, -1
    for i in range(1, l_hi + 2):
        if exp.quotients[i] > best:
            best, where = exp.quotients[i], i
    return best, where


@dataclass(frozen=True)
class LegendreResult:
    """Outcome of locating ``x/y`` among the convergents of ``tau``.

    ``status`` is ``"convergent"``, ``"not_convergent"`` or ``"unknown"``.
    ``criterion`` reports whether ``|tau - x/y| < 1/(2 y^2)`` is certified
    (True/False/None); ``lower_bound`` is ``1/((a_{l+1} + 2) q_l^2)`` when ``x/y``
    is the convergent ``p_l/q_l``.
    """

    status: str
    index: Optional[int] = None
    criterion: Optional[bool] = None
    lower_bound: Optional[RealBall] = None
    distance: Optional[RealBall] = field(default=None, compare=False)


def legendre_locate(tau: RealBall, x: int, y: int, cf: Optional[CFExpansion] = None) -> LegendreResult:
    """Decide whether ``x/y`` is a convergent of ``tau``."""
    if y <= 0 or gcd(x, y) != 1:
        raise ValueError("need y > 0 and gcd(x, y) = 1")
    distance = abs(tau - Fraction(x, y))
    criterion = lt(distance, Fraction(1, 2 * y * y))
    if cf is None:
        try:
            cf = cf_expand(tau, y)
        except (PrecisionExhausted, RationalTerminated):
            cf = cf_expand(tau)
    idx = cf.index_of(x, y)
    if idx is not None:
        bound = None
        if idx + 1 < cf.certified_len:
            a_next = cf.quotients[idx + 1]
            bound = RealBall(Fraction(1, (a_next + 2) * y * y), tau.precision_bits)
        return LegendreResult("convergent", idx, criterion, bound, distance)
    covered = cf.certified_len > 0 and cf.convergents[-1][1] >= y
    if covered:
        return LegendreResult("not_convergent", None, criterion, None, distance)
    return LegendreResult("unknown", None, criterion, None, distance)
