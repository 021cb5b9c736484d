"""k-generalized Fibonacci numbers: exact terms and the dominant root.

``F^(k)`` starts with ``k - 1`` zeros followed by a one (indices ``2 - k`` up
to ``1``) and every later term is the sum of the ``k`` before it.  Terms are
computed exactly with the three-term form ``F_n = 2 F_{n-1} - F_{n-k-1}``.
Real-valued companions (the dominant root ``alpha`` of the characteristic
polynomial, ``f_k(alpha)``, the Binet-type approximation) come back as
certified :class:`~pillai.realball.RealBall` enclosures.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional

from .errors import DomainError, PrecisionExhausted
from .realball import DEFAULT_PRECISION, RealBall, escalate, le, lt, precision_cap


# -- exact terms -------------------------------------------------------------

class _Table:
    """Growing list with ``vals[i] == F_{i + 2 - k}``."""

    __slots__ = ("k", "vals")

    def __init__(self, k: int):
        self.k = k
        self.vals = [0] * (k - 1) + [1]

    def upto(self, n: int) -> List[int]:
        k, vals = self.k, self.vals
        need = n + k - 1  # list length that covers index n
        if len(vals) < need:
            if len(vals) == k:  # F_2 = F_1: the three-term form starts at n = 3
                vals.append(1)
            while len(vals) < need:
                vals.append(2 * vals[-1] - vals[-k - 1])
        return vals


@lru_cache(maxsize=64)
def _table(k: int) -> _Table:
    return _Table(k)


def _check_k(k: int) -> None:
    if not isinstance(k, int) or k < 2:
        raise DomainError(f"k must be an integer >= 2, got {k!r}")


def fib_at(k: int, n: int) -> int:
    """Exact ``F_n^(k)`` for ``n >= 2 - k``."""
    _check_k(k)
    if n < 2 - k:
        raise DomainError(f"index {n} is below the first term 2 - k = {2 - k}")
    return _table(k).upto(n)[n + k - 2]


def fib_block(k: int, n_lo: int, n_hi: int) -> List[int]:
    """``[F_{n_lo}, ..., F_{n_hi}]`` as exact integers."""
    _check_k(k)
    if n_lo > n_hi:
        raise DomainError("n_lo must not exceed n_hi")
    if n_lo < 2 - k:
        raise DomainError(f"index {n_lo} is below the first term 2 - k = {2 - k}")
    vals = _table(k).upto(n_hi)
    return vals[n_lo + k - 2:n_hi + k - 1]


def power2_gap_monotone(k: int, n_hi: int) -> bool:
    """Exact check of the gap ``g(n) = 2^(n-2) - F_n``.

    True when ``g`` vanishes on ``[2, k+1]``, ``g(k+2) = 1`` and ``g`` is
    strictly increasing on ``[k+2, n_hi]``.
    """
    _check_k(k)
    if n_hi < k + 2:
        raise DomainError("n_hi must be at least k + 2")
    terms = fib_block(k, 2, n_hi)
    gaps = [(1 << (i)) - f for i, f in enumerate(terms)]  # index i is n = i + 2
    if any(gaps[: k]):
        return False
    if gaps[k] != 1:
        return False
    return all(a < b for a, b in zip(gaps[k:], gaps[k + 1:]))


# -- the dominant root ---------------------------------------------------------

@dataclass(frozen=True)
class KFibContext:
    """Certified real data attached to one ``k``."""

    k: int
    alpha: RealBall
    fk_alpha: RealBall
    log_alpha: RealBall

    @property
    def precision_bits(self) -> int:
        return self.alpha.precision_bits


def _g(x: RealBall, k: int) -> RealBall:
    # Psi_k(x) * (x - 1) = x^k (x - 2) + 1, monotone increasing near 2
    return x.pow_int(k) * (x - 2) + 1


def _g_prime(x: RealBall, k: int) -> RealBall:
    return x.pow_int(k - 1) * ((k + 1) * x - 2 * k)


def _sign(x: Fraction, k: int, prec: int) -> Optional[int]:
    v = _g(RealBall(x, prec), k)
    if lt(v, 0):
        return -1
    if lt(0, v):
        return 1
    return None


def _bracket_root(k: int, prec: int) -> Optional[tuple]:
    """Shrink ``[lo, hi]`` with ``g(lo) < 0 < g(hi)`` to width about ``2^-(prec-16)``."""
    lo = 2 - Fraction(2, 1 << k)
    hi = Fraction(2)
    if _sign(lo, k, prec) != -1 or _sign(hi, k, prec) != 1:
        return None
    target = Fraction(1, 1 << max(prec - 16, 8))
    # plain bisection to a few dozen correct bits, then Newton guesses each
    # verified by a sign change, which keeps the bracket certified
    for _ in range(40):
        if hi - lo <= target:
            return lo, hi
        mid = (lo + hi) / 2
        s = _sign(mid, k, prec)
        if s is None:
            return None
        if s < 0:
            lo = mid
        else:
            hi = mid
    while hi - lo > target:
        width = hi - lo
        x = RealBall((lo + hi) / 2, prec)
        step = _g(x, k) / _g_prime(x, k)
        guess = _dyadic((x - step).midpoint, prec)
        delta = max(_dyadic(width * width * (4 * k + 64), prec), target / 4)
        a, b = guess - delta, guess + delta
        if lo < a and b < hi and _sign(a, k, prec) == -1 and _sign(b, k, prec) == 1:
            lo, hi = a, b
            continue
        mid = (lo + hi) / 2  # Newton guess not verified: fall back to halving
        s = _sign(mid, k, prec)
        if s is None:
            return lo, hi
        if s < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo >= width:
            return None
    return lo, hi


def _dyadic(x: Fraction, prec: int) -> Fraction:
    """Round ``x`` to a dyadic rational with about ``prec + 8`` fractional bits."""
    scale = 1 << (prec + 8)
    return Fraction(round(x * scale), scale)


def _context_at(k: int, prec: int) -> Optional[KFibContext]:
    bracket = _bracket_root(k, prec)
    if bracket is None:
        return None
    alpha = RealBall.from_interval(bracket[0], bracket[1], prec)
    fk = (alpha - 1) / (2 + (k + 1) * (alpha - 2))
    ctx = KFibContext(k=k, alpha=alpha, fk_alpha=fk, log_alpha=alpha.log())
    return ctx if context_invariants(ctx) else None


def context_invariants(ctx: KFibContext) -> bool:
    """Certified root enclosure, sign change of Psi_k across the ball, 1/2 < f_k(alpha) < 3/4."""
    k, alpha, fk = ctx.k, ctx.alpha, ctx.fk_alpha
    lower = 2 - Fraction(2, 1 << k)
    return bool(
        lt(lower, alpha) and lt(alpha, 2)
        and _g(alpha, k).contains_zero()
        and lt(Fraction(1, 2), fk) and lt(fk, Fraction(3, 4))
    )


@lru_cache(maxsize=1024)
def make_context(k: int, precision: int = DEFAULT_PRECISION) -> KFibContext:
    """Certified ``alpha(k)``, ``f_k(alpha)`` and ``log alpha``.

    The root is bracketed by sign changes of ``x^k (x - 2) + 1`` (which is
    increasing on ``[2(1 - 2^-k), 2]``), so the enclosure is certified with no
    appeal to floating point.  Precision doubles until every invariant holds;
    ``k`` near 600 needs more than ``k`` bits because ``2 - alpha`` is about
    ``2^(1-k)``.
    """
    _check_k(k)
    start = max(precision, k + 64)
    return escalate(lambda p: _context_at(k, p), start=start, cap=max(precision_cap(), start))


def _refined(ctx: KFibContext, fn, accept):
    """Evaluate ``fn(ctx)`` and retry on finer contexts until ``accept`` holds."""
    prec = ctx.precision_bits
    cap = max(precision_cap(), prec)
    while True:
        out = fn(ctx)
        if accept(out):
            return out
        prec *= 2
        if prec > cap:
            raise PrecisionExhausted(f"k={ctx.k}: undecided at {cap} bits")
        ctx = make_context(ctx.k, prec)


def dominant_term(ctx: KFibContext, n: int) -> RealBall:
    """``f_k(alpha) * alpha^(n-1)``."""
    return ctx.fk_alpha * ctx.alpha.pow_int(n - 1)


def binet_error(ctx: KFibContext, n: int) -> RealBall:
    """Ball for ``|F_n - f_k(alpha) alpha^(n-1)|``, tight enough to compare with 1/2."""
    if n < 2 - ctx.k:
        raise DomainError("n must be at least 2 - k")
    exact = fib_at(ctx.k, n)
    return _refined(
        ctx,
        lambda c: abs(exact - dominant_term(c, n)),
        lambda b: b.radius < Fraction(1, 1 << 20),
    )


def power_bounds_check(ctx: KFibContext, n: int) -> Optional[bool]:
    """Certify ``alpha^(n-2) <= F_n <= alpha^(n-1)``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    exact = fib_at(ctx.k, n)

    def verdict(c: KFibContext):
        a, b = le(c.alpha.pow_int(n - 2), exact), le(exact, c.alpha.pow_int(n - 1))
        if a is False or b is False:
            return False
        if a and b:
            return True
        return None

    return _refined(ctx, verdict, lambda v: v is not None)


def zeta_of(k: int, n: int) -> RealBall:
    """The exact relative error ``F_n / 2^(n-2) - 1`` as a ball."""
    _check_k(k)
    if k < 10:
        raise DomainError("zeta_of needs k >= 10")
    if n < 1 or (n * n >> k) >= 1:  # n < 2^(k/2)  <=>  n^2 < 2^k
        raise DomainError("zeta_of needs 1 <= n < 2^(k/2)")
    value = Fraction(fib_at(k, n)) / Fraction(2) ** (n - 2) - 1
    return RealBall(value, max(DEFAULT_PRECISION, 2 * n + 64))


# -- solutions -----------------------------------------------------------------

@dataclass(frozen=True)
class SolutionRecord:
    """A verified instance ``F_n - b^m = F_{n1} - b^{m1} = c``."""

    k: int
    n: int
    m: int
    n1: int
    m1: int
    c: int
    lhs: int
    rhs: int
    base: int = 3

    def __post_init__(self):
        if not (self.n > self.n1 >= 2 and self.m > self.m1 >= 1):
            raise DomainError(f"indices violate n > n1 >= 2, m > m1 >= 1: {self}")
        if not (self.lhs == self.rhs == self.c):
            raise DomainError(f"sides disagree: {self.lhs} vs {self.rhs} vs c={self.c}")
        if self.lhs != fib_at(self.k, self.n) - self.base ** self.m:
            raise DomainError("lhs does not match F_n - b^m")
        if self.rhs != fib_at(self.k, self.n1) - self.base ** self.m1:
            raise DomainError("rhs does not match F_n1 - b^m1")

    @classmethod
    def build(cls, k: int, n: int, m: int, n1: int, m1: int, base: int = 3) -> "SolutionRecord":
        lhs = fib_at(k, n) - base ** m
        rhs = fib_at(k, n1) - base ** m1
        return cls(k=k, n=n, m=m, n1=n1, m1=m1, c=lhs, lhs=lhs, rhs=rhs, base=base)

    def to_dict(self) -> dict:
        return {"k": self.k, "n": self.n, "m": self.m, "n1": self.n1, "m1": self.m1, "c": self.c}
