"""Midpoint-radius real balls with outward rounding.

Every real quantity the certification touches (the dominant root, its
logarithm, continued-fraction remainders, reduction epsilons) lives in a
:class:`RealBall`.  A ball stands for the closed interval
``[midpoint - radius, midpoint + radius]`` and every operation returns a ball
that contains the exact result for any inputs drawn from its operands.

The arithmetic kernel is Arb (through ``python-flint``); this module fixes the
working precision per operation, turns undecidable comparisons into ``None``
instead of a guess, and provides the precision-doubling retry loop.
"""

from __future__ import annotations

import ast
import os
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, TypeVar, Union

from flint import arb, ctx, fmpq

from .errors import DivisorStraddlesZero, DomainError, PrecisionExhausted

DEFAULT_PRECISION = 256
_DEFAULT_CAP = 1 << 20

T = TypeVar("T")
Number = Union[int, Fraction, "RealBall"]


def precision_cap() -> int:
    """Largest working precision (bits) the escalation loop may reach."""
    raw = os.environ.get("PILLAI_PRECISION_CAP")
    return int(raw) if raw else _DEFAULT_CAP


def _run(prec: int, fn: Callable[..., T], *args) -> T:
    old = ctx.prec
    if old == prec:
        return fn(*args)
    ctx.prec = prec
    try:
        return fn(*args)
    finally:
        ctx.prec = old


def _arb_to_fraction(x: arb) -> Fraction:
    man, exp = x.man_exp()
    man, exp = int(man), int(exp)
    if exp >= 0:
        return Fraction(man << exp)
    return Fraction(man, 1 << -exp)


def _to_arb(value, prec: int) -> arb:
    if isinstance(value, bool):
        raise TypeError("bool is not a real number here")
    if isinstance(value, int):
        return arb(value)
    if isinstance(value, float):
        value = Fraction(value)
    if isinstance(value, str):
        value = Fraction(value)
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return arb(value.numerator)
        return _run(prec, lambda: arb(fmpq(value.numerator, value.denominator)))
    raise TypeError(f"cannot build a RealBall from {type(value).__name__}")


class RealBall:
    """A certified enclosure ``midpoint ± radius`` of one real number.

    Instances are immutable.  ``precision_bits`` is the working precision used
    by operations producing new balls from this one; binary operations run at
    the larger precision of their operands.
    """

    __slots__ = ("_v", "precision_bits")

    def __init__(self, value: Union[int, Fraction, str, float, arb, "RealBall"] = 0,
                 precision_bits: int = DEFAULT_PRECISION):
        if precision_bits < 2:
            raise ValueError("precision_bits must be at least 2")
        if isinstance(value, RealBall):
            v = value._v
        elif isinstance(value, arb):
            v = value
        else:
            v = _to_arb(value, precision_bits)
        object.__setattr__(self, "_v", v)
        object.__setattr__(self, "precision_bits", int(precision_bits))

    @classmethod
    def _wrap(cls, v: arb, prec: int) -> "RealBall":
        out = object.__new__(cls)
        object.__setattr__(out, "_v", v)
        object.__setattr__(out, "precision_bits", prec)
        return out

    @classmethod
    def from_interval(cls, lo: Union[int, Fraction], hi: Union[int, Fraction],
                      precision_bits: int = DEFAULT_PRECISION) -> "RealBall":
        """Smallest representable ball containing ``[lo, hi]``."""
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi:
            raise ValueError("empty interval")
        a = _to_arb(lo, precision_bits)
        b = _to_arb(hi, precision_bits)
        return cls._wrap(_run(precision_bits, a.union, b), precision_bits)

    def __setattr__(self, name, value):
        raise AttributeError("RealBall is immutable")

    def __reduce__(self):
        return (_rebuild, (self.midpoint, self.radius, self.precision_bits))

    # -- views -------------------------------------------------------------

    @property
    def arb(self) -> arb:
        return self._v

    @property
    def midpoint(self) -> Fraction:
        return _arb_to_fraction(self._v.mid())

    @property
    def radius(self) -> Fraction:
        return _arb_to_fraction(self._v.rad())

    @property
    def lower(self) -> Fraction:
        return self.midpoint - self.radius

    @property
    def upper(self) -> Fraction:
        return self.midpoint + self.radius

    @property
    def is_exact(self) -> bool:
        return self._v.is_exact()

    def contains(self, x: Union[int, Fraction, "RealBall"]) -> bool:
        """True when ``x`` (a number or a whole ball) lies inside this ball."""
        if isinstance(x, RealBall):
            return self._v.contains(x._v)
        x = Fraction(x)
        return self.lower <= x <= self.upper

    def contains_zero(self) -> bool:
        return self._v.contains(0)

    def with_precision(self, precision_bits: int) -> "RealBall":
        return RealBall._wrap(self._v, precision_bits)

    def __float__(self) -> float:
        return float(self._v.mid())

    def __repr__(self) -> str:
        return f"RealBall({self.str(20)}, precision_bits={self.precision_bits})"

    def str(self, digits: int = 20) -> str:
        """Decimal rendering ``[mid +/- rad]`` (radius rounded outward)."""
        return self._v.str(digits, radius=True)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> Optional["RealBall"]:
        if isinstance(other, RealBall):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return RealBall(other, self.precision_bits)
        return None

    def _binary(self, other, fn):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        prec = max(self.precision_bits, other.precision_bits)
        return RealBall._wrap(_run(prec, fn, self._v, other._v), prec)

    def __add__(self, other):
        return self._binary(other, _add)

    def __radd__(self, other):
        return self._binary(other, _radd)

    def __sub__(self, other):
        return self._binary(other, _sub)

    def __rsub__(self, other):
        return self._binary(other, _rsub)

    def __mul__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return RealBall._wrap(_run(self.precision_bits, _mul, self._v, other), self.precision_bits)
        return self._binary(other, _mul)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other._v.contains(0):
            raise DivisorStraddlesZero(f"divisor {other.str(10)} contains 0")
        return self._binary(other, _div)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __neg__(self):
        return RealBall._wrap(_run(self.precision_bits, arb.neg, self._v), self.precision_bits)

    def __abs__(self):
        return RealBall._wrap(_run(self.precision_bits, abs, self._v), self.precision_bits)

    def __pow__(self, k: int):
        return self.pow_int(k)

    # -- transcendental ----------------------------------------------------

    def pow_int(self, k: int) -> "RealBall":
        if not isinstance(k, int):
            raise TypeError("pow_int needs an integer exponent")
        if k < 0:
            if self._v.contains(0):
                raise DivisorStraddlesZero("negative power of a ball containing 0")
            return RealBall(1, self.precision_bits) / self.pow_int(-k)
        return RealBall._wrap(_run(self.precision_bits, _pow, self._v, k), self.precision_bits)

    def log(self) -> "RealBall":
        if not self._v > 0:
            raise DomainError(f"log of {self.str(10)}, which is not certified positive")
        return RealBall._wrap(_run(self.precision_bits, arb.log, self._v), self.precision_bits)

    def exp(self) -> "RealBall":
        return RealBall._wrap(_run(self.precision_bits, arb.exp, self._v), self.precision_bits)

    def nth_root(self, k: int) -> "RealBall":
        if k < 1:
            raise DomainError("root index must be at least 1")
        if not self._v >= 0:
            raise DomainError(f"root of {self.str(10)}, which is not certified nonnegative")
        if k == 1:
            return self
        return RealBall._wrap(_run(self.precision_bits, arb.root, self._v, k), self.precision_bits)

    def sqrt(self) -> "RealBall":
        return self.nth_root(2)


def _add(a, b):
    return a + b


def _radd(a, b):
    return b + a


def _sub(a, b):
    return a - b


def _rsub(a, b):
    return b - a


def _mul(a, b):
    return a * b


def _div(a, b):
    return a / b


def _pow(a, k):
    if k == 0:
        return arb(1)
    if not a.contains(0):
        return a ** k
    # arb's power is nan on balls containing 0; use the hull of the endpoint
    # powers, which is exact because x^k is monotone in x (odd k) or |x| (even k)
    lo, hi = a.lower(), a.upper()
    if k % 2:
        return (lo ** k).union(hi ** k)
    return arb(0).union(max(-lo, hi) ** k)


def _rebuild(mid: Fraction, rad: Fraction, prec: int) -> RealBall:
    return RealBall.from_interval(mid - rad, mid + rad, prec)


# -- certified queries -----------------------------------------------------

def _pair(a, b):
    if not isinstance(a, RealBall):
        a = RealBall(a, b.precision_bits if isinstance(b, RealBall) else DEFAULT_PRECISION)
    if not isinstance(b, RealBall):
        b = RealBall(b, a.precision_bits)
    return a, b


def lt(a: Number, b: Number) -> Optional[bool]:
    """``a < b`` for every point of the balls: True, False, or None if they overlap."""
    a, b = _pair(a, b)
    if a._v < b._v:
        return True
    if a._v >= b._v:
        return False
    return None


def le(a: Number, b: Number) -> Optional[bool]:
    a, b = _pair(a, b)
    if a._v <= b._v:
        return True
    if a._v > b._v:
        return False
    return None


def gt(a: Number, b: Number) -> Optional[bool]:
    return lt(b, a)


def ge(a: Number, b: Number) -> Optional[bool]:
    return le(b, a)


def floor(a: RealBall) -> Optional[int]:
    """The common floor of the whole ball, or None when it straddles an integer."""
    lo, hi = a.lower, a.upper
    f = lo.numerator // lo.denominator
    if hi.numerator // hi.denominator == f:
        return f
    return None


def floor_upper(a: RealBall) -> int:
    """Floor of the upper endpoint: never below the floor of any enclosed value."""
    hi = a.upper
    return hi.numerator // hi.denominator


def dist_to_nearest_int(a: RealBall) -> RealBall:
    """Ball for ``||a|| = min_n |a - n|``.

    With ``n`` the integer nearest the midpoint, ``|a - n|`` is an upper bound
    everywhere and its lower endpoint stays valid because ``|mid - n| <= 1/2``.
    The result is intersected with ``[0, 1/2]``; arb radii carry 30 bits and
    round up, so the ball may overhang 0 or 1/2 by at most ``2^-29``.
    """
    prec = a.precision_bits
    return RealBall._wrap(_run(prec, _dist, a._v), prec)


_UNIT_HALF = arb(1) / 4  # exact 1/4


def _dist(v: arb) -> arb:
    mid = v.mid()
    n = (mid + arb(1) / 2).floor().unique_fmpz()
    return abs(v - n).intersection(arb(_UNIT_HALF, _UNIT_HALF))


# -- spec-facing dispatchers -----------------------------------------------

_ARITH = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "neg": lambda a, b: -a,
    "abs": lambda a, b: abs(a),
}


def rb_arith(op: str, a: RealBall, b: Optional[Number] = None) -> RealBall:
    try:
        fn = _ARITH[op]
    except KeyError:
        raise ValueError(f"unknown arithmetic op {op!r}") from None
    if op in ("add", "sub", "mul", "div") and b is None:
        raise ValueError(f"{op} needs two operands")
    return fn(a, b)


def rb_transcendental(op: str, a: RealBall, k: Optional[int] = None) -> RealBall:
    if op == "log":
        return a.log()
    if op == "exp":
        return a.exp()
    if op == "pow_int":
        return a.pow_int(k)
    if op == "nth_root":
        return a.nth_root(k)
    raise ValueError(f"unknown transcendental op {op!r}")


def rb_certify(query: str, a: RealBall, b: Optional[Number] = None):
    if query in ("lt", "le", "gt", "ge"):
        return {"lt": lt, "le": le, "gt": gt, "ge": ge}[query](a, b)
    if query == "floor":
        return floor(a)
    if query == "dist_to_nearest_int":
        return dist_to_nearest_int(a)
    raise ValueError(f"unknown certify query {query!r}")


# -- precision escalation --------------------------------------------------

def escalate(attempt: Callable[[int], Optional[T]], start: int = DEFAULT_PRECISION,
             cap: Optional[int] = None) -> T:
    """Call ``attempt(bits)`` with doubling precision until it returns non-None.

    ``attempt`` may also raise :class:`PrecisionExhausted` to ask for more bits.
    """
    cap = precision_cap() if cap is None else cap
    prec = start
    while prec <= cap:
        try:
            out = attempt(prec)
        except PrecisionExhausted:
            out = None
        if out is not None:
            return out
        prec *= 2
    raise PrecisionExhausted(f"undecided up to {cap} bits")


# -- constants and expressions ---------------------------------------------

@lru_cache(maxsize=256)
def log_int(n: int, precision_bits: int) -> RealBall:
    """Cached ball for ``log n``."""
    return RealBall(n, precision_bits).log()


_FUNCS = {
    "log": lambda x: x.log(),
    "ln": lambda x: x.log(),
    "exp": lambda x: x.exp(),
    "sqrt": lambda x: x.sqrt(),
    "root": lambda x, k: x.nth_root(_as_int(k)),
}


def _as_int(x: RealBall) -> int:
    if not x.is_exact or x.midpoint.denominator != 1:
        raise DomainError("expected an exact integer argument")
    return int(x.midpoint)


def parse_expr(text: str, precision_bits: int = DEFAULT_PRECISION) -> RealBall:
    """Evaluate a small arithmetic expression such as ``"log(3)/log(2)"``.

    Decimal literals are read exactly (``"0.0186"`` is 186/10000), ``pi`` and
    ``e`` are known constants, and ``**`` accepts integer exponents only.
    """
    tree = ast.parse(text.strip(), mode="eval")

    def ev(node) -> RealBall:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            literal = ast.get_source_segment(text.strip(), node) or repr(node.value)
            return RealBall(Fraction(literal.replace("_", "")), precision_bits)
        if isinstance(node, ast.Name):
            if node.id == "pi":
                return RealBall._wrap(_run(precision_bits, arb.pi), precision_bits)
            if node.id == "e":
                return RealBall._wrap(_run(precision_bits, arb.const_e), precision_bits)
            raise ValueError(f"unknown name {node.id!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                return left / right
            if isinstance(node.op, ast.Pow):
                return left.pow_int(_as_int(right))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
            return _FUNCS[node.func.id](*[ev(a) for a in node.args])
        raise ValueError(f"unsupported expression element: {ast.dump(node)}")

    return ev(tree)


def sci(n: Union[int, Fraction], digits: int = 5) -> str:
    """Scientific notation for integers and fractions too large for floats."""
    x = Fraction(n)
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    x = abs(x)
    e = len(str(x.numerator)) - len(str(x.denominator))
    if Fraction(10) ** e > x:
        e -= 1
    mant = x / Fraction(10) ** e
    scaled = round(mant * 10 ** (digits - 1))
    if scaled >= 10 ** digits:
        scaled //= 10
        e += 1
    s = str(scaled)
    return f"{sign}{s[0]}.{s[1:]}e{e}" if digits > 1 else f"{sign}{s}e{e}"
