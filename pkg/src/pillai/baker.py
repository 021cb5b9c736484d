"""Linear forms in logarithms: Matveev's bound and the composed bound chain.

Every constant is recomputed from Matveev's formula with certified balls
and set against the rounded value a hand computation would quote.  Each link
of the chain is a :class:`ChainStep` recording the recomputed constant, the
quoted one, and whether the quoted one is a valid majorant.

Logarithms are natural throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import DomainError, HypothesisFailed, NonConvergence
from .realball import (DEFAULT_PRECISION, RealBall, escalate, floor, floor_upper, le, log_int,
                       lt, sci)

Real = Union[int, Fraction, RealBall]

PREC = DEFAULT_PRECISION
TOLERANCE = Fraction(101, 100)  # quoted constants may sit at most 1% below the recomputation


def _ball(x: Real, prec: int = PREC) -> RealBall:
    return x if isinstance(x, RealBall) else RealBall(Fraction(x), prec)


def _dec(text: str) -> Fraction:
    return Fraction(text)


# -- Matveev ----------------------------------------------------------------------

@dataclass(frozen=True)
class MatveevInstance:
    """Data of a linear form ``gamma_1^b_1 ... gamma_t^b_t - 1``.

    ``A`` holds the height majorants ``A_i``; ``B`` bounds the exponents.
    """

    t: int
    D: int
    B: Real
    A: Tuple[Real, ...]

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(self.A))
        if self.t < 2 or len(self.A) != self.t:
            raise DomainError("need t >= 2 and exactly t values A_i")
        if self.D < 1:
            raise DomainError("field degree must be positive")
        if not _at_least(self.B, 1):
            raise DomainError("B must be at least 1")
        for a in self.A:
            if not _at_least(a, Fraction(16, 100)):
                raise DomainError(f"A_i = {a} is not certified >= 0.16")


def _at_least(x: Real, bound: Fraction) -> bool:
    """Exact for rationals, certified for balls."""
    if isinstance(x, RealBall):
        return lt(x, bound) is False
    return Fraction(x) >= bound


def matveev_constant(t: int, prec: int = PREC) -> RealBall:
    """``1.4 * 30^(t+3) * t^4.5``."""
    t_pow = RealBall(t, prec).pow_int(4) * RealBall(t, prec).sqrt()
    return RealBall(Fraction(7, 5), prec) * (30 ** (t + 3)) * t_pow


def matveev_lower_bound(inst: MatveevInstance, prec: int = PREC) -> RealBall:
    """``C`` with ``log|Lambda| > -C`` for a nonzero linear form."""
    one = RealBall(1, prec)
    c = matveev_constant(inst.t, prec) * (inst.D * inst.D)
    c = c * (one + log_int(inst.D, prec)) if inst.D > 1 else c
    c = c * (one + _ball(inst.B, prec).log())
    for a in inst.A:
        c = c * _ball(a, prec)
    return c


# -- Guzman-Luca ------------------------------------------------------------------

def guzman_luca_bound(m: int, T: Real, prec: int = PREC) -> RealBall:
    """``2^m T (log T)^m``: if ``x / (log x)^m < T`` then ``x`` is below this."""
    if m < 1:
        raise DomainError("m must be at least 1")
    T = _ball(T, prec)
    if lt((4 * m * m) ** m, T) is not True:
        raise HypothesisFailed(f"T = {T.str(8)} is not certified above (4m^2)^m = {(4 * m * m) ** m}")
    return T * (2 ** m) * T.log().pow_int(m)


# -- the absolute bound on n --------------------------------------------------------

BD_CONSTANT = Fraction(4 * 10 ** 42)


def bd_real(k: Real, prec: int = PREC) -> RealBall:
    """``4e42 k^11 (log k)^7`` as a ball."""
    k = _ball(k, prec)
    return BD_CONSTANT * k.pow_int(11) * k.log().pow_int(7)


@lru_cache(maxsize=4096)
def lemma_bd_bound(k: int) -> int:
    """``M_k = floor(4e42 k^11 (log k)^7)`` via a certified floor."""
    if k < 4:
        raise DomainError("the bound is stated for k >= 4")
    return escalate(lambda p: floor(bd_real(k, p)), start=PREC)


def _cutoff_holds(k: int) -> bool:
    """Certified ``4e42 k^11 (log k)^7 < 2^(k/2)``, compared on the log scale."""
    def attempt(p):
        lhs = bd_real(k, p).log()
        rhs = log_int(2, p) * Fraction(k, 2)
        return lt(lhs, rhs)
    return escalate(attempt, start=PREC)


def cutoff_k(window: int = 128, search_hi: int = 4096) -> int:
    """Smallest ``k0`` with the cutoff inequality on ``[k0, k0 + window]`` and failing at ``k0 - 1``."""
    fails = [k for k in range(4, search_hi) if not _cutoff_holds(k)]
    k0 = (max(fails) + 1) if fails else 4
    if not all(_cutoff_holds(k) for k in range(k0, k0 + window + 1)):
        raise NonConvergence("cutoff inequality is not stable after the last failure")
    return k0


FINAL_K_CONSTANT = _dec("5.42e31")


def _phi(k: Real, prec: int) -> RealBall:
    """``5.42e31 (1 + log(4e42 k^11 (log k)^7))^3``."""
    return FINAL_K_CONSTANT * (1 + bd_real(k, prec).log()).pow_int(3)


def absolute_bounds(start: int = 601, max_steps: int = 200) -> Tuple[int, int]:
    """Certified ``(k_max, n_max)`` with every solution satisfying ``k < k_max`` and ``n < n_max``.

    Iterates ``k -> phi(k)`` from ``start``; the iteration increases to the
    fixed point.  ``K = floor(fixed point) + 1`` is then certified to satisfy
    ``phi(K) < K``, and since ``phi(k) - k`` decreases for ``k >= K`` no
    admissible ``k`` reaches ``K``.
    """
    prec = PREC
    k = RealBall(start, prec)
    for _ in range(max_steps):
        nxt = _phi(k, prec)
        settled = lt(abs(nxt - k), Fraction(1, 2))
        k = nxt
        if settled:
            break
    else:
        raise NonConvergence(f"fixed-point iteration did not settle in {max_steps} steps")
    K = floor_upper(k) + 1
    while lt(_phi(K, prec), K) is not True:
        K += 1
        if K > floor_upper(k) + 10:
            raise NonConvergence("could not certify phi(K) < K near the fixed point")
    return K, lemma_bd_bound(K)


def phi_increasing_from(start: int = 601, steps: int = 40) -> bool:
    """The iterates ``phi^i(start)`` increase (certified) until they settle."""
    prec = PREC
    k = RealBall(start, prec)
    for _ in range(steps):
        nxt = _phi(k, prec)
        if lt(abs(nxt - k), Fraction(1, 2)):
            return True
        if lt(k, nxt) is not True:
            return False
        k = nxt
    return False


# -- chain steps ----------------------------------------------------------------------

@dataclass(frozen=True)
class ChainStep:
    """One link of a bound chain.

    ``recomputed`` is the constant that actually follows from the previous
    links; ``stated`` is the rounded constant quoted for it.  ``form`` names
    the monomial the constant multiplies.  ``form_ok`` is False when the quoted
    monomial drops a factor the recomputation needs.
    """

    name: str
    kind: str
    form: str
    recomputed: RealBall
    stated: Fraction
    form_ok: bool = True
    note: str = ""

    @property
    def majorant(self) -> Optional[bool]:
        """Quoted constant is at least the recomputed one."""
        return le(self.recomputed, self.stated)

    @property
    def within_tolerance(self) -> Optional[bool]:
        """Recomputed constant is at most 1% above the quoted one."""
        return le(self.recomputed, self.stated * TOLERANCE)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "form": self.form,
            "recomputed": sci(self.recomputed.upper, 6),
            "stated": sci(self.stated, 3),
            "majorant": self.majorant,
            "within_1pct": self.within_tolerance,
            "form_ok": self.form_ok,
            "note": self.note,
        }


def _logs(prec: int):
    return log_int(2, prec), log_int(3, prec)


N_MIN = 601  # n > 600 throughout the small-k argument and beyond
K_MIN = 4


def bd_chain(repaired: bool = False, prec: int = PREC) -> List[ChainStep]:
    """The chain that ends in ``n < 4e42 k^11 (log k)^7``.

    With ``repaired=False`` each step starts from the quoted constant of the
    step before, exactly as a reader would check it.  With ``repaired=True`` a
    step starts from the recomputed constant and the factor ``1 + log k`` is
    bounded by ``2 log k`` (valid for ``k >= 3``) wherever the quoted monomial
    needs a pure power of ``log k``.
    """
    l2, l3 = _logs(prec)
    c3 = matveev_constant(3, prec)
    one = RealBall(1, prec)
    k0, n0 = RealBall(K_MIN, prec), RealBall(N_MIN, prec)
    logk0, logn0 = k0.log(), n0.log()
    steps: List[ChainStep] = []

    def prev(step: ChainStep) -> RealBall:
        return step.recomputed if repaired else RealBall(step.stated, prec)

    # Lambda: t=3, D=k, A = (3k log k, log 2, k log 3); k^2 (1 + log k) (3k log k)(k) -> k^4 log k (1 + log k)
    lam = c3 * 3 * l2 * l3 * 2  # 1 + log k <= 2 log k
    steps.append(ChainStep("Lambda", "matveev", "k^4 log^2 k (1+log n)", lam, _dec("6.54e11"),
                           note="uses 1+log k <= 2 log k"))

    # min{(n-n1) log alpha, (m-m1) log 3} < C (..) + max{6 log alpha, log 3}, and log alpha < log 2
    mono4 = k0.pow_int(4) * logk0.pow_int(2) * (one + logn0)
    slack = (6 * l2) / mono4
    steps.append(ChainStep("min_bound", "derived", "k^4 log^2 k (1+log n)", prev(steps[-1]) + slack,
                           _dec("6.60e11")))

    # k h(gamma_1) < 6 k log k + (n - n1) log alpha
    a1 = prev(steps[-1]) + (6 * k0 * logk0) / mono4
    steps.append(ChainStep("A1_Lambda1", "derived", "k^4 log^2 k (1+log n)", a1, _dec("6.80e11")))

    # Lambda_1 and Lambda_2: t=3, D=k, A = (A1, log 2, k log 3)
    raw = c3 * prev(steps[-1]) * l2 * l3
    lam1 = raw * 2 if repaired else raw
    form_note = ("raw monomial is k^7 log^2 k (1+log k) (1+log n)^2; a pure log^3 k needs 1+log k <= 2 log k"
                 if not repaired else "uses 1+log k <= 2 log k")
    for name in ("Lambda1", "Lambda2"):
        steps.append(ChainStep(name, "matveev", "k^7 log^3 k (1+log n)^2", lam1, _dec("7.41e22"),
                               form_ok=repaired, note=form_note))

    # (m-m1) log 3 < C (..) + log 3 and (n-n1) log alpha < C (..) + 6 log 2
    mono7 = k0.pow_int(7) * logk0.pow_int(3) * (one + logn0).pow_int(2)
    steps.append(ChainStep("max_bound", "derived", "k^7 log^3 k (1+log n)^2",
                           prev(steps[-1]) + (6 * l2) / mono7, _dec("7.50e22")))

    # k h(gamma_1) < 3k log k + (n-n1) log alpha + k (m-m1) log 3 + 2k log 2, with one of the
    # two differences under the min bound and the other under the max bound
    mono8 = k0.pow_int(8) * logk0.pow_int(3) * (one + logn0).pow_int(2)
    extra = (RealBall(steps[1].stated if not repaired else steps[1].recomputed, prec) * k0 * mono4
             + 3 * k0 * logk0 + 2 * k0 * l2) / mono8
    steps.append(ChainStep("A1_Lambda3", "derived", "k^8 log^3 k (1+log n)^2",
                           prev(steps[-1]) + extra, _dec("8.3e22")))

    # Lambda_3: t=3, D=k, A = (A1, log 2, k log 3)
    raw = c3 * prev(steps[-1]) * l2 * l3
    lam3 = raw * 2 if repaired else raw
    steps.append(ChainStep("Lambda3", "matveev", "k^11 log^4 k (1+log n)^3", lam3, _dec("9.05e33"),
                           form_ok=repaired,
                           note=("raw monomial is k^11 log^3 k (1+log k) (1+log n)^3" if not repaired
                                 else "uses 1+log k <= 2 log k")))

    # (0.8 n - 5) log 3 < C (..)(1+log n)^3  ->  n < C/(0.8 log 3) (..) (1+log n)^3 + 6.25,
    # and (1 + log n) <= (1 + 1/log 601) log n for n > 600
    ratio = (one + one / logn0).pow_int(3)
    mono11 = k0.pow_int(11) * logk0.pow_int(4) * logn0.pow_int(3)
    t_const = prev(steps[-1]) / (Fraction(4, 5) * l3) * ratio + RealBall(Fraction(25, 4), prec) / mono11
    steps.append(ChainStep("T", "derived", "k^11 log^4 k log^3 n", t_const, _dec("6.2e34")))

    # Guzman-Luca with m = 3: n < 8 T (log T)^3, and log T <= log c + 15 log k for k >= 4
    c_T = RealBall(steps[-1].stated, prec) if not repaired else steps[-1].recomputed
    ratio_T = c_T.log() / logk0 + 15
    steps.append(ChainStep("lemma_bd", "derived", "k^11 log^7 k",
                           8 * c_T * ratio_T.pow_int(3), BD_CONSTANT,
                           note="log log k <= log k"))
    return steps


def case_split_chain(prec: int = PREC) -> List[ChainStep]:
    """The constants of the large-``k`` case analysis (field ``Q``, so ``D = 1``)."""
    l2, l3 = _logs(prec)
    c2, c3 = matveev_constant(2, prec), matveev_constant(3, prec)
    one = RealBall(1, prec)
    n0 = RealBall(N_MIN, prec)
    ln1 = one + n0.log()
    steps: List[ChainStep] = []
    q = lambda s: RealBall(s, prec)

    gamma = c2 * l3 * l2
    steps.append(ChainStep("Gamma", "matveev", "(1+log n)", gamma, _dec("5.86e8")))
    steps.append(ChainStep("Gamma_vs_5.88e8", "matveev", "(1+log n)", gamma, _dec("5.88e8")))
    # min{(n-n1-3) log 2, (m-m1-2) log 3, (k/2-3) log 2} < C (1+log n)
    steps.append(ChainStep("min_5.3", "derived", "(1+log n)",
                           q(_dec("5.86e8")) + (3 * l2) / ln1, _dec("5.88e8")))
    steps.append(ChainStep("k_5.3.1", "derived", "(1+log n)",
                           2 * q(_dec("5.88e8")) / l2, _dec("1.70e9")))
    # h(2^(n-n1) - 1) <= (n - n1 + 1) log 2
    steps.append(ChainStep("A3_5.3.2", "derived", "(1+log n)",
                           q(_dec("5.88e8")) + l2 / ln1, _dec("5.90e8")))
    g1 = c3 * l3 * l2 * q(_dec("5.90e8"))
    steps.append(ChainStep("Gamma1_5.3.2", "matveev", "(1+log n)^2", g1, _dec("6.43e19")))
    steps.append(ChainStep("Gamma2_5.3.3", "matveev", "(1+log n)^2", g1, _dec("6.43e19")))
    steps.append(ChainStep("min_5.3.2", "derived", "(1+log n)^2",
                           q(_dec("6.43e19")) + (5 * l3) / ln1.pow_int(2), _dec("6.44e19")))
    steps.append(ChainStep("k_5.3.2", "derived", "(1+log n)^2",
                           2 * q(_dec("6.44e19")) / l2 + RealBall(10, prec) / ln1.pow_int(2),
                           _dec("1.86e20")))
    # h((3^a - 1)/(2^b - 1)) <= (a + 1) log 3 + (b + 1) log 2, each difference below 6.44e19 (1+log n)^2
    steps.append(ChainStep("A3_5.3.4", "derived", "(1+log n)^2",
                           2 * q(_dec("6.44e19")) + (l2 + l3) / ln1.pow_int(2), _dec("1.30e20")))
    g3 = c3 * l3 * l2 * q(_dec("1.30e20"))
    steps.append(ChainStep("Gamma3_5.3.4", "matveev", "(1+log n)^3", g3, _dec("1.86e31")))
    # (k/2 - 5) log 2 < C (1+log n)^3
    steps.append(ChainStep("k_final", "derived", "(1+log n)^3",
                           2 * q(_dec("1.86e31")) / l2 + RealBall(10, prec) / ln1.pow_int(3),
                           _dec("5.42e31")))
    return steps


def chain_step(steps: Sequence[ChainStep], name: str) -> ChainStep:
    for s in steps:
        if s.name == name:
            return s
    raise KeyError(name)


def bd_chain_at(k: int, n: int, prec: int = PREC) -> Dict[str, RealBall]:
    """Concrete values of the main quantities of the chain at one ``(k, n)``.

    Used by the CLI and to spot-check the monomial bookkeeping: the Matveev
    bound evaluated directly on a concrete instance must stay below the
    quoted monomial whenever the quoted form is sound.
    """
    if k < K_MIN or n <= 1:
        raise DomainError("need k >= 4 and n >= 2")
    l2, l3 = _logs(prec)
    kb, nb = RealBall(k, prec), RealBall(n, prec)
    logk, ln1 = kb.log(), 1 + nb.log()
    lam = matveev_lower_bound(MatveevInstance(3, k, n, (3 * kb * logk, l2, kb * l3)), prec)
    a1 = _dec("6.80e11") * kb.pow_int(4) * logk.pow_int(2) * ln1
    lam1 = matveev_lower_bound(MatveevInstance(3, k, n, (a1, l2, kb * l3)), prec)
    a1_3 = _dec("8.3e22") * kb.pow_int(8) * logk.pow_int(3) * ln1.pow_int(2)
    lam3 = matveev_lower_bound(MatveevInstance(3, k, n, (a1_3, l2, kb * l3)), prec)
    return {
        "M_k": RealBall(lemma_bd_bound(k), prec),
        "Lambda": lam,
        "Lambda_quoted": _dec("6.54e11") * kb.pow_int(4) * logk.pow_int(2) * ln1,
        "Lambda1": lam1,
        "Lambda1_quoted": _dec("7.41e22") * kb.pow_int(7) * logk.pow_int(3) * ln1.pow_int(2),
        "Lambda3": lam3,
        "Lambda3_quoted": _dec("9.05e33") * kb.pow_int(11) * logk.pow_int(4) * ln1.pow_int(3),
    }
