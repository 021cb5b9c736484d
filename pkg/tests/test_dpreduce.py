from fractions import Fraction
from math import floor

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pillai.contfrac import cf_expand
from pillai.dpreduce import (FamilySummary, ReductionCase, dp_reduce, dp_reduce_family,
                             dp_reduce_grid, homogeneous_reduce, merge_summaries, s_unit_exponents)
from pillai.errors import DomainError, EpsilonNonPositive, MuNearZero, PrecisionExhausted
from pillai.realball import RealBall, dist_to_nearest_int, ge, log_int, lt

PREC = 256


def R(x):
    return RealBall(x, PREC)


def surd(d, e, a=0):
    return R(a) + R(d).sqrt() / e


def no_solution_above(case, w_bound):
    """Exhaustive: no (u, v) has 0 < |u tau - v + mu| < A B^-w for some w > w_bound.

    The thresholds shrink with w, so checking w = w_bound + 1 covers every larger w.
    """
    thr = case.A / case.B.pow_int(w_bound + 1)
    for u in range(1, case.M + 1):
        centre = floor(float(case.tau * u + case.mu))
        for v in range(centre - 10, centre + 12):
            form = abs(case.tau * u - v + case.mu)
            if form.is_exact and form.midpoint == 0:
                continue
            assert ge(form, thr) is True, (u, v, w_bound)


def test_hand_checkable_case():
    tau = 1 / (6 + R(2).sqrt())  # [0; 7, ...]
    cf = cf_expand(tau, 6, extra=9)
    assert cf.q(1) == 7
    case = ReductionCase(tau, R(Fraction(1, 2)), R(2), R(2), 1)
    out = dp_reduce(case, cf)
    assert out.q == 7 and out.convergent_index == 1
    expected_eps = Fraction(1, 2) - dist_to_nearest_int(tau * 7).midpoint
    assert abs(out.epsilon.midpoint - expected_eps) < Fraction(1, 10 ** 60)
    assert out.w_bound == 4
    no_solution_above(case, out.w_bound)
    # direct enumeration: the largest admissible w is 2
    form = abs(tau + Fraction(1, 2) - 1)
    assert lt(form, Fraction(2, 2 ** 2)) is True and ge(form, Fraction(2, 2 ** 3)) is True


def test_mu_zero_and_lattice_mu():
    tau = log_int(3, PREC) / log_int(2, PREC)
    cf = cf_expand(tau, 6 * 100, extra=9)
    with pytest.raises(MuNearZero):
        dp_reduce(ReductionCase(tau, R(0), R(2), R(2), 100), cf)
    with pytest.raises(EpsilonNonPositive):
        dp_reduce(ReductionCase(tau, tau * 3 - 2, R(2), R(2), 100), cf)


def test_case_validation():
    tau = R(2).sqrt()
    with pytest.raises(DomainError):
        ReductionCase(tau, R(1), R(2), R(2), 0)
    with pytest.raises(DomainError):
        ReductionCase(tau, R(1), R(0), R(2), 5)
    with pytest.raises(DomainError):
        ReductionCase(tau, R(1), R(2), R(1), 5)


def test_s_unit_exponents():
    assert s_unit_exponents(Fraction(8, 27)) == (3, -3)
    assert s_unit_exponents(Fraction(1)) == (0, 0)
    assert s_unit_exponents(Fraction(10, 3)) is None
    assert s_unit_exponents(Fraction(-2)) is None
    assert s_unit_exponents(Fraction(25, 3), (5, 3)) == (2, -1)


def test_homogeneous_reduce_sound():
    tau = log_int(3, PREC) / log_int(2, PREC)
    M = 40
    cf = cf_expand(tau, 6 * M, extra=9)
    mu = tau * 2 - 3  # a + b tau with a = -3, b = 2
    out = homogeneous_reduce(tau, cf, -3, 2, R(8), R(2), M)
    assert out.method == "homogeneous"
    no_solution_above(ReductionCase(tau, mu, R(8), R(2), M), out.w_bound)
    # a small offset loosens the bound but keeps it sound
    delta = R(Fraction(1, 10 ** 6))
    out2 = homogeneous_reduce(tau, cf, -3, 2, R(8), R(2), M, delta=delta)
    assert out2.w_bound >= out.w_bound
    no_solution_above(ReductionCase(tau, mu + delta, R(8), R(2), M), out2.w_bound)


def test_family_and_grid_agree():
    tau = log_int(3, PREC) / log_int(2, PREC)
    M = 10 ** 6
    cf = cf_expand(tau, 6 * M, extra=12)
    xs = {l: -(R(2 ** l - 1).log() / log_int(2, PREC)) for l in range(1, 30)}
    ys = {j: R(3 ** j - 1).log() / log_int(2, PREC) for j in range(3, 12)}
    A, B = R(78), R(3)
    grid = dp_reduce_grid(tau, cf, M, xs, ys, A, B)
    cases = [ReductionCase(tau, xs[l] + ys[j], A, B, M, (l, j)) for l in xs for j in ys]
    fam = dp_reduce_family(cases, cf)
    assert grid.members == fam.members == len(cases)
    assert grid.max_w_bound == fam.max_w_bound
    # (2^4 - 1)/(3^4 - 1) = 3/16 puts mu on the lattice Z + Z tau
    assert [lab for lab, _ in grid.failures] == [lab for lab, _ in fam.failures] == [(4, 4)]
    assert abs(grid.min_epsilon.lower - fam.min_epsilon.lower) < Fraction(1, 2 ** 80)
    single = dp_reduce_grid(tau, cf, M, xs, None, A, B, skip=[1])
    assert single.members == len(xs) - 1


def test_family_records_failures():
    tau = log_int(3, PREC) / log_int(2, PREC)
    cf = cf_expand(tau, 600, extra=9)
    cases = [ReductionCase(tau, R(0), R(2), R(2), 100, "zero"),
             ReductionCase(tau, R(Fraction(1, 3)), R(2), R(2), 100, "third")]
    fam = dp_reduce_family(cases, cf)
    assert fam.failures == [("zero", "MuNearZero")]
    assert fam.max_label == "third"
    with pytest.raises(DomainError):
        dp_reduce_family([], cf)


def test_merge():
    a, b = FamilySummary(), FamilySummary()
    a.members, b.members = 2, 3
    b.failures.append(("x", "EpsilonNonPositive"))
    out = merge_summaries([a, b])
    assert out.members == 5 and out.failures == [("x", "EpsilonNonPositive")]
    assert out.to_dict()["failures"] == [["x", "EpsilonNonPositive"]]


# -- soundness against exhaustive enumeration ----------------------------------------

nonsquare = st.integers(2, 500).filter(lambda d: int(d ** 0.5) ** 2 != d)


@settings(max_examples=200, deadline=None)
@given(nonsquare, st.integers(1, 9), st.integers(-3, 3),
       st.one_of(st.fractions(Fraction(-5), Fraction(5), max_denominator=1000),
                 st.tuples(nonsquare, st.integers(2, 13))),
       st.integers(1, 30), st.integers(1, 8))
def test_soundness_small_cases(d, e, a, mu_spec, M, A):
    tau = surd(d, e, a)
    mu = R(mu_spec) if isinstance(mu_spec, Fraction) else R(mu_spec[0]).sqrt() / mu_spec[1]
    assume(not mu.contains_zero())
    case = ReductionCase(tau, mu, R(A), R(2), M)
    cf = cf_expand(tau, 6 * M, extra=10)
    try:
        out = dp_reduce(case, cf)
    except (EpsilonNonPositive, PrecisionExhausted):  # mu on or next to the lattice Z + Z tau
        assume(False)
    assert out.epsilon.lower > 0
    no_solution_above(case, out.w_bound)


@settings(max_examples=60, deadline=None)
@given(nonsquare, st.integers(1, 9), st.fractions(Fraction(-5), Fraction(5), max_denominator=1000),
       st.integers(1, 30))
def test_later_convergents_also_sound(d, e, mu, M):
    tau = surd(d, e)
    assume(mu != 0)
    case = ReductionCase(tau, R(mu), R(4), R(2), M)
    cf = cf_expand(tau, 6 * M, extra=12)
    i0 = cf.first_index_above(6 * M)
    for i in range(i0, i0 + 4):
        q = cf.q(i)
        eps = dist_to_nearest_int(case.mu * q) - M * dist_to_nearest_int(tau * q)
        if lt(0, eps) is True:
            X = (case.A * q / eps).log() / case.B.log()
            no_solution_above(case, floor(X.upper))
