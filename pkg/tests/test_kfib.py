from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pillai.errors import DomainError
from pillai.kfib import (SolutionRecord, binet_error, context_invariants, fib_at, fib_block,
                         make_context, power2_gap_monotone, power_bounds_check, zeta_of)
from pillai.realball import RealBall, lt


def naive(k, n_hi):
    """Plain recursion from the k - 1 zeros and the leading one."""
    seq = [0] * (k - 1) + [1]  # indices 2-k .. 1
    while len(seq) < n_hi + k - 1:
        seq.append(sum(seq[-k:]))
    return seq


def test_first_term_is_one():
    for k in range(2, 12):
        assert fib_at(k, 1) == 1
        assert fib_at(k, 2 - k) == 0


def test_known_terms():
    assert fib_at(9, 10) == 256
    assert fib_at(4, 8) == 56
    assert fib_at(2, 12) == 144
    assert fib_at(3, 10) == 149


def test_blocks():
    assert fib_block(4, 1, 8) == [1, 1, 2, 4, 8, 15, 29, 56]
    assert fib_block(7, 2, 2) == [1]
    assert fib_block(5, 1, 10)[-1] == 236
    assert fib_block(6, -4, 3) == naive(6, 3)


def test_domain():
    with pytest.raises(DomainError):
        fib_at(4, -3)
    with pytest.raises(DomainError):
        fib_at(1, 5)
    with pytest.raises(DomainError):
        fib_block(4, 5, 3)


def test_golden_ratio_context():
    ctx = make_context(2, 256)
    phi = (1 + RealBall(5, 256).sqrt()) / 2
    assert ctx.alpha.contains(phi.midpoint)
    assert ctx.fk_alpha.contains((phi / RealBall(5, 256).sqrt()).midpoint)
    assert abs(float(ctx.fk_alpha) - 0.72360679) < 1e-8


def test_root_enclosure_every_k():
    for k in range(2, 601):
        ctx = make_context(k)
        assert context_invariants(ctx)
        assert lt(2 * (1 - Fraction(1, 2 ** k)), ctx.alpha) is True
        assert lt(ctx.alpha, 2) is True
        if k >= 3:  # for k = 2 the value is phi / sqrt 5 = 0.7236
            assert lt(Fraction(1, 2), ctx.fk_alpha) is True and lt(ctx.fk_alpha, Fraction(3, 4)) is True


def test_binet_examples():
    ctx2 = make_context(2)
    err = binet_error(ctx2, 10)
    assert lt(err, Fraction(1, 2)) is True
    # oracle: phi^10 / sqrt 5 - 55 in 50-digit decimal arithmetic
    getcontext().prec = 50
    r5 = Decimal(5).sqrt()
    expected = ((1 + r5) / 2) ** 10 / r5 - 55
    assert abs(Fraction(expected) - err.midpoint) < Fraction(1, 10 ** 40)
    assert abs(float(err) - 0.0036361232) < 1e-10
    assert lt(binet_error(make_context(4), 2), Fraction(1, 2)) is True
    assert lt(binet_error(make_context(10), 200), Fraction(1, 2)) is True


def test_binet_grid():
    for k in range(2, 31):
        ctx = make_context(k)
        for n in range(2, 201):
            assert lt(binet_error(ctx, n), Fraction(1, 2)) is True, (k, n)


def test_power_bounds():
    assert power_bounds_check(make_context(2), 1) is True
    assert power_bounds_check(make_context(4), 8) is True
    assert power_bounds_check(make_context(5), 10) is True


def test_power2_gap():
    assert power2_gap_monotone(4, 8)
    terms = fib_block(4, 2, 8)
    gaps = [2 ** (n - 2) - f for n, f in zip(range(2, 9), terms)]
    assert gaps[5 - 2] == 0 and gaps[6 - 2] == 1 and gaps[7 - 2] == 3 and gaps[8 - 2] == 8
    for k in range(2, 20):
        assert power2_gap_monotone(k, 300)


def test_zeta():
    for n in range(2, 12):
        assert zeta_of(10, n).contains(0)
    assert zeta_of(10, 1).midpoint == 1  # F_1 = 1 against 2^-1
    z = zeta_of(10, 12)
    assert z.is_exact and z.midpoint == Fraction(-1, 1024)
    assert lt(abs(z), Fraction(5, 32)) is True
    z = zeta_of(12, 30)
    assert lt(abs(z), Fraction(5, 64)) is True
    with pytest.raises(DomainError):
        zeta_of(10, 32)
    with pytest.raises(DomainError):
        zeta_of(9, 3)


def test_solution_record():
    rec = SolutionRecord.build(4, 8, 4, 3, 3)
    assert rec.c == -25 and rec.to_dict()["c"] == -25
    with pytest.raises(DomainError):
        SolutionRecord.build(4, 7, 3, 5, 2)
    with pytest.raises(DomainError):
        SolutionRecord.build(4, 3, 2, 5, 1)


# -- properties --------------------------------------------------------------------

grid = st.tuples(st.integers(2, 30), st.integers(2, 200))


@settings(max_examples=400, deadline=None)
@given(grid)
def test_matches_naive_recursion(kn):
    k, n = kn
    assert fib_at(k, n) == naive(k, n)[-1]


@settings(max_examples=400, deadline=None)
@given(grid)
def test_three_term_recursion(kn):
    k, n = kn
    if n >= 3:
        assert fib_at(k, n) == 2 * fib_at(k, n - 1) - fib_at(k, n - k - 1)


@settings(max_examples=400, deadline=None)
@given(st.integers(2, 30), st.integers(2, 300))
def test_power_of_two_regime(k, n):
    f = fib_at(k, n)
    if n <= k + 1:
        assert f == 2 ** (n - 2)
    else:
        assert f < 2 ** (n - 2)


@settings(max_examples=200, deadline=None)
@given(grid)
def test_binet_error_below_half(kn):
    k, n = kn
    assert lt(binet_error(make_context(k), n), Fraction(1, 2)) is True
