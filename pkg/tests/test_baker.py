from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pillai import baker
from pillai.baker import (MatveevInstance, absolute_bounds, bd_chain, bd_chain_at, case_split_chain,
                          chain_step, cutoff_k, guzman_luca_bound, lemma_bd_bound,
                          matveev_lower_bound, phi_increasing_from)
from pillai.errors import DomainError, HypothesisFailed
from pillai.realball import RealBall, log_int, lt, sci


def test_two_logs_coefficient():
    inst = MatveevInstance(2, 1, 1, (log_int(3, 256), log_int(2, 256)))
    c = matveev_lower_bound(inst)
    assert abs(float(c) / 5.86e8 - 1) < 0.001


def test_three_logs_coefficient():
    # D = k and A = (3k log k, log 2, k log 3); the quoted form bounds 1 + log k by 2 log k
    k = RealBall(50, 256)
    inst = MatveevInstance(3, 50, 1, (3 * k * k.log(), log_int(2, 256), k * log_int(3, 256)))
    c = 2 * matveev_lower_bound(inst) / (k.pow_int(4) * k.log() * (1 + k.log()))
    assert abs(float(c) / 6.54e11 - 1) < 0.01


def test_trivial_instance():
    inst = MatveevInstance(2, 1, 1, (Fraction(16, 100), Fraction(16, 100)))
    expected = Fraction(14, 10) * 30 ** 5 * Fraction(256, 10000)
    c = matveev_lower_bound(inst) / RealBall(2, 256).pow_int(4) / RealBall(2, 256).sqrt()
    assert c.contains(expected)


def test_instance_validation():
    with pytest.raises(DomainError):
        MatveevInstance(1, 1, 1, (1,))
    with pytest.raises(DomainError):
        MatveevInstance(2, 1, 1, (Fraction(1, 10), 1))
    with pytest.raises(DomainError):
        MatveevInstance(2, 1, Fraction(1, 2), (1, 1))


def test_guzman_luca():
    out = guzman_luca_bound(1, 100)
    assert abs(float(out) - 921.034) < 1e-3
    with pytest.raises(HypothesisFailed):
        guzman_luca_bound(3, 10)
    k = RealBall(4, 256)
    T = Fraction("6.2e34") * k.pow_int(11) * k.log().pow_int(4)
    # the closed form majorizes the lemma's output; at k = 4 it is about 24 times larger
    ratio = guzman_luca_bound(3, T) / baker.bd_real(4)
    assert lt(ratio, 1) is True and lt(Fraction(1, 30), ratio) is True


def test_lemma_bd_bound_oracle():
    getcontext().prec = 200
    k = Decimal(4)
    oracle = int(Decimal(4) * Decimal(10) ** 42 * k ** 11 * k.ln() ** 7)
    assert lemma_bd_bound(4) == oracle
    assert lemma_bd_bound(5) > lemma_bd_bound(4)
    assert lemma_bd_bound(600) < 2 ** 300
    with pytest.raises(DomainError):
        lemma_bd_bound(3)


def test_cutoff():
    k0 = cutoff_k()
    assert k0 <= 601
    assert not baker._cutoff_holds(100)
    assert all(baker._cutoff_holds(k) for k in range(k0, k0 + 20))


def test_absolute_bounds():
    k_max, n_max = absolute_bounds()
    assert sci(k_max, 4) == "8.631e40"  # certified 8.63106e40
    # oracle: 4e42 k^11 (log k)^7 at k = k_max in 700-digit decimal arithmetic
    getcontext().prec = 700
    kd = Decimal(k_max)
    assert n_max == int(Decimal(4) * Decimal(10) ** 42 * kd ** 11 * kd.ln() ** 7)
    assert sci(n_max, 4) == "5.236e506"
    assert k_max < 10 ** 41 and n_max < 10 ** 507
    assert phi_increasing_from(601)


def test_chain_steps_documented():
    steps = bd_chain()
    names = [s.name for s in steps]
    assert names[0] == "Lambda" and names[-1] == "lemma_bd"
    for s in steps:
        assert s.within_tolerance is True, s.name
    # the final bound in the chain is a majorant even though some links round down
    assert chain_step(steps, "lemma_bd").majorant is True
    assert chain_step(bd_chain(repaired=True), "lemma_bd").majorant is True


def test_case_split():
    steps = case_split_chain()
    assert chain_step(steps, "Gamma_vs_5.88e8").majorant is True
    assert chain_step(steps, "Gamma3_5.3.4").majorant is True
    assert chain_step(steps, "k_final").majorant is True


def test_chain_at_point():
    vals = bd_chain_at(10, 601)
    assert vals["M_k"].contains(lemma_bd_bound(10))
    assert lt(vals["Lambda"], vals["Lambda_quoted"]) is True


# -- properties --------------------------------------------------------------------

pos = st.fractions(Fraction(16, 100), Fraction(10 ** 6), max_denominator=1000)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 4), st.integers(1, 50), st.fractions(Fraction(1), Fraction(10 ** 9)),
       st.lists(pos, min_size=4, max_size=4), st.integers(0, 5), st.sampled_from(["D", "B", "A"]))
def test_matveev_monotone(t, D, B, A, bump, field):
    A = tuple(A[:t])
    base = MatveevInstance(t, D, B, A)
    if field == "D":
        other = MatveevInstance(t, D + bump, B, A)
    elif field == "B":
        other = MatveevInstance(t, D, B + bump, A)
    else:
        other = MatveevInstance(t, D, B, (A[0] + bump,) + A[1:])
    assert lt(matveev_lower_bound(other), matveev_lower_bound(base)) is not True


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4), st.fractions(Fraction(1), Fraction(10 ** 6)))
def test_guzman_luca_loosens(m, factor):
    T = Fraction((4 * m * m) ** m) * (1 + factor)
    assert lt(T, guzman_luca_bound(m, T)) is True
