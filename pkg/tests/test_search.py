import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pillai.errors import DomainError, Rejected, UnclassifiedSolution
from pillai.kfib import SolutionRecord
from pillai.search import (SearchConfig, brute_force, classify_one, classify_solutions,
                           completeness_report, expected_family_i, find_record, representations,
                           residue_search, search, verify_candidate)

TINY = SearchConfig((4, 8), (3, 60), (2, 60))


def keys(records):
    return sorted((r.k, r.n, r.n1, r.m, r.m1) for r in records)


def test_residue_search_matches_brute_force():
    res = search(TINY)
    assert keys(res.records) == keys(brute_force(TINY))
    assert res.rejected == 0


def test_small_modulus_only_costs_time():
    cfg = SearchConfig((4, 8), (3, 60), (2, 60), modulus=97)
    res = search(cfg)
    assert res.rejected > 0 and 0 < res.collision_rate < 1
    assert keys(res.records) == keys(brute_force(TINY))


def test_parallel_matches_serial():
    assert residue_search(TINY, workers=2) == residue_search(TINY)


def test_verify_examples():
    assert verify_candidate(4, 8, 3, 4, 3).c == -25
    assert verify_candidate(9, 10, 6, 5, 1).c == 13
    with pytest.raises(Rejected):
        verify_candidate(4, 7, 5, 3, 2)
    with pytest.raises(DomainError):
        verify_candidate(4, 5, 5, 3, 2)


def test_classify_examples():
    assert classify_one(SolutionRecord.build(7, 7, 3, 5, 1)).family == "i"
    assert classify_one(SolutionRecord.build(5, 10, 5, 3, 2)).family == "ii"
    with pytest.raises(UnclassifiedSolution):
        classify_one(SolutionRecord.build(4, 5, 3, 3, 1, base=2))  # 8 - 2^3 = 2 - 2^1, a base-2 solution


def test_family_i_min_k():
    recs = [SolutionRecord.build(4, 5, 2, 3, 1), SolutionRecord.build(9, 10, 5, 6, 1)]
    fam = classify_solutions(recs)
    assert [t.min_k for t in fam.family("i")] == [4, 9]
    assert fam.values()["i"] == {(4, -1), (9, 13)}


def test_k6_partners():
    records = brute_force(SearchConfig((6, 6), (3, 60), (2, 60)))
    assert representations(records, 6, 5) == [(5, 1), (7, 3), (10, 5)]
    # both pairwise records are emitted; the printed partner (6, 1) gives 13
    assert find_record(records, 6, 10, 5, 5, 1) and find_record(records, 6, 10, 7, 5, 3)
    assert find_record(records, 6, 10, 6, 5, 1) is None


def test_completeness_tiny():
    comp = completeness_report(TINY, brute_force(TINY))
    assert comp["exact"]
    assert comp["family_ii"] == [(4, 8, 3, 4, 3), (5, 10, 3, 5, 2), (6, 10, 5, 5, 1), (6, 10, 7, 5, 3)]
    assert (8, 10, 6, 5, 1) not in expected_family_i(TINY)  # c = 13 starts at k = 9


def test_empty_ranges():
    cfg = SearchConfig((4, 5), (30, 10), (2, 60))
    assert residue_search(cfg) == [] and brute_force(cfg) == []


@pytest.mark.parametrize("kw", [dict(k_range=(1, 4)), dict(n_range=(2, 10)), dict(m_range=(1, 10)),
                                dict(modulus=1), dict(k_range=(4.0, 5))])
def test_config_validation(kw):
    base = dict(k_range=(4, 5), n_range=(3, 10), m_range=(2, 10))
    with pytest.raises(DomainError):
        SearchConfig(**{**base, **kw})


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 8), st.integers(3, 60), st.integers(2, 60), st.integers(2, 10 ** 6))
def test_no_false_negatives(k, n_hi, m_hi, modulus):
    cfg = SearchConfig((k, k), (3, n_hi), (2, m_hi), modulus)
    cands = set(residue_search(cfg))
    assert set(keys(brute_force(cfg))) <= cands
