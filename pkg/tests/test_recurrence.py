import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftsets.natset import HTuple, NatSet, distance_set
from shiftsets.recurrence import (
    Certificate,
    SearchLimits,
    brute_force_search,
    certificate_check,
    load_certificates,
    recurrence_count,
    rk_set,
    rkh_membership,
    rkh_search,
)

from conftest import brute_intersection


def test_recurrence_count_examples(example_A):
    assert [recurrence_count(example_A, x) for x in (1, 2, 3)] == [2, 2, 2]
    assert recurrence_count(example_A, 0) == 5
    assert recurrence_count(example_A, 4) == 1


def test_rk_set_examples(example_A):
    assert rk_set(example_A, 2, 8).elements == (1, 2, 3)
    assert rk_set(example_A, 6, 100).elements == ()
    assert rk_set(example_A, 1, 6).elements == distance_set(example_A).restrict(1, 6).elements


def test_k_zero_rejected(example_A):
    with pytest.raises(ValueError):
        rk_set(example_A, 0, 10)
    with pytest.raises(ValueError):
        rkh_membership(example_A, 0, HTuple.of(1, 2))


def test_membership_examples(example_A):
    assert rkh_membership(example_A, 2, HTuple.of(1, 2, 4)) is None
    cert = rkh_membership(example_A, 1, HTuple.of(1, 2, 3))
    assert cert is not None and cert.witnesses == (4,) and cert.count == 1
    assert certificate_check(example_A, cert)


def test_non_reversibility_instance(example_A):
    F = NatSet.of([1, 2, 4])
    assert distance_set(F).issubset(rk_set(example_A, 2, 16))
    assert rkh_membership(example_A, 2, HTuple(F.elements)) is None


@pytest.mark.parametrize("k", [1, 2, 3])
def test_pairs_member_iff_distance_recurrent(example_A, k):
    Rk = rk_set(example_A, k, 40)
    for t, u in itertools.combinations(range(15), 2):
        member = rkh_membership(example_A, k, HTuple.of(t, u)) is not None
        assert member == ((u - t) in Rk)


def test_search_pairs(example_A):
    res = rkh_search(example_A, NatSet.of([1, 2, 3, 4]), 2, 2)
    assert [c.tuple.entries for c in res] == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
    assert res.status == "complete"


def test_search_triple_empty(example_A):
    res = rkh_search(example_A, NatSet.of([1, 2, 4]), 2, 3)
    assert list(res) == [] and res.status == "complete"


def test_search_small_B(example_A):
    assert list(rkh_search(example_A, NatSet.of([3]), 1, 2)) == []


def test_search_rejects_small_h(example_A):
    with pytest.raises(ValueError):
        rkh_search(example_A, NatSet.of([1, 2]), 1, 1)


def test_certificate_check_rejects_perturbation(example_A):
    cert = rkh_membership(example_A, 1, HTuple.of(1, 2, 3))
    bumped = Certificate(cert.tuple, (5,), 1)
    # 5 - 1 = 4 is not in A
    assert not certificate_check(example_A, bumped)


def test_certificate_check_rejects_short_witness_list(example_A):
    cert = rkh_membership(example_A, 1, HTuple.of(1, 2, 3))
    assert not certificate_check(example_A, Certificate(cert.tuple, cert.witnesses, 2))


def test_certificate_check_rejects_wrong_count(example_A):
    cert = rkh_membership(example_A, 2, HTuple.of(1, 2))
    assert not certificate_check(example_A, Certificate(cert.tuple, cert.witnesses, 2, cert.count + 1))


def test_certificate_serialization(example_A):
    cert = rkh_membership(example_A, 2, HTuple.of(1, 3))
    assert Certificate.from_line(cert.to_line()) == cert
    assert Certificate.from_dict(cert.to_dict()) == cert
    lines = ["# header", cert.to_line(), "", '{"type":"search-summary"}', str(cert.to_dict()).replace("'", '"')]
    assert load_certificates(lines) == [cert, cert]


def test_budget_exhaustion_is_reported():
    A = NatSet.of(range(50))
    B = NatSet.of(range(30))
    res = rkh_search(A, B, 1, 3, SearchLimits(tuple_budget=40))
    assert res.status == "budget-exhausted"
    assert res.examined == 40
    full = rkh_search(A, B, 1, 3, SearchLimits(tuple_budget=10**6, result_cap=10**6))
    assert [c.tuple for c in res] == [c.tuple for c in full][: len(res)]


def test_result_cap():
    A = NatSet.of(range(50))
    res = rkh_search(A, NatSet.of(range(30)), 1, 3, SearchLimits(result_cap=7))
    assert len(res) == 7 and res.status == "result-cap"
    assert [c.tuple.entries for c in res] == list(itertools.combinations(range(30), 3))[:7]


def test_b_horizon_restricts_B():
    A = NatSet.of(range(20))
    res = rkh_search(A, NatSet.of(range(20)), 1, 2, SearchLimits(b_horizon=4))
    assert all(max(c.tuple) < 4 for c in res) and len(res) == 6


@pytest.mark.parametrize("budget, cap", [(10**6, 10**6), (37, 10**6), (10**6, 5), (200, 11), (1, 1)])
def test_parallel_merge_reproduces_sequential(budget, cap):
    rng = random.Random(5)
    A = NatSet.of([x for x in range(120) if rng.random() < 0.4], capacity=120)
    B = NatSet.of(sorted(rng.sample(range(120), 14)), capacity=120)
    limits = SearchLimits(budget, cap)
    seq = rkh_search(A, B, 2, 3, limits, workers=1)
    par = rkh_search(A, B, 2, 3, limits, workers=2)
    assert seq == par


def _random_instance(rng, cap):
    A = NatSet.of([x for x in range(cap) if rng.random() < rng.uniform(0.1, 0.7)], capacity=cap)
    B = NatSet.of(sorted(rng.sample(range(cap), rng.randint(2, 12))), capacity=cap)
    return A, B


@pytest.mark.parametrize("seed", range(40))
def test_search_matches_brute_force(seed):
    rng = random.Random(seed)
    A, B = _random_instance(rng, rng.randint(8, 128))
    k, h = rng.randint(1, 3), rng.randint(2, 4)
    res = rkh_search(A, B, k, h, SearchLimits(10**8, 10**6))
    assert [c.tuple for c in res] == brute_force_search(A, B, k, h)
    for c in res:
        assert certificate_check(A, c)
        assert set(c.witnesses) <= brute_intersection(A.elements, c.tuple.entries)


@pytest.mark.parametrize("seed", range(20))
def test_nesting(seed):
    rng = random.Random(100 + seed)
    A, B = _random_instance(rng, rng.randint(8, 128))
    for k in (1, 2, 3):
        assert rk_set(A, k + 1, 128).issubset(rk_set(A, k, 128))
    for k in (1, 2):
        for c in rkh_search(A, B, k, 3):
            for sub in itertools.combinations(c.tuple.entries, 2):
                assert rkh_membership(A, k, HTuple(sub)) is not None


@given(
    st.sets(st.integers(0, 127), min_size=1, max_size=60),
    st.sets(st.integers(0, 127), min_size=2, max_size=10),
    st.integers(1, 3),
    st.integers(2, 4),
)
@settings(max_examples=60, deadline=None)
def test_certificates_have_recurrent_distances(A, B, k, h):
    A, B = NatSet.of(A, capacity=128), NatSet.of(B, capacity=128)
    Rk = rk_set(A, k, 128)
    for c in rkh_search(A, B, k, h):
        assert distance_set(NatSet.of(c.tuple)).issubset(Rk)
        assert certificate_check(A, c)


def test_k1_always_finds_tuples():
    # with k = 1 any tuple of B within an interval A is a member
    A = NatSet.of(range(1, 200))
    B = NatSet.of(range(1, 30))
    for h in (2, 3, 5):
        assert len(rkh_search(A, B, 1, h, SearchLimits(result_cap=3))) == 3
