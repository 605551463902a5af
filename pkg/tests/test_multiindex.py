import itertools
import math

import pytest
from hypothesis import given, strategies as st

from jetflow.multiindex import MultiIndex, all_upto, empty, iter_orders, unit


def brute_force_subindices(sigma):
    """Oracle: label the |sigma| index slots and enumerate subsets directly."""
    slots = []
    for axis, c in enumerate(sigma.counts):
        slots.extend([axis] * c)
    seen = {}
    for r in range(len(slots) + 1):
        for combo in itertools.combinations(range(len(slots)), r):
            counts = [0] * sigma.n
            for k in combo:
                counts[slots[k]] += 1
            seen[tuple(counts)] = seen.get(tuple(counts), 0) + 1
    return seen


def test_order():
    assert MultiIndex((0, 0)).order == 0
    assert MultiIndex((2, 1)).order == 3
    assert MultiIndex((5,)).order == 5


def test_factorial():
    assert MultiIndex((0, 0)).factorial() == 1
    assert MultiIndex((2, 1)).factorial() == 2
    assert MultiIndex((3, 2)).factorial() == 12


def test_factorial_overflow_reported():
    with pytest.raises(OverflowError):
        MultiIndex((40,)).factorial()


def test_extend():
    assert MultiIndex((0, 0)).extend(0) == MultiIndex((1, 0))
    assert MultiIndex((2, 1)).extend(1) == MultiIndex((2, 2))
    assert MultiIndex((1,)).extend(0) == MultiIndex((2,))
    with pytest.raises(IndexError):
        MultiIndex((1, 0)).extend(2)


def test_subindices_small_cases():
    subs = MultiIndex((1, 0)).subindices()
    assert sorted((nu.counts, comp.counts, c) for nu, comp, c in subs) == [
        ((0, 0), (1, 0), 1),
        ((1, 0), (0, 0), 1),
    ]

    subs = MultiIndex((2, 1)).subindices()
    assert len(subs) == 6
    table = {nu.counts: c for nu, _, c in subs}
    assert table[(1, 1)] == 2  # C(2,1)*C(1,1)

    counts = sorted(c for _, _, c in MultiIndex((2, 0)).subindices())
    assert counts == [1, 1, 2]
    assert sum(counts) == 4


def test_subindices_against_brute_force():
    for sigma in iter_orders(2, 5):
        oracle = brute_force_subindices(sigma)
        got = {nu.counts: c for nu, _, c in sigma.subindices()}
        assert got == oracle


def test_subindices_sum_and_symmetry_exhaustive():
    # sum over nu of C_sigma^nu equals 2**|sigma|, all n <= 3, |sigma| <= 8
    for n in (1, 2, 3):
        for sigma in iter_orders(n, 8):
            subs = sigma.subindices()
            assert sum(c for _, _, c in subs) == 2 ** sigma.order
            assert len(subs) == math.prod(c + 1 for c in sigma.counts)
            entries = {(nu.counts, comp.counts, c) for nu, comp, c in subs}
            assert all((comp, nu, c) in entries for nu, comp, c in entries)


def test_complement_is_componentwise_difference():
    sigma = MultiIndex((3, 1, 2))
    for nu, comp, _ in sigma.subindices():
        assert (nu + comp) == sigma


@given(st.lists(st.integers(min_value=0, max_value=4), min_size=1, max_size=3),
       st.integers(min_value=0, max_value=2))
def test_extend_raises_order(counts, i):
    sigma = MultiIndex(counts)
    if i < sigma.n:
        assert sigma.extend(i).order == sigma.order + 1


@given(st.lists(st.integers(min_value=0, max_value=6), min_size=1, max_size=4))
def test_name_round_trip(counts):
    sigma = MultiIndex(counts)
    assert MultiIndex.from_name(sigma.name(), sigma.n) == sigma


def test_names():
    assert MultiIndex((2, 1)).name() == "xxy"
    assert MultiIndex((0, 0)).name() == "0"
    assert MultiIndex.from_name("xxy", 2) == MultiIndex((2, 1))


def test_enumeration_graded_and_complete():
    sigmas = all_upto(2, 3)
    assert sigmas[0] == empty(2)
    orders = [s.order for s in sigmas]
    assert orders == sorted(orders)
    assert len(sigmas) == 10  # (3+1)(3+2)/2
    assert len(set(sigmas)) == len(sigmas)
    assert unit(2, 0) in sigmas and unit(2, 1) in sigmas


def test_choose_count_matches_subindices():
    sigma = MultiIndex((2, 2))
    for nu, _, c in sigma.subindices():
        assert sigma.choose_count(nu) == c
    with pytest.raises(ValueError):
        sigma.choose_count(MultiIndex((3, 0)))
