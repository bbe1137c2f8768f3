import math
import random
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_ksets
from supersat.errors import UsageError
from supersat.kruskal_katona import (
    colex_rank, colex_segment, colex_unrank, invert_binomial, kk_shadow_lower_bound, real_binomial,
)
from supersat.setfam import Family, all_ksets, shadow


def test_real_binomial_examples():
    assert real_binomial(4, 2) == 6
    assert real_binomial(2, 3) == 0
    assert real_binomial(4.5, 2) == pytest.approx(7.875)
    assert isinstance(real_binomial(10, 3), int)
    with pytest.raises(UsageError):
        real_binomial(0.5, 3)
    with pytest.raises(UsageError):
        real_binomial(4, 0)


def test_real_binomial_matches_comb_on_integers():
    for x in range(0, 40):
        for k in range(1, x + 2):
            assert real_binomial(x, k) == math.comb(x, k)


def test_invert_binomial_examples():
    assert invert_binomial(6, 2) == 4
    assert invert_binomial(0, 5) == 4
    assert invert_binomial(7.875, 2) == pytest.approx(4.5, abs=1e-9)
    assert invert_binomial(4, 2) == pytest.approx((1 + math.sqrt(33)) / 2, abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 4), st.floats(0, 1e6, allow_nan=False))
def test_invert_is_left_inverse(k, offset):
    x = (k - 1) + offset
    assert invert_binomial(real_binomial(x, k), k) == pytest.approx(x, abs=1e-9, rel=1e-12)


def test_invert_exact_on_integer_binomials():
    for k in range(1, 7):
        for x in range(k, 200):
            assert invert_binomial(math.comb(x, k), k) == x


def test_bound_examples():
    assert kk_shadow_lower_bound(6, 2, 1) == 4
    assert kk_shadow_lower_bound(1, 3, 2) == 3
    assert kk_shadow_lower_bound(4, 2, 1) == pytest.approx((1 + math.sqrt(33)) / 2, abs=1e-9)
    with pytest.raises(UsageError):
        kk_shadow_lower_bound(4, 2, 2)
    with pytest.raises(UsageError):
        kk_shadow_lower_bound(4, 2, 0)


def test_colex_segment_examples():
    assert len(colex_segment(0, 5, 2)) == 0
    assert colex_segment(10, 5, 2) == Family.from_masks(5, 2, all_ksets(5, 2))
    assert [m.elements for m in colex_segment(4, 5, 2).members] == [(1, 2), (1, 3), (2, 3), (1, 4)]
    with pytest.raises(UsageError):
        colex_segment(11, 5, 2)
    with pytest.raises(UsageError):
        colex_segment(-1, 5, 2)


def test_colex_segment_matches_sorted_enumeration():
    for n in range(1, 9):
        for k in range(1, n + 1):
            order = sorted((tuple(sorted(s)) for s in naive_ksets(n, k)), key=lambda s: s[::-1])
            for m in range(len(order) + 1):
                assert [x.elements for x in colex_segment(m, n, k).members] == order[:m]


def test_rank_unrank_roundtrip():
    for k in range(1, 5):
        for r, mask in enumerate(all_ksets(9, k)):
            assert colex_rank(mask) == r
            assert colex_unrank(r, k) == mask


def test_shadow_bound_holds_on_random_families():
    rng = random.Random(11)
    for _ in range(200):
        n = rng.randint(2, 14)
        k = rng.randint(2, min(n, 5))
        pool = all_ksets(n, k)
        f = Family.from_masks(n, k, rng.sample(pool, rng.randint(1, min(len(pool), 300))))
        for i in range(1, k):
            assert len(shadow(f, i)) >= kk_shadow_lower_bound(len(f), k, i) - 1e-9


def test_colex_segments_are_tight():
    for k in range(2, 6):
        for x in range(k, 13):
            seg = colex_segment(math.comb(x, k), 13, k)
            for i in range(1, k):
                assert len(shadow(seg, i)) == math.comb(x, i) == kk_shadow_lower_bound(len(seg), k, i)


def test_colex_segment_has_minimum_shadow_exhaustively():
    # every 4-member 2-uniform family on [5]: colex is optimal
    seg = len(shadow(colex_segment(4, 5, 2), 1))
    best = min(len({e for s in c for e in s}) for c in combinations(naive_ksets(5, 2), 4))
    assert seg == best == 4
