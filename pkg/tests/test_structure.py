import itertools
import math
import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import as_sets
from supersat.constructions import full_star
from supersat.errors import UsageError
from supersat.setfam import Family, KSet, Params, count_t_pairs, is_s_diverse, link, shadow
from supersat.structure import (
    NEITHER, TYPE1, TYPE2, KPartition, avoiding_shadow_ratio, best_partition,
    check_large_family_rank, classify_intersection_structure, close_under_intersection,
    find_sunflowers, greedy_regularize, intersection_structure, is_closed_under_intersection,
    is_k_partite, projection, rank_of, restrict_to_parts,
)


def grid_family(k, size, density, seed, noise=0):
    """Random subfamily of a hidden k-partite grid, plus optional non-transversal noise."""
    rng = random.Random(seed)
    n = k * size
    perm = list(range(1, n + 1))
    rng.shuffle(perm)
    parts = [perm[i * size:(i + 1) * size] for i in range(k)]
    members = {tuple(sorted(c)) for c in itertools.product(*parts) if rng.random() < density}
    while noise:
        s = tuple(sorted(rng.sample(range(1, n + 1), k)))
        if s not in members:
            members.add(s)
            noise -= 1
    return Family(n, k, [list(s) for s in members]), parts


def brute_rank(m, k):
    full = frozenset(range(1, k + 1))
    cover = [frozenset(s) for s in m if frozenset(s) != full]
    for c in range(k + 1):
        for s in combinations(range(1, k + 1), c):
            if not any(set(s) <= x for x in cover):
                return c
    return k + 1


# -- partitions and projections ---------------------------------------------------

def test_partition_examples():
    parts = KPartition.of([[1, 2], [3, 4]], 4)
    assert is_k_partite(Family(4, 2, [[1, 3]]), parts)
    assert not is_k_partite(Family(4, 2, [[1, 2]]), parts)
    assert projection([], parts) == frozenset()
    assert projection([1, 2], parts) == {1}
    assert projection([1, 3], parts) == {1, 2}
    assert restrict_to_parts([1, 3], [2], parts) == KSet.of([3], 4)
    assert restrict_to_parts([1, 3], [1, 2], parts) == KSet.of([1, 3], 4)
    assert restrict_to_parts([1, 3], [], parts) == KSet.of([], 4)
    with pytest.raises(UsageError):
        restrict_to_parts([1, 2], [1], parts)


def test_partition_validation():
    with pytest.raises(UsageError):
        KPartition.of([[1, 2], [2, 3]], 3)
    with pytest.raises(UsageError):
        KPartition.of([[1], [3]], 3)


def test_k_partite_matches_definition_scan():
    rng = random.Random(5)
    for _ in range(50):
        f, parts = grid_family(3, 4, 0.5, rng.random(), noise=rng.randint(0, 3))
        partition = KPartition.of(parts, f.n)
        direct = all(all(len(set(m) & set(p)) == 1 for p in parts) for m in f)
        assert is_k_partite(f, partition) == direct


# -- rank and intersection structures --------------------------------------------

def test_rank_examples():
    assert rank_of([set()], 3) == 1
    assert rank_of([set(s) for s in combinations(range(1, 5), 3)], 4) == 4
    assert rank_of([{1}], 3) == 1
    assert rank_of([{1, 2, 3}], 3) == 0


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.data())
def test_rank_matches_brute_force(k, data):
    m = data.draw(st.lists(st.sets(st.integers(1, k)), max_size=8))
    assert rank_of(m, k) == brute_rank(m, k)


def test_intersection_structure_disjoint_pair():
    parts = KPartition.of([[1, 2], [3, 4]], 4)
    s = intersection_structure(Family(4, 2, [[1, 3], [2, 4]]), parts, 0)
    assert s.subsets == {frozenset()} and s.rank == 1 and s.closed_under_intersection
    with pytest.raises(UsageError):
        intersection_structure(Family(4, 2, [[1, 3]]), parts, 0)


def test_intersection_structure_of_star_is_centered():
    # k-partite part of the star through {1, 2}, k = 5, t = 1
    k, t = 5, 1
    parts = [[1], [2], [3, 4, 5], [6, 7, 8], [9, 10, 11]]
    partition = KPartition.of(parts, 11)
    members = [[1, 2, a, b, c] for a in parts[2] for b in parts[3] for c in parts[4]]
    s = intersection_structure(Family(11, k, members), partition, t)
    assert s.classification == TYPE2 and s.center == {1, 2}
    assert s.rank >= k - t - 1


def test_intersection_structure_with_t_set():
    parts = [[1, 2], [3, 4], [5, 6], [7, 8], [9, 10]]
    partition = KPartition.of(parts, 10)
    members = [list(c) for c in itertools.product(*parts)]
    s = intersection_structure(Family(10, 5, members), partition, 1)
    assert s.classification == TYPE1


def test_intersection_structure_matches_pair_scan():
    rng = random.Random(2)
    for _ in range(30):
        f, parts = grid_family(4, 3, 0.3, rng.random())
        if len(f) < 2:
            continue
        partition = KPartition.of(parts, f.n)
        s = intersection_structure(f, partition, 1)
        expected = {projection(set(a) & set(b), partition) for a, b in combinations(as_sets(f), 2)}
        assert s.subsets == expected
        assert s.closed_under_intersection == all((x & y) in expected for x in expected for y in expected)


def random_closed_family(rng, k, t):
    m = set()
    style = rng.random()
    for _ in range(rng.randint(1, 12)):
        if style < 0.5:
            c = rng.sample(range(k), rng.randint(max(0, k - t - 2), k - 1))
        else:
            c = [i for i in range(k) if rng.random() < rng.choice([0.5, 0.8, 0.9])]
        m.add(sum(1 << i for i in c))
    return close_under_intersection(m)


def test_dichotomy_on_random_closed_families():
    rng = random.Random(17)
    seen = {TYPE1: 0, TYPE2: 0}
    while sum(seen.values()) < 400:
        k = rng.randint(5, 9)
        t = rng.randint(0, 2)
        if k < 2 * t + 3:
            continue
        m = random_closed_family(rng, k, t)
        assert is_closed_under_intersection(m)
        if rank_of(m, k) < k - t - 1:
            continue
        cls, center, _ = classify_intersection_structure(m, k, t)
        assert cls != NEITHER
        seen[cls] += 1
        if cls == TYPE2:
            assert len(center) == t + 1
            cmask = sum(1 << (i - 1) for i in center)
            full = (1 << k) - 1
            for x in m:
                if x != full:
                    assert x & cmask == cmask or x.bit_count() <= t - 1
    assert seen[TYPE2] > 0


def test_classifier_reports_failed_hypotheses():
    cls, _, note = classify_intersection_structure([set()], 4, 1)
    assert cls == NEITHER and "2t+3" in note
    cls, _, note = classify_intersection_structure([{1, 2}, {2, 3}], 5, 1)
    assert cls == NEITHER and "closed" in note
    cls, _, note = classify_intersection_structure([set()], 5, 1)
    assert cls == NEITHER and "rank" in note


def test_large_family_rank_check():
    rng = random.Random(8)
    for _ in range(40):
        f, parts = grid_family(4, 4, rng.uniform(0.2, 0.9), rng.random())
        assert check_large_family_rank(f, KPartition.of(parts, f.n), 1)
    tiny = Family(8, 4, [[1, 3, 5, 7]])
    assert check_large_family_rank(tiny, KPartition.of([[1, 2], [3, 4], [5, 6], [7, 8]], 8), 1)


# -- sunflowers -------------------------------------------------------------------

def test_sunflower_examples():
    f = Family(5, 3, [[1, 2, 3], [1, 2, 4], [1, 2, 5]])
    sf = find_sunflowers(f, [1, 2], 3)
    assert sf is not None and len(sf) == 3 and sf.kernel == KSet.of([1, 2], 5)
    assert find_sunflowers(f, [1, 2], 4) is None
    with pytest.raises(UsageError):
        find_sunflowers(f, [1, 2], 1)


def brute_max_petals(f, kernel):
    cands = [s - set(kernel) for s in as_sets(f) if set(kernel) <= s]
    for size in range(len(cands), 0, -1):
        for c in combinations(cands, size):
            if all(not (a & b) for a, b in combinations(c, 2)):
                return size
    return 0


def test_sunflowers_against_exhaustive_search():
    rng = random.Random(4)
    for _ in range(60):
        n = rng.randint(6, 10)
        pool = [list(c) for c in combinations(range(1, n + 1), 3)]
        f = Family(n, 3, rng.sample(pool, rng.randint(3, min(25, len(pool)))))
        kernel = [rng.randint(1, n)]
        best = brute_max_petals(f, kernel)
        sf = find_sunflowers(f, kernel, 2)
        if best < 2:
            assert sf is None
            continue
        assert sf is not None
        petals = [set(m) - set(kernel) for m in sf.petals]
        assert all(not (a & b) for a, b in combinations(petals, 2))
        cands = sum(1 for s in as_sets(f) if set(kernel) <= s)
        if cands <= 15:
            assert len(sf) == best
        else:
            assert len(sf) <= best


# -- regularisation ---------------------------------------------------------------

def test_best_partition_recovers_planted_grid():
    f, parts = grid_family(3, 6, 0.8, 1)
    partition = best_partition(f, seed=0)
    assert is_k_partite(f, partition)


def test_regularize_small_family_is_empty():
    f = Family(6, 3, [[1, 2, 3], [4, 5, 6]])
    sub, _, rep = greedy_regularize(f, 6)
    assert len(sub) == 0 and not rep.accepted
    with pytest.raises(UsageError):
        greedy_regularize(f, 5)


@pytest.mark.parametrize("seed", range(6))
def test_regularize_output_passes_rechecks(seed):
    f, _ = grid_family(3, 12, 0.9, seed, noise=20)
    sub, partition, rep = greedy_regularize(f, 6, seed=seed)
    assert rep.accepted and len(sub) > 0
    assert set(sub.masks) <= set(f.masks)
    assert is_k_partite(sub, partition)
    s = intersection_structure(sub, partition, 1)
    assert s.closed_under_intersection
    for member in random.Random(seed).sample(list(sub), 40):
        for j in s.subsets:
            x = restrict_to_parts(member, j, partition)
            lk = link(sub, x)
            assert len(lk) >= 6 and is_s_diverse(lk, 6)
    assert rep.final_size == len(sub)
    assert rep.input_size - rep.transversal_size <= 20


def test_regularize_is_deterministic():
    f, _ = grid_family(3, 8, 0.9, 3, noise=5)
    a = greedy_regularize(f, 6, seed=4)
    b = greedy_regularize(f, 6, seed=4)
    assert a[0] == b[0] and a[2].to_dict() == b[2].to_dict()


# -- avoiding families and shadows -----------------------------------------------

def test_avoiding_ratio_examples():
    p = Params(9, 4, 1)
    star = full_star(p)
    avoiding, ratio = avoiding_shadow_ratio(star, 1)
    assert avoiding and ratio == Fraction(len(shadow(star, 2)), len(star))
    avoiding, ratio = avoiding_shadow_ratio(Family(9, 4, [[1, 2, 3, 4]]), 1)
    assert avoiding and ratio == math.comb(4, 2)
    avoiding, _ = avoiding_shadow_ratio(Family(9, 4, [[1, 2, 3, 4], [1, 5, 6, 7]]), 1)
    assert not avoiding
    with pytest.raises(UsageError):
        avoiding_shadow_ratio(star, 2)


def test_avoiding_ratio_consistent_with_count():
    rng = random.Random(9)
    for _ in range(30):
        n = rng.randint(6, 10)
        pool = [list(c) for c in combinations(range(1, n + 1), 3)]
        f = Family(n, 3, rng.sample(pool, rng.randint(1, 12)))
        avoiding, ratio = avoiding_shadow_ratio(f, 1)
        assert avoiding == (count_t_pairs(f, 1) == 0)
        assert ratio == Fraction(len(shadow(f, 1)), len(f))
