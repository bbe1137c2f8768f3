import math
import random
from fractions import Fraction
from itertools import combinations

import pytest

from oracles import naive_ksets
from supersat import bounds
from supersat.constructions import full_star, sharpness_construction, star_plus_star
from supersat.errors import SandwichInconsistency, UsageError
from supersat.johnson import johnson_params
from supersat.setfam import Family, Params, count_t_pairs


def test_averaging_examples():
    p = Params(5, 2, 1)
    assert bounds.averaging_upper_bound(p, 10) == 30
    assert bounds.averaging_upper_bound(p, 2) == Fraction(2, 3)
    with pytest.raises(UsageError):
        bounds.averaging_upper_bound(p, 1)
    with pytest.raises(UsageError):
        bounds.averaging_upper_bound(p, 11)


@pytest.mark.parametrize("n,k,t,ell", [(5, 2, 1, 3), (6, 3, 1, 4), (6, 2, 0, 5), (5, 3, 2, 4)])
def test_averaging_is_the_mean(n, k, t, ell):
    verts = naive_ksets(n, k)
    counts = [sum(1 for a, b in combinations(c, 2) if len(a & b) == t) for c in combinations(verts, ell)]
    assert bounds.averaging_upper_bound(Params(n, k, t), ell) == Fraction(sum(counts), len(counts))


def test_averaging_at_full_size_is_edge_count():
    for p in [Params(7, 3, 1), Params(8, 2, 0), Params(9, 4, 2)]:
        total = math.comb(p.n, p.k)
        assert bounds.averaging_upper_bound(p, total) == johnson_params(p).edge_count


def test_turan_examples():
    assert bounds.turan_lower_bound(4, 4) == 0
    assert bounds.turan_lower_bound(4, 9) == 4
    assert bounds.turan_lower_bound(1, 7) == 21
    assert bounds.turan_lower_bound(3, 0) == 0
    with pytest.raises(UsageError):
        bounds.turan_lower_bound(0, 4)


def test_asymptotic_and_exact_value_formulas():
    assert bounds.asymptotic_quadratic_lower(Params(100, 5, 1), 10**6) == pytest.approx(5e9)
    assert bounds.asymptotic_quadratic_lower(Params(10, 3, 0), 7) == pytest.approx(24.5)
    a = bounds.asymptotic_quadratic_lower(Params(30, 5, 1), 100)
    assert bounds.asymptotic_quadratic_lower(Params(30, 5, 1), 200) == pytest.approx(4 * a)
    assert bounds.small_excess_exact_value(Params(20, 5, 1), 1) == 390
    assert bounds.small_excess_exact_value(Params(20, 5, 1), 2) == 780
    with pytest.raises(UsageError):
        bounds.small_excess_exact_value(Params(20, 4, 1), 1)
    with pytest.raises(UsageError):
        bounds.asymptotic_quadratic_lower(Params(20, 2, 1), 5)


@pytest.mark.parametrize("n,k,t", [(12, 5, 1), (16, 5, 1), (16, 7, 2), (14, 6, 1)])
def test_small_excess_value_realised_by_construction(n, k, t):
    p = Params(n, k, t)
    for r in (1, 2, 3):
        fam, _ = star_plus_star(p, r)
        assert count_t_pairs(fam, t) == bounds.small_excess_exact_value(p, r)


def test_regularized_pair_bound_formula():
    g = Family(6, 2, [[1, 2], [1, 3], [4, 5]])
    assert bounds.regularized_pair_lower_bound(g, 0) == Fraction(9, 4)
    # (k+t)|g|^2 / (4k |shadow_t|) = 3 * 9 / (8 * 5)
    assert bounds.regularized_pair_lower_bound(g, 1) == Fraction(27, 40)
    with pytest.raises(UsageError):
        bounds.regularized_pair_lower_bound(Family(6, 2, [[1, 2], [3, 4]]), 1)


def test_regularized_pair_bound_decreases_with_shadow():
    a = Family(8, 2, [[1, 2], [1, 3], [2, 3]])
    b = Family(8, 2, [[1, 2], [1, 3], [1, 4]])
    assert bounds.regularized_pair_lower_bound(a, 1) > bounds.regularized_pair_lower_bound(b, 1)


def test_construction_upper_bound_examples():
    p = Params(14, 5, 1)
    star = math.comb(12, 3)
    value, witness, _ = bounds.construction_upper_bound(p, star + 1)
    assert value <= math.comb(5, 1) * math.comb(7, 2)
    assert len(witness) == star + 1 and count_t_pairs(witness, 1) == value
    value, witness, _ = bounds.construction_upper_bound(p, 50)
    assert value == 0 and count_t_pairs(witness, 1) == 0


def test_construction_bound_prefers_sharpness_above_threshold():
    p = Params(23, 5, 1)
    from supersat.constructions import sharpness_threshold
    r = sharpness_threshold(p) + 1
    ell = math.comb(21, 3) + r
    fam, predicted = sharpness_construction(p, r)
    value, _, _ = bounds.construction_upper_bound(p, ell)
    assert value <= predicted < r * math.comb(5, 1) * math.comb(16, 2)


@pytest.mark.parametrize("n,k,t", [(5, 2, 1), (6, 3, 1), (6, 3, 0), (6, 2, 1), (7, 2, 0), (6, 3, 2)])
def test_sandwich_is_consistent(n, k, t):
    p = Params(n, k, t)
    for ell in range(math.comb(n, k) + 1):
        rep = bounds.sandwich(p, ell)
        assert rep.certified
        assert rep.best_lower() <= rep.exact <= rep.best_upper()
        assert count_t_pairs(rep.witness, t) <= rep.best_upper()


def test_sandwich_examples():
    rep = bounds.sandwich(Params(5, 2, 1), 10)
    assert rep.exact == 30 == rep.get("averaging").value
    rep = bounds.sandwich(Params(6, 3, 1), 0)
    assert rep.exact == 0
    d = rep.to_dict()
    assert d["params"] == {"n": 6, "k": 3, "t": 1} and d["exact"] == 0


def test_sandwich_large_instance_uses_local_search():
    p = Params(20, 5, 1)
    rep = bounds.sandwich(p, math.comb(18, 3) + 2, local_iterations=300)
    assert rep.exact is None and not rep.certified
    assert rep.get("local_search") is not None
    assert rep.get("small_excess_exact").kind == "reference"
    assert count_t_pairs(rep.witness, 1) == rep.best_upper()


def test_validation_raises_on_inconsistency():
    rep = bounds.BoundReport(Params(5, 2, 1), 3)
    rep.bounds = [bounds.BoundEntry("a", "lower", 5, True), bounds.BoundEntry("b", "upper", 4, True)]
    with pytest.raises(SandwichInconsistency):
        bounds._validate(rep)
    rep.bounds = [bounds.BoundEntry("a", "lower", 1, True)]
    rep.exact = 0
    with pytest.raises(SandwichInconsistency):
        bounds._validate(rep)


def test_reference_entries_are_never_certified():
    rep = bounds.sandwich(Params(14, 5, 1), 60, exact_budget=None, local_iterations=100)
    for b in rep.references:
        assert not b.certified


def test_full_star_prefix_candidate():
    p = Params(9, 4, 1)
    cands = dict(bounds.construction_candidates(p, 10))
    assert set(cands["full_star"].masks) <= set(full_star(p).masks)
    rng = random.Random(0)
    for ell in rng.sample(range(1, 127), 10):
        for name, fam in bounds.construction_candidates(p, ell):
            assert len(fam) == ell, name
