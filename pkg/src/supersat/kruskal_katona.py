"""Colex order and the real-valued (Lovász) form of Kruskal-Katona."""

from __future__ import annotations

import math

from .errors import UsageError
from .setfam import Family, elements_of, mask_of

BISECT_ITERS = 200
BISECT_TOL = 1e-9


def real_binomial(x: float, k: int) -> float | int:
    """x(x-1)...(x-k+1)/k! for real x >= k-1; exact when x is integral."""
    if k < 1:
        raise UsageError(f"k must be positive, got {k}")
    if x < k - 1:
        raise UsageError(f"need x >= k-1, got x={x} k={k}")
    if float(x).is_integer():
        return math.comb(int(x), k)
    num = 1.0
    for j in range(k):
        num *= x - j
    return num / math.factorial(k)


def invert_binomial(m: float, k: int) -> float:
    """The unique x >= k-1 with real_binomial(x, k) == m, by bisection.

    If m is an integer binomial C(X, k) the integer X is returned exactly.
    """
    if m < 0:
        raise UsageError(f"need m >= 0, got {m}")
    if k < 1:
        raise UsageError(f"k must be positive, got {k}")
    if m == 0:
        return k - 1
    lo = float(k - 1)
    hi = k - 1 + max(2.0 * m, 2.0 * k)
    for _ in range(BISECT_ITERS):
        if hi - lo <= BISECT_TOL * 1e-2:
            break
        mid = 0.5 * (lo + hi)
        if real_binomial(mid, k) < m:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    near = round(x)
    if abs(x - near) <= BISECT_TOL and near >= k - 1 and math.comb(near, k) == m:
        return near
    return x


def kk_shadow_lower_bound(family_size: int, k: int, i: int) -> float | int:
    """C(x, i) where |F| = C(x, k); no k-uniform family of that size has a smaller i-shadow."""
    if not 1 <= i <= k - 1:
        raise UsageError(f"need 1 <= i <= k-1, got i={i} k={k}")
    x = invert_binomial(family_size, k)
    return real_binomial(x, i)


def colex_rank(mask: int) -> int:
    """Position of a set in colex order (0-based), via the combinatorial number system."""
    return sum(math.comb(e - 1, j) for j, e in enumerate(elements_of(mask), 1))


def colex_unrank(rank: int, k: int) -> int:
    """The set at position ``rank`` in the colex order of k-sets."""
    els = []
    for j in range(k, 0, -1):
        e = j - 1
        while math.comb(e + 1, j) <= rank:
            e += 1
        els.append(e + 1)
        rank -= math.comb(e, j)
    return mask_of(els)


def colex_segment(m: int, n: int, k: int) -> Family:
    """The first m k-subsets of [n] in colex order."""
    total = math.comb(n, k)
    if not 0 <= m <= total:
        raise UsageError(f"segment length {m} outside [0, C({n},{k})={total}]")
    masks = []
    if m:
        cur = (1 << k) - 1
        for _ in range(m):
            masks.append(cur)
            if cur == 0:
                break
            c = cur & -cur
            r = cur + c
            cur = (((r ^ cur) >> 2) // c) | r
    return Family.from_masks(n, k, masks, check=False)
