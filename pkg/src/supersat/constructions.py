"""Explicit families with few t-pairs, each with its predicted edge count.

Where a construction leaves a choice of "any r sets" open, the colex-first
ones are taken so that output is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, islice

import numpy as np

from .errors import InfeasibleConstruction, UsageError
from .setfam import FAST_N, Family, Params, all_ksets, as_mask, count_t_pairs, mask_of

KINDS = ("full_star", "star_plus_star", "clique_construction", "sharpness_construction",
         "lex_family", "greedy_packing", "multi_star")


@dataclass(frozen=True)
class Construction:
    """A generated family plus what the formulas say about it.

    ``predicted_edges`` is a point prediction; constructions that only come
    with an upper bound set ``edge_upper_bound`` instead.
    """

    kind: str
    params: Params
    family: Family
    predicted_size: int
    r: int | None = None
    predicted_edges: int | None = None
    edge_upper_bound: int | None = None
    extra: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def metadata(self, actual_edges: int | None = None) -> dict:
        p = self.params
        out = {
            "kind": self.kind,
            "params": {"n": p.n, "k": p.k, "t": p.t},
            "r": self.r,
            "size": len(self.family),
            "predicted_size": self.predicted_size,
            "predicted_edges": self.predicted_edges,
            "edge_upper_bound": self.edge_upper_bound,
            "notes": list(self.notes),
        }
        out.update(self.extra)
        if actual_edges is not None:
            out["actual_edges"] = actual_edges
        return out


def _range_mask(lo: int, hi: int) -> int:
    """Mask of the integer interval [lo, hi] (empty when hi < lo)."""
    if hi < lo:
        return 0
    return ((1 << (hi - lo + 1)) - 1) << (lo - 1)


def _containing(n: int, k: int, center: int, avoid: int = 0) -> list[int]:
    """Colex-ordered k-sets containing ``center`` and missing ``avoid``."""
    c = center.bit_count()
    free = [e for e in range(1, n + 1) if not (center | avoid) >> (e - 1) & 1]
    if k < c:
        return []
    masks = [center | mask_of(rest) for rest in combinations(free, k - c)]
    masks.sort()
    return masks


def _default_center(p: Params) -> int:
    return _range_mask(1, p.t + 1)


def full_star(p: Params, center=None) -> Family:
    """All k-sets containing a fixed (t+1)-set; (t+1)-intersecting, so t-avoiding."""
    cm = _default_center(p) if center is None else as_mask(center)
    if cm.bit_count() != p.t + 1 or cm >> p.n:
        raise UsageError(f"center must be a {p.t + 1}-subset of [{p.n}]")
    return Family.from_masks(p.n, p.k, _containing(p.n, p.k, cm), check=False)


def neighbourhood_size(p: Params) -> int:
    """C(n-k-t-1, k-2t-1): the count d used by the star-based constructions."""
    top, bottom = p.n - p.k - p.t - 1, p.k - 2 * p.t - 1
    if top < 0 or bottom < 0:
        return 0
    return math.comb(top, bottom)


def star_plus_star_construction(p: Params, r: int, centers=None) -> Construction:
    if p.k < 2 * p.t + 1:
        raise UsageError(f"star_plus_star needs k >= 2t+1, got k={p.k} t={p.t}")
    if r < 0:
        raise UsageError("r must be nonnegative")
    if centers is None:
        c1, c2 = _default_center(p), _range_mask(p.t + 2, 2 * p.t + 2)
    else:
        c1, c2 = (as_mask(c) for c in centers)
    if c1 & c2 or c1.bit_count() != p.t + 1 or c2.bit_count() != p.t + 1 or (c1 | c2) >> p.n:
        raise UsageError("centers must be disjoint (t+1)-subsets of [n]")
    a1 = _containing(p.n, p.k, c1)
    a2 = _containing(p.n, p.k, c2, avoid=c1)
    if r > len(a2):
        raise UsageError(f"r={r} exceeds the second star's size {len(a2)}")
    fam = Family.from_masks(p.n, p.k, a1 + a2[:r], check=False)
    predicted = r * math.comb(p.k, p.t) * neighbourhood_size(p)
    return Construction("star_plus_star", p, fam, len(a1) + r, r=r, predicted_edges=predicted)


def star_plus_star(p: Params, r: int, centers=None) -> tuple[Family, int]:
    """A full star plus the colex-first r sets of a second star on a disjoint center."""
    c = star_plus_star_construction(p, r, centers)
    return c.family, c.predicted_edges


def clique_parameter(p: Params, r: int) -> int:
    """Smallest x with C(x,k) >= r + C(x,t) C(n, k-2t-1), scanning up from k.

    Raises InfeasibleConstruction when no x <= n-t-1 qualifies.
    """
    if p.k < 2 * p.t + 1:
        raise UsageError(f"clique construction needs k >= 2t+1, got k={p.k} t={p.t}")
    if r < 1:
        raise UsageError("clique construction needs r >= 1")
    side = math.comb(p.n, p.k - 2 * p.t - 1)
    for x in range(p.k, p.n - p.t):
        if math.comb(x, p.k) >= r + math.comb(x, p.t) * side:
            return x
    raise InfeasibleConstruction(
        f"no x <= n-t-1={p.n - p.t - 1} satisfies C(x,k) >= r + C(x,t)C(n,k-2t-1) for r={r}")


def clique_construction_full(p: Params, r: int) -> Construction:
    x = clique_parameter(p, r)
    block = _range_mask(p.t + 2, p.t + 1 + x)
    star = _containing(p.n, p.k, _default_center(p))
    # sets of the star meeting the block in fewer than t elements see nothing inside it
    kept = [m for m in star if (m & block).bit_count() < p.t]
    ell = len(star) + r
    need = ell - len(kept)
    inside = sorted(mask_of(c) for c in combinations(range(p.t + 2, p.t + 2 + x), p.k))
    if not 0 <= need <= len(inside):
        raise InfeasibleConstruction(f"block of {len(inside)} sets cannot supply {need} members")
    fam = Family.from_masks(p.n, p.k, kept + inside[:need], check=False)
    bound = math.comb(x, p.k) * math.comb(p.k, p.t) * math.comb(x - p.k, p.k - p.t) // 2
    return Construction("clique_construction", p, fam, ell, r=r, edge_upper_bound=bound,
                        extra={"x": x, "block_members": need, "star_members": len(kept)})


def clique_construction(p: Params, r: int) -> tuple[Family, int]:
    """Most of the star, topped up with sets packed inside a small block [t+2, t+1+x]."""
    c = clique_construction_full(p, r)
    return c.family, c.edge_upper_bound


def sharpness_threshold(p: Params) -> int:
    """C(n-2t-1, k-2t-1)(C(k,t)-1); above it the construction beats r C(k,t) d."""
    return math.comb(p.n - 2 * p.t - 1, p.k - 2 * p.t - 1) * (math.comb(p.k, p.t) - 1)


def sharpness_construction_full(p: Params, r: int) -> Construction:
    if p.k < 2 * p.t + 1:
        raise UsageError(f"sharpness construction needs k >= 2t+1, got k={p.k} t={p.t}")
    if 2 * p.t + 2 > p.n:
        raise UsageError("sharpness construction needs 2t+2 <= n")
    if r < 0:
        raise UsageError("r must be nonnegative")
    notes = []
    if p.k < 2 * p.t + 3:
        notes.append("k < 2t+3: outside the regime where the small-excess value is proved")
    threshold = sharpness_threshold(p)
    if r <= threshold:
        notes.append(f"r={r} <= {threshold}: no strict improvement over r*C(k,t)*d is claimed")
    head = _default_center(p)
    bad = _range_mask(p.t + 2, 2 * p.t + 1)
    g1 = [m for m in _containing(p.n, p.k, head) if m & bad != bad]
    g2 = _containing(p.n, p.k, _range_mask(p.t + 2, 2 * p.t + 2), avoid=head)
    base = math.comb(p.n - 2 * p.t - 1, p.k - 2 * p.t - 1)
    take = base + r
    if take > len(g2):
        raise UsageError(f"second part needs {take} sets but only {len(g2)} exist")
    fam = Family.from_masks(p.n, p.k, g1 + g2[:take], check=False)
    predicted = (r + base) * (math.comb(p.k, p.t) - 1) * neighbourhood_size(p)
    size = math.comb(p.n - p.t - 1, p.k - p.t - 1) + r
    return Construction("sharpness_construction", p, fam, size, r=r, predicted_edges=predicted,
                        extra={"threshold": threshold, "first_part": len(g1), "second_part": take},
                        notes=tuple(notes))


def sharpness_construction(p: Params, r: int) -> tuple[Family, int]:
    """Star with the sets through [t+2, 2t+1] removed, plus extra sets from a disjoint star."""
    c = sharpness_construction_full(p, r)
    return c.family, c.predicted_edges


def greedy_packing(p: Params) -> Family:
    """Maximal family with pairwise intersections at most t-1, greedy in colex order."""
    if p.t < 1:
        raise UsageError("greedy packing needs t >= 1")
    chosen: list[int] = []
    if p.n <= FAST_N:
        buf = np.zeros(math.comb(p.n, p.k), dtype=np.uint64)
        count = 0
        for m in all_ksets(p.n, p.k):
            if count == 0 or np.bitwise_count(buf[:count] & np.uint64(m)).max() < p.t:
                buf[count] = m
                count += 1
                chosen.append(m)
    else:
        for m in all_ksets(p.n, p.k):
            if all((m & c).bit_count() < p.t for c in chosen):
                chosen.append(m)
    return Family.from_masks(p.n, p.k, chosen, check=False)


def lex_family(p: Params, m: int) -> Family:
    """The first m k-sets of [n] in lexicographic order."""
    total = math.comb(p.n, p.k)
    if not 0 <= m <= total:
        raise UsageError(f"m={m} outside [0, {total}]")
    sets = islice(combinations(range(1, p.n + 1), p.k), m)
    return Family.from_masks(p.n, p.k, [mask_of(s) for s in sets], check=False)


def multi_star(p: Params, ell: int) -> Family:
    """Whole stars on disjoint centers [1,t+1], [t+2,2t+2], ..., the last one partial.

    Sets already taken by an earlier star are skipped; if the centers run
    out, the remaining members are the colex-first unused k-sets.
    """
    total = math.comb(p.n, p.k)
    if not 0 <= ell <= total:
        raise UsageError(f"ell={ell} outside [0, {total}]")
    chosen: list[int] = []
    seen: set[int] = set()
    j = 0
    while len(chosen) < ell and (j + 1) * (p.t + 1) <= p.n:
        center = _range_mask(j * (p.t + 1) + 1, (j + 1) * (p.t + 1))
        for m in _containing(p.n, p.k, center):
            if m not in seen:
                seen.add(m)
                chosen.append(m)
                if len(chosen) == ell:
                    break
        j += 1
    if len(chosen) < ell:
        for m in all_ksets(p.n, p.k):
            if m not in seen:
                seen.add(m)
                chosen.append(m)
                if len(chosen) == ell:
                    break
    return Family.from_masks(p.n, p.k, chosen, check=False)


def build(kind: str, p: Params, r: int | None = None, m: int | None = None,
          center=None) -> Construction:
    """Dispatch by construction name; the CLI goes through here."""
    if kind == "full_star":
        fam = full_star(p, center)
        return Construction(kind, p, fam, math.comb(p.n - p.t - 1, p.k - p.t - 1), predicted_edges=0)
    if kind == "star_plus_star":
        return star_plus_star_construction(p, _need(r, "r"))
    if kind == "clique_construction":
        return clique_construction_full(p, _need(r, "r"))
    if kind == "sharpness_construction":
        return sharpness_construction_full(p, _need(r, "r"))
    if kind == "lex_family":
        size = _need(m, "m")
        return Construction(kind, p, lex_family(p, size), size)
    if kind == "greedy_packing":
        fam = greedy_packing(p)
        return Construction(kind, p, fam, len(fam), predicted_edges=0)
    if kind == "multi_star":
        size = _need(m, "m")
        return Construction(kind, p, multi_star(p, size), size)
    raise UsageError(f"unknown construction {kind!r}; expected one of {', '.join(KINDS)}")


def _need(value: int | None, name: str) -> int:
    if value is None:
        raise UsageError(f"this construction needs --{name}")
    return value


def verify(c: Construction) -> int:
    """Recount the t-pairs of a construction and check it against its predictions."""
    actual = count_t_pairs(c.family, c.params.t)
    if len(c.family) != c.predicted_size:
        raise AssertionError(f"{c.kind}: size {len(c.family)} != predicted {c.predicted_size}")
    if c.predicted_edges is not None and actual != c.predicted_edges:
        raise AssertionError(f"{c.kind}: {actual} t-pairs != predicted {c.predicted_edges}")
    if c.edge_upper_bound is not None and actual > c.edge_upper_bound:
        raise AssertionError(f"{c.kind}: {actual} t-pairs exceed bound {c.edge_upper_bound}")
    return actual
