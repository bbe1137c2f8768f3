"""Delta-system analysis of uniform families.

Families are studied through a partition of [n] into k parts that every
member meets exactly once. Subsets of the part index set [k] are exposed
as frozensets of 1-based indices and handled internally as bitmasks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable

import numpy as np

from .errors import UsageError
from .setfam import Family, KSet, as_mask, count_t_pairs, elements_of, mask_of, shadow

TYPE1 = "type1_has_t_set"
TYPE2 = "type2_center"
NEITHER = "neither"


@dataclass(frozen=True)
class KPartition:
    """Disjoint parts X_1, ..., X_k covering [n], stored as masks."""

    n: int
    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        seen = 0
        for part in self.parts:
            if part & seen:
                raise UsageError("partition parts overlap")
            seen |= part
        if seen != (1 << self.n) - 1:
            raise UsageError(f"partition parts do not cover [1..{self.n}]")

    @classmethod
    def of(cls, parts: Iterable[Iterable[int]], n: int) -> KPartition:
        return cls(n, tuple(mask_of(p) for p in parts))

    @classmethod
    def from_colours(cls, colours: Iterable[int], k: int) -> KPartition:
        """colours[e - 1] is the 0-based part index of element e."""
        colours = list(colours)
        parts = [0] * k
        for e, c in enumerate(colours):
            parts[c] |= 1 << e
        return cls(len(colours), tuple(parts))

    @property
    def k(self) -> int:
        return len(self.parts)

    def colours(self) -> list[int]:
        out = [0] * self.n
        for i, part in enumerate(self.parts):
            for e in elements_of(part):
                out[e - 1] = i
        return out

    def as_lists(self) -> list[list[int]]:
        return [list(elements_of(p)) for p in self.parts]


def _check_partition(f: Family, partition: KPartition) -> None:
    if partition.n != f.n:
        raise UsageError(f"partition is over [{partition.n}], family over [{f.n}]")


def _is_transversal(mask: int, partition: KPartition) -> bool:
    return all((mask & part).bit_count() == 1 for part in partition.parts)


def is_k_partite(f: Family, partition: KPartition) -> bool:
    _check_partition(f, partition)
    return all(_is_transversal(m, partition) for m in f.masks)


def _projection_mask(y: int, partition: KPartition) -> int:
    out = 0
    for i, part in enumerate(partition.parts):
        if y & part:
            out |= 1 << i
    return out


def _as_index_set(mask: int) -> frozenset[int]:
    return frozenset(elements_of(mask))


def _index_mask(j: Iterable[int] | int) -> int:
    return j if isinstance(j, int) else mask_of(j)


def projection(y: KSet | Iterable[int] | int, partition: KPartition) -> frozenset[int]:
    """Indices i with y ∩ X_i nonempty."""
    return _as_index_set(_projection_mask(as_mask(y), partition))


def restrict_to_parts(member: KSet | Iterable[int] | int, j: Iterable[int],
                      partition: KPartition) -> KSet:
    """F_J: the elements of a transversal member lying in the parts indexed by j."""
    m = as_mask(member)
    if not _is_transversal(m, partition):
        raise UsageError(f"{elements_of(m)} does not meet every part exactly once")
    region = 0
    for i in _as_index_set(_index_mask(j)):
        if not 1 <= i <= partition.k:
            raise UsageError(f"part index {i} outside [1, {partition.k}]")
        region |= partition.parts[i - 1]
    return KSet.from_mask(m & region, partition.n)


# -- intersection structures -----------------------------------------------------

def _element_matrix(masks: list[int], partition: KPartition) -> np.ndarray:
    """Row i, column j: the element of member i lying in part j."""
    colour = partition.colours()
    mat = np.zeros((len(masks), partition.k), dtype=np.int64)
    for i, m in enumerate(masks):
        for e in elements_of(m):
            mat[i, colour[e - 1]] = e
    return mat


def _int_codes(mat: np.ndarray) -> set[int]:
    """Projection masks π(E ∩ F) over unordered pairs of distinct rows."""
    m, k = mat.shape
    if m < 2:
        return set()
    codes = np.zeros((m, m), dtype=np.int64)
    for j in range(k):
        col = mat[:, j]
        codes |= (col[:, None] == col[None, :]).astype(np.int64) << j
    iu = np.triu_indices(m, 1)
    return {int(c) for c in np.unique(codes[iu])}


def rank_of(m: Iterable[Iterable[int] | int], k: int) -> int:
    """Size of the smallest subset of [k] not inside any member other than [k].

    Returns k + 1 if everything is covered, which can only happen when k = 0.
    """
    full = (1 << k) - 1
    members = [x for x in (_index_mask(s) for s in m) if x != full]
    for c in range(k + 1):
        for combo in combinations(range(k), c):
            s = sum(1 << i for i in combo)
            if not any(s & x == s for x in members):
                return c
    return k + 1


def is_closed_under_intersection(m: Iterable[int]) -> bool:
    ms = set(m)
    return all((a & b) in ms for a, b in combinations(ms, 2))


def close_under_intersection(m: Iterable[int]) -> set[int]:
    closed = set(m)
    frontier = list(closed)
    while frontier:
        new = []
        for a in frontier:
            for b in list(closed):
                c = a & b
                if c not in closed:
                    closed.add(c)
                    new.append(c)
        frontier = new
    return closed


def classify_intersection_structure(m: Iterable[Iterable[int] | int], k: int, t: int,
                                    ) -> tuple[str, frozenset[int] | None, str]:
    """Dichotomy for intersection-closed families of rank at least k-t-1 (k >= 2t+3).

    Either some member has exactly t elements (type 1), or there is a unique
    (t+1)-set M such that the members other than [k] are exactly the proper
    supersets of M plus some sets of size at most t-1 (type 2). Returns
    ``(classification, center, note)``; when the hypotheses fail the result
    is ``neither`` with the reason in ``note``.
    """
    full = (1 << k) - 1
    ms = {_index_mask(s) for s in m}
    if k < 2 * t + 3:
        return NEITHER, None, f"hypothesis k >= 2t+3 fails (k={k}, t={t})"
    if not is_closed_under_intersection(ms):
        return NEITHER, None, "hypothesis fails: not closed under intersection"
    r = rank_of(ms, k)
    if r < k - t - 1:
        return NEITHER, None, f"hypothesis fails: rank {r} < k-t-1 = {k - t - 1}"
    if any(x.bit_count() == t for x in ms):
        return TYPE1, None, ""
    proper = ms - {full}
    centers = []
    for combo in combinations(range(k), t + 1):
        c = sum(1 << i for i in combo)
        if c not in proper:
            continue
        if any(x & c != c and x.bit_count() > t - 1 for x in proper):
            continue
        rest = full & ~c
        # every proper superset of c must be present
        ok = True
        sub = rest
        while True:
            s = c | sub
            if s != full and s not in proper:
                ok = False
                break
            if sub == 0:
                break
            sub = (sub - 1) & rest
        if ok:
            centers.append(c)
    if len(centers) == 1:
        return TYPE2, _as_index_set(centers[0]), ""
    if len(centers) > 1:
        raise AssertionError(f"several type-2 centers: {[sorted(_as_index_set(c)) for c in centers]}")
    return NEITHER, None, "hypotheses hold but no t-set and no center (would contradict the dichotomy)"


@dataclass(frozen=True)
class IntersectionStructure:
    k: int
    t: int
    subsets: frozenset[frozenset[int]]
    closed_under_intersection: bool
    rank: int
    classification: str
    center: frozenset[int] | None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "subsets": sorted(sorted(s) for s in self.subsets),
            "closed_under_intersection": self.closed_under_intersection,
            "rank": self.rank,
            "classification": self.classification,
            "center": sorted(self.center) if self.center is not None else None,
            "note": self.note,
        }


def _structure_from_codes(codes: set[int], k: int, t: int) -> IntersectionStructure:
    closed = is_closed_under_intersection(codes)
    cls, center, note = classify_intersection_structure(codes, k, t)
    return IntersectionStructure(k, t, frozenset(_as_index_set(c) for c in codes), closed,
                                 rank_of(codes, k), cls, center, note)


def intersection_structure(f: Family, partition: KPartition, t: int) -> IntersectionStructure:
    """Int(f) = {π(E ∩ F) : E ≠ F}, with closure, rank and classification."""
    _check_partition(f, partition)
    if len(f) < 2:
        raise UsageError("an intersection structure needs at least two members")
    if not is_k_partite(f, partition):
        raise UsageError("family is not k-partite for this partition")
    codes = _int_codes(_element_matrix(list(f.masks), partition))
    return _structure_from_codes(codes, partition.k, t)


def check_large_family_rank(f: Family, partition: KPartition, t: int) -> bool:
    """True iff |f| <= C(n, k-t-2) or rank(Int(f)) >= k-t-1.

    A k-partite family above that size cannot leave a (k-t-2)-set of parts
    uncovered, since then its members would be determined by their traces
    on those parts. False therefore means a bug.
    """
    if not is_k_partite(f, partition):
        raise UsageError("family is not k-partite for this partition")
    k = f.k
    limit = math.comb(f.n, k - t - 2) if k - t - 2 >= 0 else 0
    if len(f) <= limit:
        return True
    codes = _int_codes(_element_matrix(list(f.masks), partition))
    return rank_of(codes, partition.k) >= k - t - 1


# -- sunflowers --------------------------------------------------------------------

@dataclass(frozen=True)
class Sunflower:
    petals: Family
    kernel: KSet

    def __len__(self) -> int:
        return len(self.petals)


def _max_disjoint(petals: list[int]) -> list[int]:
    """Largest pairwise-disjoint subfamily, by exhaustive branch and bound."""
    best: list[int] = []

    def rec(i: int, used: int, chosen: list[int]) -> None:
        nonlocal best
        if len(chosen) + len(petals) - i <= len(best):
            return
        if i == len(petals):
            best = list(chosen)
            return
        if petals[i] & used == 0:
            chosen.append(i)
            rec(i + 1, used | petals[i], chosen)
            chosen.pop()
        rec(i + 1, used, chosen)

    rec(0, 0, [])
    return best


def find_sunflowers(f: Family, kernel: KSet | Iterable[int] | int, s: int,
                    exact_limit: int = 15) -> Sunflower | None:
    """A sunflower with kernel exactly ``kernel`` and at least s petals, if found.

    With at most ``exact_limit`` candidate members the largest such sunflower
    is found exhaustively; above that a greedy maximal one is used.
    """
    if s < 2:
        raise UsageError("a sunflower needs s >= 2")
    km = as_mask(kernel)
    cands = [m for m in f.masks if m & km == km]
    petals = [m ^ km for m in cands]
    if len(cands) <= exact_limit:
        picked = _max_disjoint(petals)
    else:
        picked, used = [], 0
        for i, p in enumerate(petals):
            if p & used == 0:
                picked.append(i)
                used |= p
    if len(picked) < s:
        return None
    fam = Family.from_masks(f.n, f.k, [cands[i] for i in picked], check=False)
    return Sunflower(fam, KSet.from_mask(km, f.n))


# -- partition search and regularisation -------------------------------------------

def _membership(masks: list[int], n: int) -> np.ndarray:
    mat = np.zeros((len(masks), n), dtype=bool)
    for i, m in enumerate(masks):
        for e in elements_of(m):
            mat[i, e - 1] = True
    return mat


def _refine_colouring(member: np.ndarray, colours: np.ndarray, k: int, max_passes: int = 20) -> np.ndarray:
    """Recolour one element at a time while the number of transversal members grows."""
    colours = colours.copy()
    counts = np.stack([member[:, colours == c].sum(axis=1) for c in range(k)], axis=1)
    for _ in range(max_passes):
        improved = False
        for v in range(member.shape[1]):
            rows = member[:, v]
            if not rows.any():
                continue
            a = colours[v]
            c = counts[rows]
            bad = (c != 1).sum(axis=1)
            now = bad == 0
            ca = c[:, a]
            base = bad - (ca != 1) + (ca - 1 != 1)
            # moving v from part a to part b changes only those two counts
            new_bad = base[:, None] - (c != 1) + (c + 1 != 1)
            gain = (new_bad == 0).sum(axis=0) - now.sum()
            gain[a] = 0
            b = int(np.argmax(gain))
            if gain[b] > 0:
                counts[rows, a] -= 1
                counts[rows, b] += 1
                colours[v] = b
                improved = True
        if not improved:
            break
    return colours


def best_partition(f: Family, seed: int = 0, rounds: int = 64, refine: bool = True) -> KPartition:
    """Partition of [n] into k parts keeping as many members transversal as possible.

    Each round starts from a seeded random balanced colouring, optionally
    improved by single-element recolouring; the best round wins, ties going
    to the earliest. Stops early once every member is transversal.
    """
    k, n = f.k, f.n
    if k < 1:
        raise UsageError("partitions need k >= 1")
    masks = list(f.masks)
    member = _membership(masks, n)
    best = None
    for rnd in range(rounds):
        rng = np.random.default_rng([seed, rnd])
        colours = np.empty(n, dtype=np.int64)
        colours[rng.permutation(n)] = np.arange(n) % k
        if refine and masks:
            colours = _refine_colouring(member, colours, k)
        part = KPartition.from_colours(colours.tolist(), k)
        score = sum(1 for m in masks if _is_transversal(m, part))
        if best is None or score > best[0]:
            best = (score, part)
        if score == len(masks):
            break
    return best[1]


@dataclass(frozen=True)
class Violation:
    level: int
    parts: frozenset[int]
    kernel: tuple[int, ...]
    reason: str  # "small" or "not_diverse"
    element: int | None
    link_size: int
    element_count: int = 0


def _violations(masks: list[int], partition: KPartition, s: int,
                mat: np.ndarray | None = None, codes: set[int] | None = None) -> list[Violation]:
    """Links F(F_J), J in Int, that are smaller than s or not s-diverse."""
    if len(masks) < 2:
        return []
    if mat is None:
        mat = _element_matrix(masks, partition)
    if codes is None:
        codes = _int_codes(mat)
    k = partition.k
    out = []
    for code in sorted(codes, key=lambda c: (c.bit_count(), c)):
        cols = [j for j in range(k) if code >> j & 1]
        others = [j for j in range(k) if not code >> j & 1]
        if cols:
            _, gid = np.unique(mat[:, cols], axis=0, return_inverse=True)
            gid = gid.ravel()
        else:
            gid = np.zeros(len(masks), dtype=np.int64)
        ngroups = int(gid.max()) + 1
        sizes = np.bincount(gid, minlength=ngroups)
        worst = np.zeros(ngroups, dtype=np.int64)
        worst_el = np.zeros(ngroups, dtype=np.int64)
        for j in others:
            key = gid * (partition.n + 1) + mat[:, j]
            uniq, cnt = np.unique(key, return_counts=True)
            g = uniq // (partition.n + 1)
            el = uniq % (partition.n + 1)
            for gg, cc, ee in zip(g.tolist(), cnt.tolist(), el.tolist()):
                if cc > worst[gg] or (cc == worst[gg] and ee < worst_el[gg]):
                    worst[gg], worst_el[gg] = cc, ee
        first = {}
        for i, g in enumerate(gid.tolist()):
            first.setdefault(g, i)
        for g in range(ngroups):
            kernel = tuple(sorted(int(mat[first[g], j]) for j in cols))
            size = int(sizes[g])
            if size < s:
                out.append(Violation(len(cols), _as_index_set(code), kernel, "small", None, size))
            elif worst[g] * s > size:
                out.append(Violation(len(cols), _as_index_set(code), kernel, "not_diverse",
                                     int(worst_el[g]), size, int(worst[g])))
    return out


@dataclass
class RegularizationReport:
    s: int
    seed: int
    input_size: int
    transversal_size: int = 0
    partition: list[list[int]] = field(default_factory=list)
    phases: list[dict] = field(default_factory=list)
    final_size: int = 0
    k_partite: bool = False
    links_large: bool = False
    links_diverse: bool = False
    closed_under_intersection: bool = False
    accepted: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def regularity_verdicts(sub: Family, partition: KPartition, s: int) -> dict:
    """Re-check the regularity predicates on a finished family."""
    masks = list(sub.masks)
    kpart = is_k_partite(sub, partition)
    if not kpart:
        return {"k_partite": False, "links_large": False, "links_diverse": False,
                "closed_under_intersection": False}
    mat = _element_matrix(masks, partition)
    codes = _int_codes(mat)
    viol = _violations(masks, partition, s, mat, codes)
    return {
        "k_partite": True,
        "links_large": not any(v.reason == "small" for v in viol),
        "links_diverse": not any(v.reason == "not_diverse" for v in viol),
        "closed_under_intersection": is_closed_under_intersection(codes),
    }


def greedy_regularize(f: Family, s: int, seed: int = 0, rounds: int = 64,
                      refine: bool = True) -> tuple[Family, KPartition, RegularizationReport]:
    """Find a k-partite subfamily whose links F(F_J), J in Int, all have size >= s and are s-diverse.

    The partition is the best of ``rounds`` seeded colourings. Violations are
    then peeled level by level in increasing |J|: a link that is too small
    loses all of its members, and a link dominated by an element v loses just
    enough members through F_J ∪ {v} to bring v back under a 1/s share. Every phase strictly shrinks the family, so the
    loop terminates, possibly with an empty family.
    """
    if s < 2 * f.k:
        raise UsageError(f"need s >= 2k = {2 * f.k}, got s={s}")
    rep = RegularizationReport(s=s, seed=seed, input_size=len(f))
    if len(f) == 0:
        partition = KPartition.from_colours([i % max(f.k, 1) for i in range(f.n)], max(f.k, 1))
        rep.partition = partition.as_lists()
        return f, partition, rep
    partition = best_partition(f, seed=seed, rounds=rounds, refine=refine)
    rep.partition = partition.as_lists()
    masks = [m for m in f.masks if _is_transversal(m, partition)]
    rep.transversal_size = len(masks)
    phase = 0
    while masks:
        if len(masks) < s:
            # a single member has an empty trace; any fewer than s members cannot pass
            rep.phases.append({"phase": phase, "level": 0, "reason": "family_smaller_than_s",
                               "removed": len(masks)})
            masks = []
            break
        viol = _violations(masks, partition, s)
        if not viol:
            break
        level = viol[0].level
        drop_kernels = set()
        drop = set()
        dominated = 0
        for v in viol:
            if v.level != level:
                break
            if v.reason == "small":
                drop_kernels.add(mask_of(v.kernel))
                continue
            # trim the heavy element's share of the link down to a 1/s fraction:
            # keeping c of its h members leaves a link of size L - h + c, so c <= (L - h)/(s - 1)
            dominated += 1
            heavy = mask_of(v.kernel) | (1 << (v.element - 1))
            keep_count = (v.link_size - v.element_count) // (s - 1)
            through = sorted((m for m in masks if m & heavy == heavy), reverse=True)
            drop.update(through[:len(through) - keep_count])
        keep = [m for m in masks if m not in drop and not any(m & x == x for x in drop_kernels)]
        rep.phases.append({"phase": phase, "level": level, "reason": "peel",
                           "small_links": len(drop_kernels), "dominated_links": dominated,
                           "removed": len(masks) - len(keep)})
        masks = keep
        phase += 1
    sub = Family.from_masks(f.n, f.k, masks, check=False)
    rep.final_size = len(sub)
    if len(sub) >= 2:
        verdicts = regularity_verdicts(sub, partition, s)
        rep.k_partite = verdicts["k_partite"]
        rep.links_large = verdicts["links_large"]
        rep.links_diverse = verdicts["links_diverse"]
        rep.closed_under_intersection = verdicts["closed_under_intersection"]
        rep.accepted = all(verdicts.values())
    return sub, partition, rep


def avoiding_shadow_ratio(f: Family, t: int) -> tuple[bool, Fraction]:
    """Whether f is t-avoiding, and |(k-t-1)-shadow| / |f|."""
    if f.k < 2 * t + 1:
        raise UsageError(f"needs k >= 2t+1, got k={f.k} t={t}")
    if len(f) == 0:
        raise UsageError("ratio of an empty family is undefined")
    avoiding = count_t_pairs(f, t) == 0
    return avoiding, Fraction(len(shadow(f, f.k - t - 1)), len(f))
