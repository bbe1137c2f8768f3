"""The generalized Johnson graph G(n, k, t), kept implicit.

Vertices are k-subsets of [n]; two are adjacent when they share exactly t
elements. Only the exact solvers build adjacency bitsets, and only for graphs
small enough to search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import BudgetExceeded, UsageError
from .setfam import FAST_N, Family, KSet, Params, all_ksets, as_mask, mask_of

DEFAULT_BUDGET = 10**8
MATERIALIZE_LIMIT = 6000


@dataclass(frozen=True)
class JohnsonParams:
    params: Params
    vertex_count: int
    degree: int
    edge_count: int


def johnson_params(p: Params) -> JohnsonParams:
    v = math.comb(p.n, p.k)
    # math.comb returns 0 when n - k < k - t, which is the intended convention
    d = math.comb(p.k, p.t) * math.comb(p.n - p.k, p.k - p.t)
    return JohnsonParams(p, v, d, v * d // 2)


def is_adjacent(a: int, b: int, t: int) -> bool:
    return a != b and (a & b).bit_count() == t


def _check_vertex(v: KSet, p: Params) -> None:
    if v.n != p.n or len(v) != p.k:
        raise UsageError(f"{v} is not a {p.k}-subset of [{p.n}]")


def neighbors(v: KSet, p: Params) -> Family:
    """All k-sets meeting v in exactly t elements, in colex order."""
    _check_vertex(v, p)
    outside = [e for e in range(1, p.n + 1) if e not in v]
    masks = []
    for keep in combinations(v.elements, p.t):
        base = mask_of(keep)
        for add in combinations(outside, p.k - p.t):
            masks.append(base | mask_of(add))
    return Family.from_masks(p.n, p.k, sorted(masks), check=False)


def star_neighborhood(b: KSet, c: KSet | set[int] | tuple[int, ...], p: Params) -> Family:
    """K ⊇ c with |K ∩ b| = t, for a (t+1)-set c not inside b."""
    _check_vertex(b, p)
    cm = as_mask(c)
    if cm.bit_count() != p.t + 1:
        raise UsageError(f"center must have t+1={p.t + 1} elements")
    if cm & b.mask == cm:
        raise UsageError("b contains the center; its neighbourhood in the star is undefined")
    shared = (cm & b.mask).bit_count()
    in_b = [e for e in b.elements if not cm >> (e - 1) & 1]
    free = [e for e in range(1, p.n + 1) if not (cm | b.mask) >> (e - 1) & 1]
    need_b = p.t - shared
    need_free = p.k - p.t - 1 - need_b
    masks = []
    if need_free >= 0:
        for x in combinations(in_b, need_b):
            xm = cm | mask_of(x)
            for y in combinations(free, need_free):
                masks.append(xm | mask_of(y))
    return Family.from_masks(p.n, p.k, sorted(masks), check=False)


# -- materialised graphs for exact search --------------------------------------

@dataclass
class BitGraph:
    """Adjacency bitsets for the vertices of a small G(n, k, t)."""

    params: Params
    vertices: list[int]
    adj: list[int]
    degree: int
    edge_count: int = field(init=False)

    def __post_init__(self) -> None:
        self.edge_count = sum(a.bit_count() for a in self.adj) // 2

    @property
    def size(self) -> int:
        return len(self.vertices)

    def family(self, selection: int) -> Family:
        """Family of the vertices whose indices are set in ``selection``."""
        out = []
        i = 0
        while selection:
            if selection & 1:
                out.append(self.vertices[i])
            selection >>= 1
            i += 1
        return Family.from_masks(self.params.n, self.params.k, out, check=False)


def build_graph(p: Params, limit: int = MATERIALIZE_LIMIT) -> BitGraph:
    verts = all_ksets(p.n, p.k)
    if len(verts) > limit:
        raise UsageError(f"G({p.n},{p.k},{p.t}) has {len(verts)} vertices; exact search is capped at {limit}")
    adj = []
    if p.n <= FAST_N:
        arr = np.array(verts, dtype=np.uint64)
        for v in verts:
            row = np.bitwise_count(arr & np.uint64(v)) == p.t
            packed = np.packbits(row, bitorder="little").tobytes()
            adj.append(int.from_bytes(packed, "little"))
    else:
        for v in verts:
            a = 0
            for j, u in enumerate(verts):
                if (u & v).bit_count() == p.t:
                    a |= 1 << j
            adj.append(a)
    # k-sets never meet themselves in t < k elements, so no self loops
    return BitGraph(p, verts, adj, johnson_params(p).degree)


def _cover_order(cand: int, nonadj: list[int]) -> list[tuple[int, int]]:
    """Greedy colouring of ``cand`` in the complement graph, as (vertex, colour) pairs.

    Each colour class is a clique of the original graph, so the number of
    colours bounds the independence number of ``cand`` from above.
    """
    order = []
    colour = 0
    rest = cand
    while rest:
        colour += 1
        q = rest
        while q:
            low = q & -q
            v = low.bit_length() - 1
            q &= ~nonadj[v] & ~low
            rest &= ~low
            order.append((v, colour))
    return order


def max_independent_set(adj: list[int], budget: int = DEFAULT_BUDGET,
                        vertex_transitive: bool = False) -> tuple[int, int, int]:
    """Exact maximum independent set by branch and bound.

    Returns ``(size, selection_mask, nodes)``. Candidates are expanded in
    colouring order and pruned by the colour-class bound. With
    ``vertex_transitive`` the first vertex is forced into the solution.
    Raises BudgetExceeded once more than ``budget`` nodes are expanded.
    """
    nv = len(adj)
    if nv == 0:
        return 0, 0, 0
    full = (1 << nv) - 1
    nonadj = [full & ~a & ~(1 << v) for v, a in enumerate(adj)]
    best = [0, 0]
    nodes = [0]
    root_bound = len({c for _, c in _cover_order(full, nonadj)} or {0})

    def expand(cand: int, size: int, chosen: int) -> None:
        nodes[0] += 1
        if nodes[0] > budget:
            raise BudgetExceeded("independence number search over budget", best[0], root_bound, nodes[0])
        order = _cover_order(cand, nonadj)
        for v, c in reversed(order):
            if size + c <= best[0]:
                return
            bit = 1 << v
            nxt = cand & nonadj[v]
            if nxt:
                expand(nxt, size + 1, chosen | bit)
            elif size + 1 > best[0]:
                best[0], best[1] = size + 1, chosen | bit
            cand &= ~bit

    if vertex_transitive:
        best[0], best[1] = 1, 1
        if nonadj[0]:
            expand(nonadj[0], 1, 1)
    else:
        expand(full, 0, 0)
    return best[0], best[1], nodes[0]


# -- independence number --------------------------------------------------------

@dataclass(frozen=True)
class AlphaValue:
    """Independence number of G(n, k, t) with its provenance.

    ``regime`` is ``exact_formula`` (closed form, proved only for n beyond an
    unspecified threshold), ``theta_nt`` (order of magnitude only) or
    ``computed_exact`` (certified by search).
    """

    value: int | str
    regime: str
    note: str = ""
    lower: int | None = None
    upper: int | None = None
    witness: Family | None = None
    nodes: int = 0


def alpha(p: Params, mode: str = "formula", budget: int = DEFAULT_BUDGET) -> AlphaValue:
    if mode == "formula":
        if p.k > 2 * p.t + 1:
            v = math.comb(p.n - p.t - 1, p.k - p.t - 1)
            return AlphaValue(v, "exact_formula",
                              note="closed form holds for n > n0 with n0 unknown; not certified at this n",
                              lower=v)
        from .constructions import greedy_packing

        lower = len(greedy_packing(p)) if p.t >= 1 else None
        return AlphaValue(f"Theta(n^{p.t})", "theta_nt",
                          note="only the order of magnitude is known when k <= 2t+1", lower=lower)
    if mode != "exact":
        raise UsageError(f"unknown alpha mode {mode!r}")
    g = build_graph(p)
    size, sel, nodes = max_independent_set(g.adj, budget, vertex_transitive=True)
    return AlphaValue(size, "computed_exact", lower=size, upper=size, witness=g.family(sel), nodes=nodes)
