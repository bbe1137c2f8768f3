"""Ground truth for rho(ell): the fewest t-pairs among ell distinct k-sets of [n].

Exact answers come from exhaustive enumeration or branch and bound on the
materialised graph; larger instances get an uncertified upper bound from
swap-based local search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .errors import UsageError
from .johnson import DEFAULT_BUDGET, BitGraph, build_graph
from .setfam import FAST_N, Family, Params, count_t_pairs

# Plain enumeration in Python is slower than branch and bound well below 10^7 subsets.
EXHAUSTIVE_LIMIT = 10**5


@dataclass(frozen=True)
class SolveResult:
    value: int
    certified: bool
    witness: Family
    nodes_expanded: int
    method: str
    lower: int = 0

    @property
    def bracket(self) -> tuple[int, int]:
        return (self.value, self.value) if self.certified else (self.lower, self.value)


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _induced_edges(adj: list[int], sel: int) -> int:
    return sum((adj[v] & sel).bit_count() for v in _bits(sel)) // 2


class _MinEdgeSearch:
    """Depth-first branch and bound for the sparsest ell-vertex induced subgraph."""

    def __init__(self, adj: list[int], ell: int, budget: int, best_value: int, best_sel: int,
                 vertex_sets: list[int] | None = None, n: int = 0):
        self.adj = adj
        self.nv = len(adj)
        self.ell = ell
        self.budget = budget
        self.best = best_value
        self.best_sel = best_sel
        self.nodes = 0
        self.exhausted = False
        # element masks of the vertices of G(n, k, t), which enable symmetry pruning
        self.vsets = vertex_sets
        self.n = n
        self.ext = [0] * self.nv
        self.open_lower = None  # smallest bound among pruned-by-budget subtrees

    def run(self) -> None:
        full = (1 << self.nv) - 1
        if self.ell == 0:
            self.best, self.best_sel = 0, 0
            return
        atoms = [(1 << self.n) - 1] if self.vsets is not None else None
        self._dfs(full, self.ell, 0, 0, atoms)

    def _orbit(self, v: int, pool: int, atoms: list[int] | None) -> int:
        """Pool vertices that some ground-set permutation fixing every chosen set maps to v.

        Such permutations are exactly those preserving each atom of the Venn
        diagram of the chosen sets, so two k-sets are equivalent iff they meet
        every atom in the same number of elements.
        """
        bit = 1 << v
        if atoms is None or all(a & (a - 1) == 0 for a in atoms):
            return bit
        vsets = self.vsets
        key = [(vsets[v] & a).bit_count() for a in atoms]
        orbit = 0
        for u in _bits(pool):
            m = vsets[u]
            if all((m & a).bit_count() == c for a, c in zip(atoms, key)):
                orbit |= 1 << u
        return orbit

    def _include(self, v: int) -> None:
        ext = self.ext
        for u in _bits(self.adj[v]):
            ext[u] += 1

    def _exclude(self, v: int) -> None:
        ext = self.ext
        for u in _bits(self.adj[v]):
            ext[u] -= 1

    def _lower(self, cand: list[int], pool: int, r: int, cur: int) -> int:
        ext = self.ext
        adj = self.adj
        spare = len(cand) - r
        # Cover the pool by greedy cliques. Putting x chosen vertices in one clique
        # costs at least C(x, 2) inside plus their x smallest ext values, and the
        # j-th marginal j + ext_(j) is nondecreasing, so the r smallest marginals
        # over all cliques give the optimum of the relaxation.
        marginals = []
        rest = pool
        while rest:
            q = rest
            members = []
            while q:
                low = q & -q
                v = low.bit_length() - 1
                members.append(ext[v])
                q &= adj[v]
                rest ^= low
            members.sort()
            marginals.extend(j + e for j, e in enumerate(members))
        marginals.sort()
        clique_bound = sum(marginals[:r])
        # each chosen vertex keeps at least deg_pool(v) - spare of its pool neighbours
        forced = sorted(2 * ext[v] + max(0, (adj[v] & pool).bit_count() - spare) for v in cand)
        deg_bound = (sum(forced[:r]) + 1) // 2
        return cur + max(clique_bound, deg_bound)

    def _dfs(self, pool: int, r: int, cur: int, sel: int, atoms: list[int] | None) -> None:
        self.nodes += 1
        if r == 0:
            if cur < self.best:
                self.best, self.best_sel = cur, sel
            return
        cand = _bits(pool)
        if len(cand) < r:
            return
        lb = self._lower(cand, pool, r, cur)
        if lb >= self.best:
            return
        if self.nodes > self.budget:
            self.exhausted = True
            self.open_lower = lb if self.open_lower is None else min(self.open_lower, lb)
            return
        ext = self.ext
        if len(cand) == r:
            total = cur + sum(ext[v] for v in cand) + _induced_edges(self.adj, pool)
            if total < self.best:
                self.best, self.best_sel = total, sel | pool
            return
        adj = self.adj
        v = min(cand, key=lambda u: (ext[u], (adj[u] & pool).bit_count()))
        bit = 1 << v
        # Orbital branching: either v is chosen, or no vertex of its orbit is.
        # Exclusions made higher up are unions of orbits of larger groups, so
        # the current group still preserves them and the split loses no optimum.
        orbit = self._orbit(v, pool, atoms)
        child_atoms = None
        if atoms is not None:
            m = self.vsets[v]
            child_atoms = [x for a in atoms for x in (a & m, a & ~m) if x]
        self._include(v)
        self._dfs(pool & ~bit, r - 1, cur + ext[v], sel | bit, child_atoms)
        self._exclude(v)
        self._dfs(pool & ~orbit, r, cur, sel, atoms)


def _exhaustive(adj: list[int], ell: int) -> tuple[int, int, int]:
    """Minimum over every ell-subset, by incremental enumeration."""
    nv = len(adj)
    best = [math.inf, 0]
    nodes = [0]

    def rec(start: int, r: int, cur: int, sel: int) -> None:
        nodes[0] += 1
        if r == 1:
            # last vertex: scan directly instead of recursing
            for v in range(start, nv):
                total = cur + (adj[v] & sel).bit_count()
                if total < best[0]:
                    best[0], best[1] = total, sel | (1 << v)
            nodes[0] += nv - start
            return
        for v in range(start, nv - r + 1):
            rec(v + 1, r - 1, cur + (adj[v] & sel).bit_count(), sel | (1 << v))

    if ell == 0:
        return 0, 0, 1
    rec(0, ell, 0, 0)
    return int(best[0]), best[1], nodes[0]


def _complement_edges(g: BitGraph, ell: int, value_small: int) -> int:
    """Edges of an ell-set from the optimum on its complement (the graph is regular)."""
    return g.edge_count - (g.size - ell) * g.degree + value_small


def rho_exact(p: Params, ell: int, budget: int = DEFAULT_BUDGET, method: str = "auto",
              exhaustive_limit: int = EXHAUSTIVE_LIMIT, seed: int = 0) -> SolveResult:
    """rho(ell) for G(n, k, t), certified unless the node budget runs out.

    ``method`` is ``auto`` (exhaustive when C(C(n,k), ell) <= exhaustive_limit, 10^5 by default),
    ``exhaustive`` or ``branch_and_bound``. Since G(n, k, t) is regular, an
    ell-set and its complement have edge counts differing by a known amount,
    so only ell <= |V|/2 is ever searched.
    """
    nv = math.comb(p.n, p.k)
    if not 0 <= ell <= nv:
        raise UsageError(f"ell={ell} outside [0, C({p.n},{p.k})={nv}]")
    if method not in ("auto", "exhaustive", "branch_and_bound"):
        raise UsageError(f"unknown method {method!r}")
    g = build_graph(p)
    flip = ell > nv - ell
    small = nv - ell if flip else ell
    if method == "auto":
        method = "exhaustive" if math.comb(nv, small) <= exhaustive_limit else "branch_and_bound"

    if method == "exhaustive":
        value, sel, nodes = _exhaustive(g.adj, small)
        certified, lower = True, value
    else:
        init_value, init_sel = _incumbent(g, small, seed)
        search = _MinEdgeSearch(g.adj, small, budget, init_value, init_sel, g.vertices, p.n)
        search.run()
        value, sel, nodes = search.best, search.best_sel, search.nodes
        certified = not search.exhausted
        lower = value if certified else min(value, search.open_lower)

    if flip:
        full = (1 << nv) - 1
        sel = full & ~sel
        value = _complement_edges(g, ell, value)
        lower = _complement_edges(g, ell, lower)
    witness = g.family(sel)
    recount = count_t_pairs(witness, p.t)
    if recount != value or len(witness) != ell:
        raise AssertionError(f"witness recount {recount} != reported {value}")
    return SolveResult(value, certified, witness, nodes, method, lower)


def _incumbent(g: BitGraph, ell: int, seed: int) -> tuple[int, int]:
    """A good starting solution from greedy construction plus local swaps."""
    adj = g.adj
    nv = g.size
    if ell == 0:
        return 0, 0
    rng = np.random.default_rng(seed)
    sel = 0
    ext = [0] * nv
    cur = 0
    for _ in range(ell):
        best_v = min((v for v in range(nv) if not sel >> v & 1), key=lambda v: (ext[v], v))
        cur += ext[best_v]
        sel |= 1 << best_v
        for u in _bits(adj[best_v]):
            ext[u] += 1
    best_value, best_sel = cur, sel
    temp = 1.0
    for _ in range(200 * ell):
        inside = _bits(sel)
        outside = _bits(((1 << nv) - 1) & ~sel)
        if not outside:
            break
        u = inside[int(rng.integers(len(inside)))]
        w = outside[int(rng.integers(len(outside)))]
        delta = ext[w] - ext[u] - (adj[u] >> w & 1)
        if delta <= 0 or rng.random() < math.exp(-delta / temp):
            for x in _bits(adj[u]):
                ext[x] -= 1
            for x in _bits(adj[w]):
                ext[x] += 1
            sel = (sel & ~(1 << u)) | (1 << w)
            cur += delta
            if cur < best_value:
                best_value, best_sel = cur, sel
        temp = max(0.05, temp * 0.995)
    return best_value, best_sel


# -- local search on the implicit graph -------------------------------------------

DEFAULT_ITERATIONS = 20000


def _random_kset(rng: np.random.Generator, n: int, k: int) -> int:
    m = 0
    for e in rng.choice(n, size=k, replace=False).tolist():
        m |= 1 << e
    return m


def rho_local_search(p: Params, ell: int, seed: int = 0, iterations: int = DEFAULT_ITERATIONS,
                     init: Family | None = None) -> SolveResult:
    """Uncertified upper bound on rho(ell) by single swaps.

    Starts from ``init`` or from the best construction of size ell. Each step
    proposes replacing a member (half the time the one with most t-pairs
    inside the family) by a random non-member; improving and neutral swaps are
    always taken, worsening ones with a cooling annealing probability. The best
    family seen is returned, so the result is never worse than the start.
    """
    nv = math.comb(p.n, p.k)
    if not 0 <= ell <= nv:
        raise UsageError(f"ell={ell} outside [0, C({p.n},{p.k})={nv}]")
    if iterations < 0:
        raise UsageError("iterations must be nonnegative")
    if init is None:
        from .bounds import construction_upper_bound

        _, init, _ = construction_upper_bound(p, ell)
    elif len(init) != ell or init.n != p.n or init.k != p.k:
        raise UsageError("initial family does not match the instance")
    masks = list(init.masks)
    t = p.t
    fast = p.n <= FAST_N
    if fast:
        arr = np.array(masks, dtype=np.uint64)

        def hits(w: int) -> np.ndarray:
            return np.bitwise_count(arr & np.uint64(w)) == t
    else:
        def hits(w: int) -> np.ndarray:
            return np.array([(m & w).bit_count() == t for m in masks], dtype=bool)

    deg = np.zeros(ell, dtype=np.int64)
    for i, m in enumerate(masks):
        deg += hits(m)
    # a set never meets itself in t < k elements, so deg counts other members only
    cur = int(deg.sum()) // 2
    start = cur
    best_value, best_masks = cur, list(masks)
    members = set(masks)
    rng = np.random.default_rng(seed)
    temp = 1.0
    done = 0
    if 0 < ell < nv and cur > 0:
        for done in range(1, iterations + 1):
            if rng.random() < 0.5:
                i = int(np.argmax(deg))
            else:
                i = int(rng.integers(ell))
            w = _random_kset(rng, p.n, p.k)
            if w in members:
                continue
            u = masks[i]
            hw = hits(w)
            delta = int(hw.sum()) - int(hw[i]) - int(deg[i])
            if delta <= 0 or rng.random() < math.exp(-delta / temp):
                hu = hits(u)
                deg -= hu
                hw[i] = False
                deg += hw
                deg[i] = int(hw.sum())
                masks[i] = w
                members.discard(u)
                members.add(w)
                if fast:
                    arr[i] = w
                cur += delta
                if cur < best_value:
                    best_value, best_masks = cur, list(masks)
                    if cur == 0:
                        break
            temp = max(0.02, temp * 0.999)
    witness = Family.from_masks(p.n, p.k, best_masks, check=False)
    if count_t_pairs(witness, t) != best_value or len(witness) != ell or best_value > start:
        raise AssertionError("local search bookkeeping is inconsistent")
    return SolveResult(best_value, False, witness, done, "local_search", 0)
