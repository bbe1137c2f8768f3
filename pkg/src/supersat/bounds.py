"""Lower and upper bounds on rho(ell), assembled into one report.

Certified bounds use exact integer or rational arithmetic. Asymptotic
statements are carried along as ``reference`` entries: they describe the
n -> infinity behaviour and are never checked against finite data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import constructions as cons
from .errors import BudgetExceeded, InfeasibleConstruction, SandwichInconsistency, UsageError
from .johnson import DEFAULT_BUDGET, MATERIALIZE_LIMIT, alpha, johnson_params
from .kruskal_katona import colex_segment
from .setfam import Family, Params, count_t_pairs, shadow
from .solver import DEFAULT_ITERATIONS, rho_exact, rho_local_search

Number = int | Fraction | float


@dataclass(frozen=True)
class BoundEntry:
    name: str
    kind: str  # lower | upper | reference
    value: Number
    certified: bool
    note: str = ""

    def to_dict(self) -> dict:
        out = {"name": self.name, "kind": self.kind, "certified": self.certified,
               "value": _plain(self.value)}
        if isinstance(self.value, Fraction) and self.value.denominator != 1:
            out["fraction"] = f"{self.value.numerator}/{self.value.denominator}"
        if self.note:
            out["note"] = self.note
        return out


def _plain(v: Number) -> int | float:
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else float(v)
    return v


@dataclass
class BoundReport:
    p: Params
    ell: int
    bounds: list[BoundEntry] = field(default_factory=list)
    exact: int | None = None
    certified: bool = False
    bracket: tuple[int, int] | None = None
    witness: Family | None = None
    witness_name: str | None = None
    witness_file: str | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def lower_bounds(self) -> list[BoundEntry]:
        return [b for b in self.bounds if b.kind == "lower"]

    @property
    def upper_bounds(self) -> list[BoundEntry]:
        return [b for b in self.bounds if b.kind == "upper"]

    @property
    def references(self) -> list[BoundEntry]:
        return [b for b in self.bounds if b.kind == "reference"]

    def get(self, name: str) -> BoundEntry | None:
        for b in self.bounds:
            if b.name == name:
                return b
        return None

    def best_lower(self) -> Number:
        return max((b.value for b in self.lower_bounds if b.certified), default=0)

    def best_upper(self) -> Number | None:
        return min((b.value for b in self.upper_bounds if b.certified), default=None)

    def to_dict(self) -> dict:
        p = self.p
        return {
            "params": {"n": p.n, "k": p.k, "t": p.t},
            "ell": self.ell,
            "bounds": [b.to_dict() for b in self.bounds],
            "exact": self.exact,
            "certified": self.certified,
            "bracket": list(self.bracket) if self.bracket else None,
            "witness": self.witness_name,
            "witness_file": self.witness_file,
            "notes": self.notes,
        }


def _check_ell(p: Params, ell: int, low: int = 0) -> int:
    total = math.comb(p.n, p.k)
    if not low <= ell <= total:
        raise UsageError(f"ell={ell} outside [{low}, C({p.n},{p.k})={total}]")
    return total


def averaging_upper_bound(p: Params, ell: int) -> Fraction:
    """Mean number of t-pairs over all ell-subsets: |E| ell(ell-1) / (|V|(|V|-1))."""
    _check_ell(p, ell, low=2)
    jp = johnson_params(p)
    return Fraction(jp.edge_count * ell * (ell - 1), jp.vertex_count * (jp.vertex_count - 1))


def averaging_asymptotic(p: Params, ell: int) -> float:
    """Leading term (ell^2 / n^t)(t!/2) C(k,t)^2 of the mean."""
    return ell**2 / p.n**p.t * math.factorial(p.t) / 2 * math.comb(p.k, p.t) ** 2


def star_packing_asymptotic(p: Params, ell: int) -> float:
    """The upper-bound shape (ell^2 / n^t)(t!/2) C(k-t-1,t)^2 reached by disjoint stars."""
    return ell**2 / p.n**p.t * math.factorial(p.t) / 2 * math.comb(p.k - p.t - 1, p.t) ** 2


def construction_candidates(p: Params, ell: int) -> list[tuple[str, Family]]:
    """Every implemented construction that yields exactly ell sets."""
    _check_ell(p, ell)
    out: list[tuple[str, Family]] = []
    star_size = math.comb(p.n - p.t - 1, p.k - p.t - 1)
    r = ell - star_size
    if r <= 0:
        star = cons.full_star(p)
        out.append(("full_star", Family.from_masks(p.n, p.k, star.masks[:ell], check=False)))
    if p.t >= 1 and p.k <= 2 * p.t + 1:
        packing = cons.greedy_packing(p)
        if ell <= len(packing):
            out.append(("greedy_packing", Family.from_masks(p.n, p.k, packing.masks[:ell], check=False)))
    if r >= 1 and p.k >= 2 * p.t + 1:
        for name, make in (("star_plus_star", cons.star_plus_star),
                           ("clique_construction", cons.clique_construction),
                           ("sharpness_construction", cons.sharpness_construction)):
            try:
                fam, _ = make(p, r)
            except (UsageError, InfeasibleConstruction):
                continue
            out.append((name, fam))
    out.append(("lex_family", cons.lex_family(p, ell)))
    out.append(("multi_star", cons.multi_star(p, ell)))
    out.append(("colex_segment", colex_segment(ell, p.n, p.k)))
    return out


def construction_upper_bound(p: Params, ell: int) -> tuple[int, Family, str]:
    """Fewest t-pairs among the constructions of size ell, with the witness and its name.

    Each candidate is recounted directly, so the value is a certified upper bound.
    """
    best = None
    for name, fam in construction_candidates(p, ell):
        value = count_t_pairs(fam, p.t)
        if best is None or value < best[0]:
            best = (value, fam, name)
    assert best is not None
    return best


def turan_lower_bound(alpha_value: int, ell: int) -> int:
    """(alpha/2) q (q-1) with q = floor(ell/alpha).

    Valid whenever ``alpha_value`` is at least the independence number.
    q(q-1) is even, so the value is an integer and needs no rounding.
    """
    if alpha_value < 1:
        raise UsageError("alpha must be at least 1")
    if ell < 0:
        raise UsageError("ell must be nonnegative")
    q = ell // alpha_value
    return alpha_value * q * (q - 1) // 2


def asymptotic_quadratic_lower(p: Params, ell: int) -> float:
    """(ell^2 / n^t)(t!/2): the large-ell lower-bound curve for k >= 2t+1."""
    if p.k < 2 * p.t + 1:
        raise UsageError("the quadratic lower curve needs k >= 2t+1")
    return ell**2 / p.n**p.t * math.factorial(p.t) / 2


def small_excess_exact_value(p: Params, r: int) -> int:
    """r C(k,t) C(n-k-t-1, k-2t-1), the exact rho at ell = C(n-t-1,k-t-1) + r for large n."""
    if p.k < 2 * p.t + 3:
        raise UsageError(f"needs k >= 2t+3, got k={p.k} t={p.t}")
    if r < 1:
        raise UsageError("needs r >= 1")
    return r * math.comb(p.k, p.t) * cons.neighbourhood_size(p)


def regularized_pair_lower_bound(g: Family, t: int) -> Fraction:
    """(k+t)|g|^2 / (4k |t-shadow of g|) for a regularised family that has a t-pair."""
    if count_t_pairs(g, t) == 0:
        raise UsageError("the family is t-avoiding; the bound does not apply")
    k = g.k
    return Fraction((k + t) * len(g) ** 2, 4 * k * len(shadow(g, t)))


def sandwich(p: Params, ell: int, exact_budget: int | None = DEFAULT_BUDGET, seed: int = 0,
             local_iterations: int = DEFAULT_ITERATIONS) -> BoundReport:
    """Collect every applicable bound on rho(ell) and, within budget, the exact value.

    Instances too large for exact search (or with ``exact_budget=None``) get
    a local-search upper bound instead. Raises SandwichInconsistency if a
    certified lower bound exceeds a certified upper bound or the exact value.
    """
    total = _check_ell(p, ell)
    rep = BoundReport(p, ell)
    add = rep.bounds.append
    add(BoundEntry("trivial", "lower", 0, True))
    star_size = math.comb(p.n - p.t - 1, p.k - p.t - 1)
    r = ell - star_size

    small = total <= MATERIALIZE_LIMIT and exact_budget is not None
    alpha_upper = None
    if small:
        try:
            a = alpha(p, "exact", budget=exact_budget)
            alpha_upper = a.value
            rep.notes.append(f"alpha={a.value} certified by search")
        except BudgetExceeded as exc:
            alpha_upper = exc.upper
            rep.notes.append(f"alpha search over budget; alpha in [{exc.lower}, {exc.upper}]")
    if alpha_upper:
        add(BoundEntry("turan", "lower", turan_lower_bound(alpha_upper, ell), True,
                       "q = floor(ell/alpha), alpha from search"))
    if p.k > 2 * p.t + 1:
        a_formula = math.comb(p.n - p.t - 1, p.k - p.t - 1)
        add(BoundEntry("turan_formula_alpha", "reference", turan_lower_bound(a_formula, ell), False,
                       "alpha from the large-n closed form; not certified at this n"))

    if ell >= 2:
        add(BoundEntry("averaging", "upper", averaging_upper_bound(p, ell), True))
        add(BoundEntry("averaging_asymptotic", "reference", averaging_asymptotic(p, ell), False))
    value, witness, name = construction_upper_bound(p, ell)
    add(BoundEntry("construction", "upper", value, True, f"witness: {name}"))
    rep.witness, rep.witness_name = witness, name

    if p.k >= 2 * p.t + 1:
        add(BoundEntry("quadratic_lower_asymptotic", "reference", asymptotic_quadratic_lower(p, ell), False,
                       "asymptotic in n with ell >> n^(k-t-1); not binding at fixed n"))
        add(BoundEntry("star_packing_asymptotic", "reference", star_packing_asymptotic(p, ell), False))
    if p.k >= 2 * p.t + 3 and r >= 1:
        add(BoundEntry("small_excess_exact", "reference", small_excess_exact_value(p, r), False,
                       "exact only for n beyond an unknown threshold and r = o(n^(k-2t-1))"))
        add(BoundEntry("order_small_excess", "reference", r * p.n ** (p.k - 2 * p.t - 1), False,
                       "order of magnitude only (r = o(n^(k-t-1)))"))
        add(BoundEntry("order_large_excess", "reference", p.n ** (2 * p.k - 3 * p.t - 2), False,
                       "order of magnitude only (r = Theta(n^(k-t-1)))"))

    if small:
        res = rho_exact(p, ell, budget=exact_budget, seed=seed)
        rep.bracket = res.bracket
        if res.certified:
            rep.exact, rep.certified = res.value, True
        else:
            add(BoundEntry("branch_and_bound", "lower", res.lower, True, "open subtrees at budget"))
            add(BoundEntry("search_incumbent", "upper", res.value, True))
            rep.notes.append("exact search over budget; value not certified")
        if res.value < value:
            rep.witness, rep.witness_name = res.witness, f"rho_exact/{res.method}"
    else:
        rep.notes.append("exact search skipped; instance too large or no budget given")
        res = rho_local_search(p, ell, seed=seed, iterations=local_iterations, init=witness)
        add(BoundEntry("local_search", "upper", res.value, True, "swap search from the best construction"))
        if res.value < value:
            rep.witness, rep.witness_name = res.witness, "local_search"
    _validate(rep)
    return rep


def _validate(rep: BoundReport) -> None:
    lows = [b for b in rep.lower_bounds if b.certified]
    ups = [b for b in rep.upper_bounds if b.certified]
    for lo in lows:
        for up in ups:
            if lo.value > up.value:
                raise SandwichInconsistency(f"{lo.name}={lo.value} exceeds {up.name}={up.value}")
        if rep.exact is not None and lo.value > rep.exact:
            raise SandwichInconsistency(f"{lo.name}={lo.value} exceeds exact rho={rep.exact}")
    if rep.exact is not None:
        for up in ups:
            if rep.exact > up.value:
                raise SandwichInconsistency(f"exact rho={rep.exact} exceeds {up.name}={up.value}")
