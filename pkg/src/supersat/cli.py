"""Command-line interface: ``supersat {rho,construct,analyze,sweep}``.

Exit codes: 0 success, 2 usage error, 3 result not certified (budget or
instance size), 4 infeasible construction.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from fractions import Fraction

from . import constructions as cons
from .bounds import regularized_pair_lower_bound, sandwich
from .errors import InfeasibleConstruction, UsageError
from .johnson import DEFAULT_BUDGET, MATERIALIZE_LIMIT, alpha
from .setfam import Params, atomic_write_text, count_t_pairs, read_family, write_family
from .solver import DEFAULT_ITERATIONS
from .structure import avoiding_shadow_ratio, greedy_regularize, intersection_structure

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNCERTIFIED = 3
EXIT_INFEASIBLE = 4

CONSTRUCT_KINDS = {
    "full-star": "full_star",
    "star-plus-star": "star_plus_star",
    "clique": "clique_construction",
    "sharpness": "sharpness_construction",
    "lex": "lex_family",
    "packing": "greedy_packing",
}

SWEEP_COLUMNS = [
    "n", "k", "t", "ell", "r", "alpha", "alpha_source",
    "lower_trivial", "lower_turan", "lower_branch_and_bound",
    "upper_averaging", "upper_construction", "upper_search_incumbent", "upper_local_search",
    "exact", "certified",
    "ref_small_excess_exact", "ref_averaging_asymptotic", "ref_quadratic_lower_asymptotic",
    "ref_star_packing_asymptotic", "ref_turan_formula_alpha",
    "witness", "witness_path",
]


def _threads() -> int:
    """Parallelism cap from RHO_THREADS. Validated but unused: every command runs sequentially."""
    raw = os.environ.get("RHO_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"RHO_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"RHO_THREADS must be a positive integer, got {raw!r}")
    return value


def _to_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _params(args) -> Params:
    return Params(args.n, args.k, args.t)


# -- rho ----------------------------------------------------------------------------

def cmd_rho(args) -> int:
    p = _params(args)
    budget = None if args.no_exact else args.exact_budget
    rep = sandwich(p, args.ell, exact_budget=budget, seed=args.seed, local_iterations=args.iterations)
    if args.witness_out and rep.witness is not None:
        write_family(rep.witness, args.witness_out)
        rep.witness_file = args.witness_out
    _emit(_to_json(rep.to_dict()), args.out)
    return EXIT_OK if rep.certified else EXIT_UNCERTIFIED


# -- construct ----------------------------------------------------------------------

def cmd_construct(args) -> int:
    p = _params(args)
    kind = CONSTRUCT_KINDS[args.kind]
    try:
        c = cons.build(kind, p, r=args.r, m=args.m)
    except InfeasibleConstruction as exc:
        print(f"infeasible construction: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    actual = count_t_pairs(c.family, p.t)
    meta = c.metadata(actual)
    meta["family_file"] = os.path.basename(args.out)
    write_family(c.family, args.out)
    atomic_write_text(args.out + ".json", _to_json(meta))
    for note in c.notes:
        print(f"warning: {note}", file=sys.stderr)
    print(_to_json(meta), end="")
    return EXIT_OK


# -- analyze ------------------------------------------------------------------------

def _structure_block(fam, partition, t) -> dict | None:
    if len(fam) < 2:
        return None
    return intersection_structure(fam, partition, t).to_dict()


def analyze_family(f, t: int, s: int | None = None, seed: int = 0) -> dict:
    """Structured report used by ``supersat analyze``."""
    if len(f) == 0:
        raise UsageError("the family is empty")
    if not 0 <= t < f.k:
        raise UsageError(f"need 0 <= t < k={f.k}, got t={t}")
    s = 2 * f.k if s is None else s
    report: dict = {"n": f.n, "k": f.k, "t": t, "s": s, "seed": seed, "size": len(f),
                    "t_pairs": count_t_pairs(f, t)}
    if f.k >= 2 * t + 1:
        avoiding, ratio = avoiding_shadow_ratio(f, t)
        report["avoiding_shadow"] = {"t_avoiding": avoiding, "ratio": float(ratio),
                                     "fraction": f"{ratio.numerator}/{ratio.denominator}"}
    sub, partition, reg = greedy_regularize(f, s, seed=seed)
    report["regularization"] = reg.to_dict()
    transversal = f.from_masks(f.n, f.k, [m for m in f.masks
                                         if all((m & part).bit_count() == 1 for part in partition.parts)],
                               check=False)
    report["transversal_structure"] = _structure_block(transversal, partition, t)
    report["regularized_structure"] = _structure_block(sub, partition, t)
    pairs = count_t_pairs(sub, t) if len(sub) >= 2 else 0
    block = {"t_pairs": pairs, "applies": reg.accepted and pairs > 0}
    if block["applies"]:
        bound = regularized_pair_lower_bound(sub, t)
        block.update(bound=float(bound), fraction=f"{bound.numerator}/{bound.denominator}",
                     holds=pairs >= bound)
    report["regularized_pair_bound"] = block
    return report


def cmd_analyze(args) -> int:
    try:
        f = read_family(args.inp)
    except OSError as exc:
        raise UsageError(f"cannot read {args.inp}: {exc.strerror or exc}") from None
    report = analyze_family(f, args.t, args.s, args.seed)
    _emit(_to_json(report), args.out)
    return EXIT_OK


# -- sweep --------------------------------------------------------------------------

_RANGE = re.compile(r"^\s*(-?\d+)\s*(?:\.\.\s*(-?\d+)\s*)?$")
_ELL_TERM = re.compile(r"^\s*(alpha\s*(?:\+\s*(\d+))?|(\d+))\s*$")


def parse_range(text: str) -> range:
    """'a..b' (inclusive) or a single integer. b < a gives an empty range."""
    m = _RANGE.match(text)
    if not m:
        raise UsageError(f"malformed range {text!r}; expected 'a..b' or an integer")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) is not None else lo
    return range(lo, hi + 1)


def _parse_ell_term(text: str) -> tuple[bool, int]:
    m = _ELL_TERM.match(text)
    if not m:
        raise UsageError(f"malformed ell term {text!r}; expected an integer, 'alpha' or 'alpha+R'")
    if m.group(3) is not None:
        return False, int(m.group(3))
    return True, int(m.group(2) or 0)


def parse_ell_spec(text: str) -> tuple[bool, range]:
    """Absolute ('12', '10..20') or alpha-relative ('alpha+2', 'alpha+1..alpha+3')."""
    parts = text.split("..")
    if len(parts) > 2:
        raise UsageError(f"malformed ell spec {text!r}")
    rel_lo, lo = _parse_ell_term(parts[0])
    rel_hi, hi = _parse_ell_term(parts[-1])
    if rel_lo != rel_hi:
        raise UsageError(f"ell spec {text!r} mixes absolute and alpha-relative ends")
    return rel_lo, range(lo, hi + 1)


def _sweep_alpha(p: Params, budget: int) -> tuple[int, str]:
    if math.comb(p.n, p.k) <= MATERIALIZE_LIMIT:
        return alpha(p, "exact", budget=budget).value, "exact"
    a = alpha(p, "formula")
    if isinstance(a.value, int):
        return a.value, "formula"
    raise UsageError(f"alpha of G({p.n},{p.k},{p.t}) is unknown at this size; use an absolute ell spec")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else repr(float(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def sweep_rows(n_range: range, k: int, t: int, ell_spec: str, budget: int | None = DEFAULT_BUDGET,
               seed: int = 0, witness_dir: str | None = None,
               iterations: int = DEFAULT_ITERATIONS) -> tuple[list[dict], bool]:
    """Rows in (n, ell) order, and whether every exact value was certified."""
    relative, ells = parse_ell_spec(ell_spec)
    rows = []
    all_certified = True
    for n in n_range:
        p = Params(n, k, t)
        total = math.comb(n, k)
        a, a_src = (None, "")
        if relative or total <= MATERIALIZE_LIMIT:
            try:
                a, a_src = _sweep_alpha(p, budget or DEFAULT_BUDGET)
            except UsageError:
                if relative:
                    raise
        for off in ells:
            ell = a + off if relative else off
            if not 0 <= ell <= total:
                continue
            rep = sandwich(p, ell, exact_budget=budget, seed=seed, local_iterations=iterations)
            all_certified &= rep.certified
            row = {c: None for c in SWEEP_COLUMNS}
            row.update(n=n, k=k, t=t, ell=ell, r=ell - math.comb(n - t - 1, k - t - 1),
                       alpha=a, alpha_source=a_src, exact=rep.exact, certified=rep.certified,
                       witness=rep.witness_name)
            for b in rep.bounds:
                col = {"lower": "lower_", "upper": "upper_", "reference": "ref_"}[b.kind] + b.name
                if col in row:
                    row[col] = b.value
            if witness_dir and rep.witness is not None:
                path = os.path.join(witness_dir, f"witness_n{n}_k{k}_t{t}_ell{ell}.txt")
                write_family(rep.witness, path)
                row["witness_path"] = path
            rows.append(row)
    return rows, all_certified


def format_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    n_range = parse_range(args.n_range)
    if args.witness_dir:
        os.makedirs(args.witness_dir, exist_ok=True)
    budget = None if args.no_exact else args.exact_budget
    rows, certified = sweep_rows(n_range, args.k, args.t, args.ell_spec, budget, args.seed,
                                 args.witness_dir, args.iterations)
    _emit(format_csv(rows), args.out)
    return EXIT_OK if certified else EXIT_UNCERTIFIED


# -- entry point ----------------------------------------------------------------------

def _add_params(sp, with_t: bool = True) -> None:
    sp.add_argument("--n", type=int, required=True, help="ground set size")
    sp.add_argument("--k", type=int, required=True, help="set size")
    if with_t:
        sp.add_argument("--t", type=int, required=True, help="intersection size that counts as an edge")


def _add_search(sp) -> None:
    sp.add_argument("--exact-budget", type=int, default=DEFAULT_BUDGET,
                    help="node cap for the exact searches (default %(default)s)")
    sp.add_argument("--no-exact", action="store_true", help="skip exact search, use local search only")
    sp.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS,
                    help="local-search steps when exact search is skipped")
    sp.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    # argparse itself exits with status 2 on bad flags, matching EXIT_USAGE
    ap = argparse.ArgumentParser(prog="supersat", description="Supersaturation in generalized Johnson graphs G(n, k, t).")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("rho", help="bounds and, when feasible, the exact value of rho(ell)")
    _add_params(sp)
    sp.add_argument("--ell", type=int, required=True)
    _add_search(sp)
    sp.add_argument("--out", help="write the JSON report here instead of stdout")
    sp.add_argument("--witness-out", help="write the best witness family here")
    sp.set_defaults(func=cmd_rho)

    sp = sub.add_parser("construct", help="build one of the extremal constructions")
    sp.add_argument("--kind", required=True, choices=sorted(CONSTRUCT_KINDS))
    _add_params(sp)
    sp.add_argument("--r", type=int, help="excess over the full star (star-plus-star, clique, sharpness)")
    sp.add_argument("--m", type=int, help="family size (lex)")
    sp.add_argument("--out", required=True, help="family file; metadata goes to OUT.json")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("analyze", help="regularise a family and classify its intersection structure")
    sp.add_argument("--in", dest="inp", required=True, help="family file")
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--s", type=int, help="diversity parameter, at least 2k (default 2k)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="write the JSON report here instead of stdout")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("sweep", help="CSV table of bounds over a range of n and ell")
    sp.add_argument("--n-range", required=True, help="'a..b' inclusive")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--ell-spec", required=True,
                    help="absolute ('12', '10..20') or relative to alpha ('alpha+1..alpha+3')")
    _add_search(sp)
    sp.add_argument("--out", help="CSV path (default stdout)")
    sp.add_argument("--witness-dir", help="directory for witness families")
    sp.set_defaults(func=cmd_sweep)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _threads()
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleConstruction as exc:
        print(f"infeasible construction: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
