"""Supersaturation for generalized Johnson graphs G(n, k, t).

Vertices of G(n, k, t) are the k-subsets of [n], joined when they share
exactly t elements. rho(ell) is the fewest edges induced by ell vertices.
"""

from .errors import BudgetExceeded, InfeasibleConstruction, SandwichInconsistency, UsageError
from .setfam import Family, KSet, Params, count_t_pairs, read_family, shadow, write_family
from .johnson import alpha, johnson_params
from .solver import SolveResult, rho_exact, rho_local_search
from .bounds import BoundReport, sandwich

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "BudgetExceeded", "Family", "InfeasibleConstruction", "KSet", "Params",
    "SandwichInconsistency", "SolveResult", "UsageError", "alpha", "count_t_pairs",
    "johnson_params", "read_family", "rho_exact", "rho_local_search", "sandwich", "shadow",
    "write_family",
]
