"""Calculus built on the differential.

Differentials are first-class algebraic objects: take ``d`` of an equation,
then solve for whichever ratio of differentials you want.  Limits come
from truncated ε-series and integrals from sums of infinitely many slices.
"""

from .differentiation import differential, is_positive, nth_differential, resolve
from .errors import LeibnizError
from .expr import (
    Assumptions, Diff, Equation, Expr, Num, Sym, exact_value, normalize, numeric, substitute, symbols,
)
from .hyperreal import Hyperreal, LimitKind, LimitResult, Side, hr_eval, limit, slope_at, std_part
from .parser import ParseError, format_expr, from_json, parse, parse_equation, parse_expr, to_json
from .solver import RatioTarget, Solution, partial_ratio, second_derivative, solve, solve_for_ratio
from .summation import (
    Potential, SumResult, SumSpec, antidifferential, infinite_sum, total_difference,
)

__all__ = [
    "Assumptions", "Diff", "Equation", "Expr", "Hyperreal", "LeibnizError", "LimitKind",
    "LimitResult", "Num", "ParseError", "Potential", "RatioTarget", "Side", "Solution",
    "SumResult", "SumSpec", "Sym", "antidifferential", "differential", "exact_value",
    "format_expr", "from_json", "hr_eval", "infinite_sum", "is_positive", "limit",
    "normalize", "nth_differential", "numeric", "parse", "parse_equation", "parse_expr",
    "partial_ratio", "resolve", "second_derivative", "slope_at", "solve", "solve_for_ratio",
    "std_part", "substitute", "symbols", "to_json", "total_difference",
]
