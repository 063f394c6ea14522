"""Derivatives as ratios of differentials.

A derivative is found in two steps: take the differential of every
equation, then solve the resulting system for the wanted ratio with plain
algebra.  Each differential monomial (``dx``, ``dy``, ``d2x``, ``dx^2``,
``dx*dy``...) is an opaque unknown; the system is reduced with
fraction-free Gauss-Jordan elimination over expression coefficients.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import expr as ex
from .differentiation import differential
from .errors import (
    HeldTargetConflict, NotLinearInDifferentials, TargetAbsent, UnderdeterminedSystem,
)
from .expr import Assumptions, Diff, Equation, Expr, Mul, Num, Pow, Sym

_MAX_PERMUTED = 5


@dataclass(frozen=True)
class RatioTarget:
    """A first-derivative request such as ``dy/dx``."""

    numerator: Diff
    denominator: Diff

    def __post_init__(self):
        for atom in (self.numerator, self.denominator):
            if not isinstance(atom, Diff) or atom.order != 1:
                raise ValueError(f"ratio targets use first-order differentials, got {atom!r}")
        if self.numerator == self.denominator:
            raise ValueError("numerator and denominator of a ratio must differ")

    @classmethod
    def parse(cls, text: str) -> "RatioTarget":
        from .parser import parse_ratio

        return cls(*parse_ratio(text))

    @classmethod
    def of(cls, target) -> "RatioTarget":
        if isinstance(target, RatioTarget):
            return target
        if isinstance(target, str):
            return cls.parse(target)
        num, den = target
        return cls(num if isinstance(num, Diff) else Diff(num), den if isinstance(den, Diff) else Diff(den))

    def __str__(self) -> str:
        return f"d{self.numerator.base}/d{self.denominator.base}"


@dataclass(frozen=True)
class Solution:
    """A solved ratio plus the divisions it assumed were by nonzero values."""

    expr: Expr
    side_conditions: tuple = ()


# ---------------------------------------------------------------------------
# differential monomial forms


def _is_differential_factor(f: Expr) -> bool:
    if isinstance(f, Diff):
        return True
    return (
        isinstance(f, Pow)
        and isinstance(f.base, Diff)
        and isinstance(f.exp, Num)
        and f.exp.value.denominator == 1
        and f.exp.value > 0
    )


def monomial_form(e: Expr) -> dict:
    """Split a differential expression into ``{monomial: coefficient}``.

    Every term must be a differential-free coefficient times a product of
    differential atoms with positive integer powers.
    """
    form: dict = {}
    terms = e.terms if isinstance(e, ex.Add) else (e,)
    if e == ex.ZERO:
        return form
    for t in terms:
        factors = t.factors if isinstance(t, Mul) else (t,)
        diff_part, coeff_part = [], []
        for f in factors:
            if _is_differential_factor(f):
                diff_part.append(f)
            elif ex.has_diff(f):
                raise NotLinearInDifferentials(f"differentials appear inside {f}")
            else:
                coeff_part.append(f)
        if not diff_part:
            raise NotLinearInDifferentials(f"term {t} has no differential")
        mono = ex.mul(*diff_part)
        form[mono] = ex.add(form.get(mono, ex.ZERO), ex.mul(*coeff_part))
    return {m: c for m, c in form.items() if c != ex.ZERO}


def from_monomial_form(form: dict) -> Expr:
    return ex.add(*(ex.mul(c, m) for m, c in form.items()))


def _combine(a: Expr, r1: dict, b: Expr, r2: dict) -> dict:
    out = {}
    for m in {**r1, **r2}:
        v = ex.add(ex.mul(a, r1.get(m, ex.ZERO)), ex.mul(b, r2.get(m, ex.ZERO)))
        if v != ex.ZERO:
            out[m] = v
    return out


def _rref(rows: list, columns: Sequence) -> dict:
    """Fraction-free Gauss-Jordan elimination.

    Returns ``{pivot column: reduced row}``; a pivot row has zero entries in
    every other pivot column.
    """
    rows = [dict(r) for r in rows]
    used: set = set()
    pivots: dict = {}
    for col in columns:
        cands = [i for i, r in enumerate(rows) if i not in used and col in r]
        if not cands:
            continue
        i = min(cands, key=lambda k: (ex.node_count(rows[k][col]), k))
        used.add(i)
        pivots[col] = i
        p = rows[i][col]
        for j, r in enumerate(rows):
            if j != i and col in r:
                rows[j] = _combine(p, r, ex.mul(ex.NEG_ONE, r[col]), rows[i])
    return {col: rows[i] for col, i in pivots.items()}


def _isolate(row: dict, col: Expr) -> Expr:
    """Solve ``row == 0`` for the monomial ``col``."""
    p = row[col]
    rest = ex.add(*(ex.mul(c, m) for m, c in row.items() if m != col))
    return ex.mul(ex.NEG_ONE, rest, ex.power(p, ex.NEG_ONE))


def _nonzero_condition(p: Expr):
    if isinstance(p, Num):
        return None
    if isinstance(p, Mul) and isinstance(p.factors[0], Num):
        rest = p.factors[1:]
        p = rest[0] if len(rest) == 1 else Mul(rest)
    return f"{p} != 0"


def _as_equations(eqs) -> list:
    from .parser import parse_equation

    if isinstance(eqs, (Equation, str)):
        eqs = [eqs]
    return [parse_equation(e) if isinstance(e, str) else e for e in eqs]


def _differentiated_rows(eqs: Iterable[Equation], a: Assumptions, held: Iterable[str] = ()) -> list:
    zeroed = {Diff(s, 1): ex.ZERO for s in held}
    rows = []
    for eq in eqs:
        d = differential(eq, a).residual()
        if zeroed:
            d = ex.substitute(d, zeroed)
        form = monomial_form(d)
        if form:
            rows.append(form)
    return rows


def _leftover_atoms(e: Expr, den: Diff) -> int:
    return len({n for n in ex.walk(e) if isinstance(n, Diff) and n != den})


# ---------------------------------------------------------------------------
# public operations


def solve(eqs, target, assumptions: Assumptions = None, held: Iterable = ()) -> Solution:
    """Solve the differentiated system for a ratio of differentials.

    Other differentials that cannot be eliminated stay in the answer as
    ratios over the target's denominator (``dx/dz``).  When the denominator
    does not occur at all, this amounts to dividing every equation by it,
    as in related-rates problems.
    """
    a = assumptions or Assumptions()
    target = RatioTarget.of(target)
    num, den = target.numerator, target.denominator
    held = [h.name if isinstance(h, Sym) else h for h in held]
    rows = _differentiated_rows(_as_equations(eqs), a, held)
    monos = set().union(*rows) if rows else set()
    if num not in monos:
        raise TargetAbsent(f"{num} does not occur linearly in the differentiated equations")

    others = sorted(monos - {num, den}, key=ex.sort_key)
    tail = [den] if den in monos else []
    orders = itertools.permutations(others) if len(others) <= _MAX_PERMUTED else [others]
    best = None
    for order in orders:
        reduced = _rref(rows, [num, *order, *tail])
        row = reduced[num]
        ratio = ex.mul(_isolate(row, num), ex.power(den, ex.NEG_ONE))
        score = (_leftover_atoms(ratio, den), ex.node_count(ratio))
        if best is None or score < best[0]:
            best = (score, ratio, row[num])
    _, ratio, pivot = best
    if any(isinstance(n, Diff) and n == num for n in ex.walk(ratio)):
        raise UnderdeterminedSystem(f"cannot isolate {target}")
    cond = _nonzero_condition(pivot)
    return Solution(ratio, (cond,) if cond else ())


def solve_for_ratio(eqs, target, assumptions: Assumptions = None) -> Expr:
    """Derivative ``target`` (e.g. ``"dy/dx"``) implied by the equations.

    >>> from leibniz import parse_equation
    >>> print(solve_for_ratio(parse_equation("x*y = 5"), "dy/dx"))
    -(y/x)
    """
    return solve(eqs, target, assumptions).expr


def partial_ratio(eq, target, held, assumptions: Assumptions = None) -> Expr:
    """Partial derivative: the ratio with the differentials of ``held`` set to 0."""
    target = RatioTarget.of(target)
    held = {h.name if isinstance(h, Sym) else h for h in held}
    clash = held & {target.numerator.base, target.denominator.base}
    if clash:
        raise HeldTargetConflict(f"cannot hold {', '.join(sorted(clash))} constant in {target}")
    result = solve(eq, target, assumptions, held=held).expr
    leftovers = sorted(
        {str(n) for n in ex.walk(result) if isinstance(n, Diff)} - {str(target.denominator)}
    )
    if leftovers:
        raise UnderdeterminedSystem(
            f"{target} still depends on {', '.join(leftovers)}; hold more variables constant"
        )
    return result


def second_derivative(
    eqs,
    dependent,
    independent,
    assumptions: Assumptions = None,
    resolve: bool = True,
) -> Expr:
    """Derivative of the derivative: ``d2y/dx^2 - (dy/dx)*(d2x/dx^2)``.

    With ``resolve=False`` only the first derivative is substituted, which
    leaves the bare second-differential ratios visible.  With
    ``resolve=True`` every differential is expressed through the
    equations' first and second differentials; the differentials of
    independent variables (or ``dx`` when none are declared) are kept as
    the free ones and cancel out of the final ratio.
    """
    a = assumptions or Assumptions()
    eqs = _as_equations(eqs)
    y = dependent.name if isinstance(dependent, Sym) else dependent
    x = independent.name if isinstance(independent, Sym) else independent
    dy, dx, d2y, d2x = Diff(y), Diff(x), Diff(y, 2), Diff(x, 2)
    vanishing = {Diff(s, 2): ex.ZERO for s in a.independent}

    if not resolve:
        first = solve_for_ratio(eqs, RatioTarget(dy, dx), a)
        form = ex.add(
            ex.mul(d2y, ex.power(dx, Num(-2))),
            ex.mul(ex.NEG_ONE, first, d2x, ex.power(dx, Num(-2))),
        )
        return ex.substitute(form, vanishing)

    first_rows = _differentiated_rows(eqs, a)
    atoms = set().union(*first_rows) if first_rows else set()
    if dy not in atoms:
        raise TargetAbsent(f"{dy} does not occur in the differentiated equations")
    for m in atoms:
        if not (isinstance(m, Diff) and m.order == 1):
            raise NotLinearInDifferentials(f"unexpected differential monomial {m}")
    base = sorted((m for m in atoms if m.base in a.independent), key=ex.sort_key) or [dx]
    cols = sorted(atoms - set(base), key=ex.sort_key) + base
    reduced = _rref(first_rows, cols)
    first_order = {col: _isolate(row, col) for col, row in reduced.items()}

    second_rows = []
    for eq in eqs:
        d2 = differential(differential(eq, a), a).residual()
        form = monomial_form(ex.substitute(d2, first_order))
        if form:
            second_rows.append(form)
    unknown = sorted(
        (Diff(m.base, 2) for m in first_order if m.base not in a.independent),
        key=ex.sort_key,
    )
    monos2 = set().union(*second_rows) if second_rows else set()
    cols2 = [u for u in unknown if u in monos2]
    cols2 += sorted(monos2 - set(cols2), key=ex.sort_key)
    reduced2 = _rref(second_rows, cols2)
    second_order = {col: _isolate(row, col) for col, row in reduced2.items() if col in unknown}

    form = ex.add(
        ex.mul(d2y, ex.power(dx, Num(-2))),
        ex.mul(ex.NEG_ONE, dy, d2x, ex.power(dx, Num(-3))),
    )
    return ex.substitute(form, {**vanishing, **first_order, **second_order})
