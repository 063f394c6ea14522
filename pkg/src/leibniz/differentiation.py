"""The differential operator.

``differential`` maps an expression to its total differential.  No variable
is special: every symbol ``s`` contributes through its own atom ``ds``, and
a differential atom differentiates to the next order (``d(dx) = d2x``)
unless its base is declared independent, in which case it vanishes.

Rules, tried in this order (first match wins):

==========================  ============================================
node                        differential
==========================  ============================================
number, named constant      0
symbol ``s``                ``ds``
atom ``d^k s``              ``d^(k+1) s``, or 0 when ``s`` is independent
sum                         sum of differentials
product                     product rule, one term per factor; quotients
                            are products with a ``^-1`` factor
``u^v``, ``v`` constant     ``v*u^(v-1)*du``
``u^v``, ``u`` constant     ``ln(u)*u^v*dv`` (``e^v`` gives ``e^v*dv``)
``u^v``, both varying       ``v*u^(v-1)*du + ln(u)*u^v*dv``; ``u`` must be
                            known positive
``sin``, ``cos``, ``tan``   ``cos(u)*du``, ``-sin(u)*du``, ``du/cos(u)^2``
``ln``                      ``du/u``
``abs``                     error: no rule
deferred ``d^k(u)``         evaluated first, then differentiated
==========================  ============================================

``sqrt`` and ``exp`` need no rules of their own: normalization stores them
as powers.
"""

from __future__ import annotations

from . import expr as ex
from .errors import NonPositiveBase, UnsupportedNode
from .expr import (
    Add, Assumptions, Const, Deferred, Diff, Equation, Expr, Func, Mul, Num, Pow, Sym,
)

_NO_ASSUMPTIONS = Assumptions()


def is_positive(e: Expr, assumptions: Assumptions = _NO_ASSUMPTIONS) -> bool:
    """Conservative positivity test used by the generalized power rule."""
    if ex.is_positive_constant(e):
        return True
    if isinstance(e, Sym):
        return e.name in assumptions.positive
    if isinstance(e, Pow):
        return is_positive(e.base, assumptions)
    if isinstance(e, (Mul, Add)):
        parts = e.factors if isinstance(e, Mul) else e.terms
        return all(is_positive(p, assumptions) for p in parts)
    return False


def differential(e, assumptions: Assumptions = None):
    """Total differential of an expression, or of both sides of an equation.

    >>> from leibniz import parse_expr
    >>> print(differential(parse_expr("x^3")))
    3*x^2*dx
    """
    a = assumptions or _NO_ASSUMPTIONS
    if isinstance(e, Equation):
        return Equation(_d(e.lhs, a), _d(e.rhs, a))
    return _d(ex.normalize(ex.as_expr(e)), a)


def nth_differential(e, n: int, assumptions: Assumptions = None):
    """Apply the differential ``n`` times, normalizing in between."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"order must be a positive integer, got {n!r}")
    for _ in range(n):
        e = differential(e, assumptions)
    return e


def resolve(e, assumptions: Assumptions = None):
    """Replace every deferred ``d^k(...)`` node by its evaluated differential."""
    a = assumptions or _NO_ASSUMPTIONS
    if isinstance(e, Equation):
        return Equation(resolve(e.lhs, a), resolve(e.rhs, a))
    if isinstance(e, Deferred):
        return nth_differential(resolve(e.arg, a), e.order, a)
    if isinstance(e, Add):
        return ex.add(*(resolve(t, a) for t in e.terms))
    if isinstance(e, Mul):
        return ex.mul(*(resolve(f, a) for f in e.factors))
    if isinstance(e, Pow):
        return ex.power(resolve(e.base, a), resolve(e.exp, a))
    if isinstance(e, Func):
        return ex.func(e.name, resolve(e.arg, a))
    return e


def _d(e: Expr, a: Assumptions) -> Expr:
    if isinstance(e, (Num, Const)):
        return ex.ZERO
    if isinstance(e, Sym):
        return Diff(e.name, 1)
    if isinstance(e, Diff):
        if e.base in a.independent:
            return ex.ZERO
        return Diff(e.base, e.order + 1)
    if isinstance(e, Add):
        return ex.add(*(_d(t, a) for t in e.terms))
    if isinstance(e, Mul):
        fs = e.factors
        return ex.add(*(ex.mul(*fs[:i], *fs[i + 1 :], _d(f, a)) for i, f in enumerate(fs)))
    if isinstance(e, Pow):
        return _d_power(e.base, e.exp, a)
    if isinstance(e, Func):
        return _d_func(e, a)
    if isinstance(e, Deferred):
        return _d(resolve(e, a), a)
    raise TypeError(f"not an expression: {e!r}")


def _d_power(u: Expr, v: Expr, a: Assumptions) -> Expr:
    if ex.is_constant(v):
        return ex.mul(v, ex.power(u, ex.add(v, ex.NEG_ONE)), _d(u, a))
    if not is_positive(u, a):
        raise NonPositiveBase(
            f"d({ex.power(u, v)}) needs {u} > 0; declare it positive to use the generalized power rule"
        )
    uv = ex.power(u, v)
    dv_term = ex.mul(ex.func("ln", u), uv, _d(v, a))
    if ex.is_constant(u):
        return dv_term
    du_term = ex.mul(v, ex.power(u, ex.add(v, ex.NEG_ONE)), _d(u, a))
    return ex.add(du_term, dv_term)


def _d_func(e: Func, a: Assumptions) -> Expr:
    u = e.arg
    if e.name == "abs":
        raise UnsupportedNode("abs has no differential rule")
    du = _d(u, a)
    if e.name == "sin":
        return ex.mul(ex.func("cos", u), du)
    if e.name == "cos":
        return ex.mul(ex.NEG_ONE, ex.func("sin", u), du)
    if e.name == "tan":
        return ex.mul(ex.power(ex.func("cos", u), Num(-2)), du)
    if e.name == "ln":
        return ex.mul(ex.power(u, ex.NEG_ONE), du)
    raise UnsupportedNode(f"no differential rule for {e.name}")
