"""Integrals as infinite sums.

Two routes:

* exact: ``antidifferential`` turns an exact 1-form ``P dx + Q dy + ...``
  into a potential ``F`` with ``dF`` equal to the form, and
  ``total_difference`` sums the form along any path as ``F(to) - F(from)``;
* numeric: ``infinite_sum`` adds up the slices of a per-slice formula
  such as ``pi*y^2*dx`` or ``sqrt(dx^2 + dy^2)`` along a curve ``y = f(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import expr as ex
from .differentiation import differential
from .errors import (
    NoConvergence, NotExact, NotLinearInDifferentials, SingularIntegrand, UnboundSymbol, Unmatched,
)
from .expr import Add, Assumptions, Diff, Equation, Expr, Func, Mul, Pow, Sym
from .solver import monomial_form, partial_ratio, solve_for_ratio

DEFAULT_TOLERANCE = 1e-8
START_SLICES = 1024
MAX_DOUBLINGS = 20
_CHUNK = 1 << 20
_SEED = 20240611


@dataclass(frozen=True)
class Potential:
    """``expr + C``: a function whose differential is the originating form."""

    expr: Expr

    def as_expr(self) -> Expr:
        return ex.add(self.expr, ex.C)

    def __str__(self) -> str:
        return "C" if self.expr == ex.ZERO else f"{self.expr} + C"


# ---------------------------------------------------------------------------
# exact forms


def form_coefficients(form) -> dict:
    """``{symbol name: coefficient}`` of a degree-1 form."""
    if isinstance(form, str):
        from .parser import parse_expr

        form = parse_expr(form)
    coeffs = {}
    for mono, c in monomial_form(ex.normalize(ex.as_expr(form))).items():
        if not (isinstance(mono, Diff) and mono.order == 1):
            raise NotLinearInDifferentials(f"{mono} is not a first-order differential; forms must have degree 1")
        coeffs[mono.base] = c
    return coeffs


def _sample_points(names, k=6):
    rng = np.random.default_rng(_SEED)
    return [{n: float(v) for n, v in zip(names, rng.uniform(0.3, 2.0, len(names)))} for _ in range(k)]


def _vanishes(e: Expr, names) -> bool:
    """Structural zero test with a numeric fallback at random positive points."""
    e = ex.normalize(e)
    if e == ex.ZERO:
        return True
    free = sorted(s.name for s in ex.free_symbols(e))
    try:
        for env in _sample_points(free):
            v = float(ex.numeric(e, env))
            if not np.isfinite(v) or abs(v) > 1e-9:
                return False
    except (ValueError, ZeroDivisionError, UnboundSymbol):
        return False
    return True


def _partial(coeff: Expr, wrt: str, names, a: Assumptions) -> Expr:
    """∂coeff/∂wrt via the solver: differentiate ``w = coeff`` holding the rest."""
    w = "w"
    while w in names:
        w += "_"
    held = [n for n in names if n != wrt]
    return partial_ratio(Equation(Sym(w), coeff), (Diff(w), Diff(wrt)), held, a)


def _linear_in(u: Expr, s: Sym):
    """``(a, b)`` with ``u == a*s + b`` and ``a, b`` free of ``s``, else None."""
    b = ex.substitute(u, {s: ex.ZERO})
    a = ex.add(ex.substitute(u, {s: ex.ONE}), ex.mul(ex.NEG_ONE, b))
    if s in ex.free_symbols(a) or s in ex.free_symbols(b) or a == ex.ZERO:
        return None
    if ex.normalize(ex.add(ex.mul(a, s), b)) != u:
        return None
    return a, b


def _integrate_factor(g: Expr, s: Sym):
    """Antiderivative of a single ``s``-dependent factor, or None."""
    inv = ex.NEG_ONE
    if isinstance(g, Sym):
        g = Pow(g, ex.ONE)
    if isinstance(g, Pow):
        base, n = g.base, g.exp
        if s not in ex.free_symbols(n):
            lin = _linear_in(base, s)
            if lin is None:
                return None
            a, _ = lin
            if n == ex.NEG_ONE:
                return ex.mul(ex.ln(base), ex.power(a, inv))
            n1 = ex.add(n, ex.ONE)
            return ex.mul(ex.power(base, n1), ex.power(ex.mul(n1, a), inv))
        if s not in ex.free_symbols(base) and ex.is_positive_constant(base):
            lin = _linear_in(n, s)
            if lin is None:
                return None
            a, _ = lin
            scale = a if base == ex.E else ex.mul(a, ex.ln(base))
            return ex.mul(g, ex.power(scale, inv))
        return None
    if isinstance(g, Func) and g.name in ("sin", "cos"):
        lin = _linear_in(g.arg, s)
        if lin is None:
            return None
        a, _ = lin
        if g.name == "sin":
            return ex.mul(ex.NEG_ONE, ex.cos(g.arg), ex.power(a, inv))
        return ex.mul(ex.sin(g.arg), ex.power(a, inv))
    return None


def integrate_single(e: Expr, s) -> Expr:
    """Antiderivative of ``e`` in the one variable ``s`` (others constant).

    Handles sums of ``constant * g(s)`` where ``g`` is a power of a linear
    expression, an exponential of a linear argument, or ``sin``/``cos`` of
    one; raises :class:`Unmatched` otherwise.
    """
    s = s if isinstance(s, Sym) else Sym(s)
    e = ex.normalize(e)
    terms = e.terms if isinstance(e, Add) else (e,)
    out = []
    for t in terms:
        factors = t.factors if isinstance(t, Mul) else (t,)
        const = [f for f in factors if s not in ex.free_symbols(f)]
        varying = [f for f in factors if s in ex.free_symbols(f)]
        if not varying:
            out.append(ex.mul(t, s))
            continue
        anti = _integrate_factor(varying[0], s) if len(varying) == 1 else None
        if anti is None:
            raise Unmatched(f"no reverse rule for {t} in d{s.name}")
        out.append(ex.mul(*const, anti))
    return ex.add(*out)


def is_exact(form, assumptions: Assumptions = None) -> bool:
    """Mixed-partials test ``∂P/∂y == ∂Q/∂x`` for every pair of variables."""
    a = assumptions or Assumptions()
    coeffs = form_coefficients(form)
    names = sorted(set(coeffs) | {s.name for c in coeffs.values() for s in ex.free_symbols(c)})
    for i, x in enumerate(names):
        for y in names[i + 1 :]:
            p = coeffs.get(x, ex.ZERO)
            q = coeffs.get(y, ex.ZERO)
            lhs = _partial(p, y, names, a)
            rhs = _partial(q, x, names, a)
            if not _vanishes(ex.add(lhs, ex.mul(ex.NEG_ONE, rhs)), names):
                return False
    return True


def antidifferential(form, assumptions: Assumptions = None) -> Potential:
    """Potential of an exact form.

    >>> from leibniz import parse_expr
    >>> print(antidifferential(parse_expr("x*dy + y*dx")))
    x*y + C
    """
    a = assumptions or Assumptions()
    coeffs = form_coefficients(form)
    if not is_exact(form, a):
        raise NotExact(f"{form} is not the differential of any function")
    names = sorted(set(coeffs) | {s.name for c in coeffs.values() for s in ex.free_symbols(c)})
    potential = ex.ZERO
    for name in names:
        have = form_coefficients(differential(potential, a)).get(name, ex.ZERO) if potential != ex.ZERO else ex.ZERO
        rest = ex.add(coeffs.get(name, ex.ZERO), ex.mul(ex.NEG_ONE, have))
        if rest != ex.ZERO:
            potential = ex.add(potential, integrate_single(rest, name))
    form_expr = ex.add(*(ex.mul(c, Diff(n)) for n, c in coeffs.items()))
    check = ex.add(differential(potential, a), ex.mul(ex.NEG_ONE, form_expr))
    residual = form_coefficients(check) if check != ex.ZERO else {}
    if not all(_vanishes(c, names) for c in residual.values()):
        raise Unmatched(f"could not find a potential for {form}")
    return Potential(potential)


def _point_env(point: Mapping) -> dict:
    return {(k.name if isinstance(k, Sym) else k): v for k, v in point.items()}


def evaluate_at(e: Expr, point: Mapping):
    """Exact value where possible, otherwise a float."""
    env = _point_env(point)
    missing = sorted(s.name for s in ex.free_symbols(e) if s.name not in env)
    if missing:
        raise UnboundSymbol(f"no value bound for {', '.join(missing)}")
    try:
        return ex.exact_value(e, {k: Fraction(v) for k, v in env.items()})
    except (ValueError, TypeError):
        return float(ex.numeric(e, {k: float(v) for k, v in env.items()}))


def total_difference(p, frm: Mapping, to: Mapping):
    """Sum of the form along any path from ``frm`` to ``to``: ``F(to) - F(frm)``."""
    e = p.expr if isinstance(p, Potential) else ex.as_expr(p)
    return evaluate_at(e, to) - evaluate_at(e, frm)


# ---------------------------------------------------------------------------
# numeric infinite sums


@dataclass(frozen=True)
class SumSpec:
    """A per-slice formula summed over ``parameter`` from ``lower`` to ``upper``.

    ``curve`` is an explicit equation ``y = f(x)``; it supplies both ``y``
    and, through the solver, ``dy = (dy/dx)*dx``.
    """

    integrand: Expr
    parameter: str
    lower: float
    upper: float
    curve: Equation = None

    def __post_init__(self):
        if isinstance(self.integrand, str):
            from .parser import parse_expr

            object.__setattr__(self, "integrand", parse_expr(self.integrand))
        if isinstance(self.curve, str):
            from .parser import parse_equation

            object.__setattr__(self, "curve", parse_equation(self.curve))
        if isinstance(self.parameter, Sym):
            object.__setattr__(self, "parameter", self.parameter.name)


@dataclass(frozen=True)
class SumResult:
    value: float
    slices: int
    error_estimate: float


def slice_coefficient(spec: SumSpec) -> Expr:
    """The integrand rewritten as ``g(x)`` with the slice written ``g(x)*dx``."""
    x = Sym(spec.parameter)
    dx = Diff(spec.parameter)
    e = spec.integrand
    if spec.curve is not None:
        y = spec.curve.lhs
        if not isinstance(y, Sym) or y == x:
            raise ValueError("curve must be written explicitly as y = f(x)")
        f = spec.curve.rhs
        slope = ex.substitute(solve_for_ratio(spec.curve, (Diff(y.name), dx)), {y: f})
        e = ex.substitute(e, {y: f, Diff(y.name): ex.mul(slope, dx)})
    g = ex.substitute(e, {dx: ex.ONE})
    if ex.has_diff(g):
        raise NotLinearInDifferentials(f"slices of {spec.integrand} involve differentials other than {dx}")
    others = sorted(s.name for s in ex.free_symbols(g) if s != x)
    if others:
        raise UnboundSymbol(f"no value bound for {', '.join(others)}")
    # the slice must scale like dx (degree-1 homogeneity for dx > 0)
    probe = np.linspace(float(spec.lower), float(spec.upper), 7)[1:-1]
    with np.errstate(all="ignore"):
        base = np.broadcast_to(ex.numeric(g, {x.name: probe}), probe.shape)
        for t in (0.5, 2.0):
            scaled = ex.numeric(e, {x.name: probe, dx: np.full_like(probe, t)})
            if not np.allclose(scaled, t * base, rtol=1e-9, atol=1e-12, equal_nan=True):
                raise NotLinearInDifferentials(f"{spec.integrand} does not scale like d{x.name}")
    return g


def _midpoint(f, a: float, b: float, n: int) -> float:
    h = (b - a) / n
    total = 0.0
    for start in range(0, n, _CHUNK):
        idx = np.arange(start, min(n, start + _CHUNK), dtype=float)
        with np.errstate(all="ignore"):
            vals = np.broadcast_to(f(a + (idx + 0.5) * h), idx.shape)
        if not np.all(np.isfinite(vals)):
            raise SingularIntegrand("integrand is not finite on the range")
        total += float(np.sum(vals))
    return total * h


def infinite_sum(spec: SumSpec, tolerance: float = DEFAULT_TOLERANCE, full_output: bool = False):
    """Sum infinitely many infinitely thin slices.

    Midpoint sums with ``n, 2n, ...`` slices (from ``n = 1024``), each pair
    combined by one Richardson step; stops when two successive extrapolated
    values are within ``tolerance``.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    g = slice_coefficient(spec)
    name = spec.parameter
    a, b = float(spec.lower), float(spec.upper)

    def f(xs):
        return ex.numeric(g, {name: xs})

    if a == b:
        return SumResult(0.0, 0, 0.0) if full_output else 0.0
    n = START_SLICES
    # midpoints never touch the interior grid nodes, so probe them for poles
    nodes = a + np.arange(1, n) * ((b - a) / n)
    with np.errstate(all="ignore"):
        if not np.all(np.isfinite(np.broadcast_to(f(nodes), nodes.shape))):
            raise SingularIntegrand("integrand is not finite on the range")
    coarse = _midpoint(f, a, b, n)
    previous = None
    for _ in range(MAX_DOUBLINGS):
        fine = _midpoint(f, a, b, 2 * n)
        extrapolated = (4 * fine - coarse) / 3
        if previous is not None and abs(extrapolated - previous) <= tolerance:
            err = abs(extrapolated - previous)
            return SumResult(extrapolated, 2 * n, err) if full_output else extrapolated
        previous, coarse, n = extrapolated, fine, 2 * n
    raise NoConvergence(f"no agreement within {tolerance} after {MAX_DOUBLINGS} doublings")
