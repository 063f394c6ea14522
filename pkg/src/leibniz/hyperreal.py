"""Truncated ε-series and limits by substitution.

A :class:`Hyperreal` is a finite sum ``Σ c_k ε^k`` with exact rational
coefficients (or floats once an irrational standard part enters).  Terms
above the truncation order ``N`` are discarded.  Each value remembers its
*precision* ``p``: coefficients of ``ε^k`` for ``k < p`` are correct and
everything from ``ε^p`` up is unknown.  Exact values have ``p = None``.

A limit is taken by replacing ``x`` with ``a + ε`` (right), ``a - ε``
(left) or ``1/ε`` (plus infinity), evaluating, and reading off the
standard part.

Float coefficients below ``FLOAT_ZERO`` times the largest coefficient are
treated as exact zeros, so that e.g. ``sin(pi)`` cancels.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

from . import expr as ex
from .errors import DomainEdge, OrderExhausted, SeriesZeroDivision, UnboundSymbol, UnsupportedNode
from .expr import Add, Const, Deferred, Diff, Expr, Func, Mul, Num, Pow, Sym

DEFAULT_ORDER = 8
FLOAT_ZERO = 1e-12

Coefficient = Union[Fraction, float]


def _min_prec(*ps):
    known = [p for p in ps if p is not None]
    return min(known) if known else None


@dataclass(frozen=True)
class Hyperreal:
    terms: tuple = ()  # ((exponent, coefficient), ...) sorted, nonzero
    order: int = DEFAULT_ORDER
    precision: int = None

    # construction ----------------------------------------------------------

    @classmethod
    def make(cls, coeffs: Mapping, order: int = DEFAULT_ORDER, precision=None) -> "Hyperreal":
        """Build a value, applying the window and precision cut-offs."""
        items = {}
        for k, c in coeffs.items():
            if not isinstance(c, float):
                c = Fraction(c)
            if c != 0:
                items[int(k)] = c
        if any(k > order for k in items):
            precision = _min_prec(precision, order + 1)
        if precision is not None:
            items = {k: c for k, c in items.items() if k < precision}
        if any(isinstance(c, float) for c in items.values()):
            scale = max(1.0, max(abs(float(c)) for c in items.values()))
            items = {k: c for k, c in items.items() if abs(c) > FLOAT_ZERO * scale}
        return cls(tuple(sorted(items.items())), order, precision)

    @classmethod
    def real(cls, value, order: int = DEFAULT_ORDER) -> "Hyperreal":
        return cls.make({0: value}, order)

    @classmethod
    def eps(cls, order: int = DEFAULT_ORDER, power: int = 1) -> "Hyperreal":
        return cls.make({power: 1}, order)

    # inspection ------------------------------------------------------------

    @property
    def coefficients(self) -> dict:
        return dict(self.terms)

    def coefficient(self, k: int) -> Coefficient:
        return self.coefficients.get(k, Fraction(0))

    @property
    def leading_exponent(self):
        """Smallest exponent with a known nonzero coefficient, or None."""
        return self.terms[0][0] if self.terms else None

    @property
    def is_exact_zero(self) -> bool:
        return not self.terms and self.precision is None

    @property
    def inexact(self) -> bool:
        return any(isinstance(c, float) for _, c in self.terms)

    @property
    def truncated(self) -> bool:
        return self.precision is not None

    def is_infinite(self) -> bool:
        return self.leading_exponent is not None and self.leading_exponent < 0

    def is_infinitesimal(self) -> bool:
        lead = self.leading_exponent
        return (lead is None or lead > 0) and not self.is_infinite()

    def agrees_with(self, other: "Hyperreal") -> bool:
        """Equal on every exponent both values know exactly."""
        p = _min_prec(self.precision, other.precision)
        a, b = self.coefficients, other.coefficients
        keys = {k for k in a.keys() | b.keys() if p is None or k < p}
        return all(a.get(k, 0) == b.get(k, 0) for k in keys)

    def infinitesimal_part(self) -> "Hyperreal":
        return Hyperreal.make({k: c for k, c in self.terms if k > 0}, self.order, self.precision)

    # arithmetic ------------------------------------------------------------

    def _lift(self, other) -> "Hyperreal":
        if isinstance(other, Hyperreal):
            return other
        if isinstance(other, (int, Fraction, float)):
            return Hyperreal.real(other, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = self.coefficients
        for k, c in other.terms:
            out[k] = out.get(k, 0) + c
        return Hyperreal.make(out, min(self.order, other.order), _min_prec(self.precision, other.precision))

    __radd__ = __add__

    def __neg__(self):
        return Hyperreal.make({k: -c for k, c in self.terms}, self.order, self.precision)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for ka, ca in self.terms:
            for kb, cb in other.terms:
                out[ka + kb] = out.get(ka + kb, 0) + ca * cb
        la, lb = self.leading_exponent, other.leading_exponent
        cands = []
        if self.precision is not None:
            cands.append(self.precision + (lb if lb is not None else other.precision or 0))
        if other.precision is not None:
            cands.append(other.precision + (la if la is not None else self.precision or 0))
        if self.is_exact_zero or other.is_exact_zero:
            cands = []
        return Hyperreal.make(out, min(self.order, other.order), _min_prec(*cands))

    __rmul__ = __mul__

    def inverse(self) -> "Hyperreal":
        if self.is_exact_zero:
            raise SeriesZeroDivision("division by the zero series")
        if not self.terms:
            raise OrderExhausted("every coefficient in the window cancelled")
        k, c = self.terms[0]
        lead_inv = Hyperreal.make({-k: 1 / c}, self.order)
        r = self * lead_inv - 1  # infinitesimal relative remainder
        series = _power_series([(-1) ** n for n in range(self.order + 1)], r, self.order)
        return lead_inv * series

    def __truediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n):
        if isinstance(n, int) or (isinstance(n, Fraction) and n.denominator == 1):
            n = int(n)
            if n < 0:
                return self.inverse() ** (-n)
            out = Hyperreal.real(1, self.order)
            base = self
            while n:
                if n & 1:
                    out = out * base
                base = base * base
                n >>= 1
            return out
        if isinstance(n, Fraction):
            return _rational_power(self, n)
        return NotImplemented

    # display ---------------------------------------------------------------

    def __str__(self) -> str:
        parts = []
        for k, c in self.terms:
            mag = abs(c)
            sign = "-" if c < 0 else "+"
            if k == 0:
                body = _num_str(mag)
            else:
                mono = "eps" if k == 1 else f"eps^{k}" if k > 0 else f"eps^({k})"
                body = mono if mag == 1 else f"{_num_str(mag)}*{mono}"
            parts.append((sign, body))
        if not parts:
            text = "0"
        else:
            first_sign, first = parts[0]
            text = ("-" if first_sign == "-" else "") + first
            text += "".join(f" {s} {b}" for s, b in parts[1:])
        if self.precision is not None:
            text += f" + O(eps^{self.precision})" if self.precision >= 0 else f" + O(eps^({self.precision}))"
        return text


def _num_str(c) -> str:
    if isinstance(c, float):
        return repr(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"({c.numerator}/{c.denominator})"


def _power_series(coeffs, r: Hyperreal, order: int) -> Hyperreal:
    """``Σ coeffs[n] r^n`` for infinitesimal ``r``, with remainder O(ε^(N+1))."""
    out = Hyperreal.real(coeffs[0], order)
    if r.is_exact_zero:
        return out
    term = Hyperreal.real(1, order)
    for c in coeffs[1:]:
        term = term * r
        if not term.terms and term.precision is None:
            break
        if c:
            out = out + term * c
    lead = r.leading_exponent if r.leading_exponent is not None else 1
    rem = lead * len(coeffs)
    return Hyperreal.make(out.coefficients, order, _min_prec(out.precision, rem))


def _binomial(alpha: Fraction, n: int) -> Fraction:
    out = Fraction(1)
    for i in range(n):
        out = out * (alpha - i) / (i + 1)
    return out


def _rational_power(h: Hyperreal, alpha: Fraction) -> Hyperreal:
    if h.is_exact_zero:
        if alpha > 0:
            return h
        raise SeriesZeroDivision("zero to a negative power")
    if not h.terms:
        raise OrderExhausted("every coefficient in the window cancelled")
    k, c = h.terms[0]
    shift = k * alpha
    if shift.denominator != 1:
        raise DomainEdge(f"eps^({shift}) is not an integer power of eps")
    q = alpha.denominator
    if c < 0 and q % 2 == 0:
        raise DomainEdge("even root of a negative value")
    root = None
    if isinstance(c, Fraction):
        root = ex.exact_root(abs(c), q)
    if root is not None:
        mag = root ** alpha.numerator
    else:
        mag = float(abs(c)) ** float(alpha)
    lead_val = -mag if (c < 0 and alpha.numerator % 2) else mag
    r = h * Hyperreal.make({-k: 1 / c}, h.order) - 1
    series = _power_series([_binomial(alpha, n) for n in range(h.order + 1)], r, h.order)
    return Hyperreal.make({int(shift): lead_val}, h.order) * series


# ---------------------------------------------------------------------------
# transcendental functions by Taylor expansion about the standard part


def _split(h: Hyperreal, name: str):
    if h.is_infinite():
        raise DomainEdge(f"{name} of an infinite value is not an eps-series")
    if h.precision is not None and h.precision <= 0:
        raise OrderExhausted("standard part lost to truncation")
    return h.coefficient(0), h.infinitesimal_part()


def _exp_coeffs(n):
    return [Fraction(1, math.factorial(i)) for i in range(n + 1)]


def _sin_coeffs(n):
    return [Fraction((-1) ** (i // 2), math.factorial(i)) if i % 2 else Fraction(0) for i in range(n + 1)]


def _cos_coeffs(n):
    return [Fraction((-1) ** (i // 2), math.factorial(i)) if i % 2 == 0 else Fraction(0) for i in range(n + 1)]


def _ln1p_coeffs(n):
    return [Fraction(0)] + [Fraction((-1) ** (i + 1), i) for i in range(1, n + 1)]


def hr_exp(h: Hyperreal) -> Hyperreal:
    a, d = _split(h, "exp")
    base = Fraction(1) if a == 0 else math.exp(a)
    return _power_series(_exp_coeffs(h.order), d, h.order) * base


def hr_sin(h: Hyperreal) -> Hyperreal:
    a, d = _split(h, "sin")
    s = _power_series(_sin_coeffs(h.order), d, h.order)
    if a == 0:
        return s
    c = _power_series(_cos_coeffs(h.order), d, h.order)
    return c * math.sin(a) + s * math.cos(a)


def hr_cos(h: Hyperreal) -> Hyperreal:
    a, d = _split(h, "cos")
    c = _power_series(_cos_coeffs(h.order), d, h.order)
    if a == 0:
        return c
    s = _power_series(_sin_coeffs(h.order), d, h.order)
    return c * math.cos(a) - s * math.sin(a)


def hr_ln(h: Hyperreal) -> Hyperreal:
    a, d = _split(h, "ln")
    if a <= 0:
        raise DomainEdge("ln needs a positive standard part")
    tail = _power_series(_ln1p_coeffs(h.order), d / a, h.order)
    return tail if a == 1 else tail + math.log(a)


def hr_abs(h: Hyperreal) -> Hyperreal:
    if h.is_exact_zero:
        return h
    if not h.terms:
        raise OrderExhausted("sign lost to truncation")
    return -h if h.terms[0][1] < 0 else h


_FUNCS = {
    "sin": hr_sin,
    "cos": hr_cos,
    "tan": lambda h: hr_sin(h) / hr_cos(h),
    "exp": hr_exp,
    "ln": hr_ln,
    "sqrt": lambda h: h ** Fraction(1, 2),
    "abs": hr_abs,
}


# ---------------------------------------------------------------------------
# evaluation of expressions


def _as_hyperreal(v, order: int) -> Hyperreal:
    if isinstance(v, Hyperreal):
        return v
    if isinstance(v, float):
        return Hyperreal.real(v, order)
    if isinstance(v, Expr):
        return _eval(v, {}, order)
    return Hyperreal.real(Fraction(v), order)


def hr_eval(e: Expr, bindings: Mapping = None, order: int = DEFAULT_ORDER) -> Hyperreal:
    """Evaluate ``e`` with hyperreal values bound to its symbols.

    Bindings may be hyperreals, numbers or closed expressions such as
    ``5 + eps``.

    >>> from leibniz import parse_expr
    >>> x = Hyperreal.real(5) + Hyperreal.eps()
    >>> print(hr_eval(parse_expr("(x^2 - 25)/(x - 5)"), {"x": x}))
    10 + eps
    """
    env = {}
    for k, v in (bindings or {}).items():
        env[k.name if isinstance(k, Sym) else k] = _as_hyperreal(v, order)
    return _eval(ex.as_expr(e), env, order)


def _eval(e: Expr, env: dict, order: int) -> Hyperreal:
    if isinstance(e, Num):
        return Hyperreal.real(e.value, order)
    if isinstance(e, Const):
        if e.name == "eps":
            return Hyperreal.eps(order)
        if e.name == "pi":
            return Hyperreal.real(math.pi, order)
        if e.name == "e":
            return Hyperreal.real(math.e, order)
        raise UnboundSymbol(f"no value bound for {e.name}")
    if isinstance(e, Sym):
        if e.name not in env:
            raise UnboundSymbol(f"no value bound for {e.name}")
        return env[e.name]
    if isinstance(e, (Diff, Deferred)):
        raise UnsupportedNode(f"differential {e} has no hyperreal value")
    if isinstance(e, Add):
        out = Hyperreal.real(0, order)
        for t in e.terms:
            out = out + _eval(t, env, order)
        return out
    if isinstance(e, Mul):
        out = Hyperreal.real(1, order)
        for f in e.factors:
            out = out * _eval(f, env, order)
        return out
    if isinstance(e, Pow):
        if e.base == ex.E:
            return hr_exp(_eval(e.exp, env, order))
        base = _eval(e.base, env, order)
        if isinstance(e.exp, Num):
            return base ** e.exp.value
        x = _eval(e.exp, env, order)
        if not x.inexact and not x.truncated and set(x.coefficients) <= {0}:
            return base ** Fraction(x.coefficient(0))
        return hr_exp(x * hr_ln(base))
    if isinstance(e, Func):
        return _FUNCS[e.name](_eval(e.arg, env, order))
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# standard part and limits


class LimitKind(enum.Enum):
    FINITE = "Finite"
    PLUS_INFINITY = "PlusInfinity"
    MINUS_INFINITY = "MinusInfinity"
    UNDEFINED = "Undefined"


@dataclass(frozen=True)
class LimitResult:
    kind: LimitKind
    value: Coefficient = None
    reason: str = None
    series: Hyperreal = field(default=None, compare=False)

    @classmethod
    def finite(cls, value, series=None) -> "LimitResult":
        return cls(LimitKind.FINITE, value if isinstance(value, float) else Fraction(value), series=series)

    @classmethod
    def undefined(cls, reason: str) -> "LimitResult":
        return cls(LimitKind.UNDEFINED, reason=reason)

    @property
    def is_finite(self) -> bool:
        return self.kind is LimitKind.FINITE

    @property
    def inexact(self) -> bool:
        return isinstance(self.value, float)

    def __str__(self) -> str:
        if self.kind is LimitKind.FINITE:
            v = self.value
            if isinstance(v, float):
                return repr(v)
            return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        if self.kind is LimitKind.PLUS_INFINITY:
            return "oo"
        if self.kind is LimitKind.MINUS_INFINITY:
            return "-oo"
        return "undefined"


PLUS_INFINITY = LimitResult(LimitKind.PLUS_INFINITY)
MINUS_INFINITY = LimitResult(LimitKind.MINUS_INFINITY)


def std_part(h: Hyperreal) -> LimitResult:
    """The real number infinitely close to ``h`` (or its infinite sign)."""
    lead = h.leading_exponent
    if lead is not None and lead < 0:
        res = PLUS_INFINITY if h.terms[0][1] > 0 else MINUS_INFINITY
        return LimitResult(res.kind, series=h)
    if h.precision is not None and h.precision <= 0:
        raise OrderExhausted("standard part lost to truncation")
    return LimitResult.finite(h.coefficient(0), series=h)


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    BOTH = "both"

    @classmethod
    def of(cls, side) -> "Side":
        return side if isinstance(side, cls) else cls(str(side).lower())


def parse_point(point):
    """A rational, or ``±math.inf`` for the spellings ``oo``, ``inf``..."""
    if isinstance(point, float) and math.isinf(point):
        return point
    if isinstance(point, str):
        text = point.strip().lower().replace("∞", "oo")
        sign = -1 if text.startswith("-") else 1
        if text.lstrip("+-") in ("oo", "inf", "infinity"):
            return sign * math.inf
        from .parser import parse_expr

        point = parse_expr(point)
    if isinstance(point, Expr):
        try:
            return ex.exact_value(point)
        except (ValueError, UnboundSymbol):
            return float(ex.numeric(point))
    if isinstance(point, float):
        return point
    return Fraction(point)


def _approach(e: Expr, name: str, point, direction: int, order: int) -> LimitResult:
    for n in (order, 2 * order):
        if math.isinf(point):
            x = Hyperreal.eps(n, power=-1) * (1 if point > 0 else -1)
        else:
            x = Hyperreal.real(point, n) + Hyperreal.eps(n) * direction
        try:
            return std_part(hr_eval(e, {name: x}, n))
        except OrderExhausted:
            continue
        except DomainEdge:
            return LimitResult.undefined("not representable")
    return LimitResult.undefined("order exhausted")


def _same(a: LimitResult, b: LimitResult) -> bool:
    if a.kind is not b.kind:
        return False
    if a.kind is LimitKind.FINITE and (a.inexact or b.inexact):
        return math.isclose(float(a.value), float(b.value), rel_tol=1e-9, abs_tol=1e-12)
    return a.value == b.value


def limit(e, var, point, side="both", order: int = DEFAULT_ORDER) -> LimitResult:
    """Limit of ``e`` as ``var`` approaches ``point`` from ``side``.

    >>> from leibniz import parse_expr
    >>> str(limit(parse_expr("(x^2 - 25)/(x - 5)"), "x", 5, "right"))
    '10'
    """
    name = var.name if isinstance(var, Sym) else var
    e = ex.as_expr(e)
    point = parse_point(point)
    side = Side.of(side)
    if math.isinf(point):
        return _approach(e, name, point, 0, order)
    if side is Side.RIGHT:
        return _approach(e, name, point, 1, order)
    if side is Side.LEFT:
        return _approach(e, name, point, -1, order)
    right = _approach(e, name, point, 1, order)
    left = _approach(e, name, point, -1, order)
    for r in (right, left):
        if r.kind is LimitKind.UNDEFINED:
            return r
    if _same(left, right):
        return right
    return LimitResult.undefined("sides disagree")


def slope_at(f, var, a, order: int = DEFAULT_ORDER) -> LimitResult:
    """Standard part of the difference quotient ``(f(a+ε) - f(a))/ε``."""
    name = var.name if isinstance(var, Sym) else var
    f = ex.as_expr(f)
    a = parse_point(a)
    for n in (order, 2 * order):
        x = Hyperreal.real(a, n)
        try:
            q = (hr_eval(f, {name: x + Hyperreal.eps(n)}, n) - hr_eval(f, {name: x}, n)) / Hyperreal.eps(n)
            return std_part(q)
        except OrderExhausted:
            continue
        except DomainEdge:
            return LimitResult.undefined("not representable")
    return LimitResult.undefined("order exhausted")
