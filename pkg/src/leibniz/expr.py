"""Immutable expression trees and their canonical normal form.

Every node is a frozen dataclass.  The smart constructors :func:`add`,
:func:`mul`, :func:`power` and :func:`func` assume normalized arguments and
return normalized results, so building expressions through them (or through
the arithmetic operators on :class:`Expr`) never produces a non-canonical
tree.  :func:`normalize` rebuilds an arbitrary tree bottom-up through the
same constructors.

The normal form:

* sums and products are flat, constant-folded and sorted under a fixed
  total order, so two normal forms are equal iff they are structurally equal;
* rational constants are exact :class:`fractions.Fraction` values;
* a numeric coefficient or any monomial factor is distributed over a single
  sum, and products/powers of several sums are expanded when they involve a
  differential atom or their combined polynomial degree is at most 4;
* a quotient by a sum, ``p/q``, stays one product (with ``p`` expanded)
  unless differentials have to be separated into their own terms;
* ``sqrt(u)`` is stored as ``u^(1/2)`` and ``exp(u)`` as ``e^u``.

Differential atoms ``dx``, ``d2x`` behave exactly like symbols: ``dx*dx``
becomes ``dx^2`` and ``dx/dx`` becomes ``1``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Iterator, Mapping, Union

import numpy as np

from .errors import DegenerateExpression, UnboundSymbol

FUNCTIONS = frozenset({"sin", "cos", "tan", "exp", "ln", "sqrt", "abs"})
CONSTANT_NAMES = frozenset({"pi", "e", "C", "eps"})
RESERVED = FUNCTIONS | CONSTANT_NAMES | {"d"}

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

Number = Union[int, Fraction]


def is_valid_symbol_name(name: str) -> bool:
    """Symbol names are identifiers that do not start with ``d``.

    Any identifier beginning with ``d`` lexes as a differential atom, so
    allowing such symbols would break the print/parse round trip.
    """
    return (
        isinstance(name, str)
        and bool(_NAME_RE.match(name))
        and name not in RESERVED
        and not name.startswith("d")
    )


class Expr:
    """Base class for expression nodes; arithmetic builds normal forms."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, mul(NEG_ONE, as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), mul(NEG_ONE, self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), NEG_ONE))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, NEG_ONE))

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __rpow__(self, other):
        return power(as_expr(other), self)

    def __neg__(self):
        return mul(NEG_ONE, self)

    def __str__(self) -> str:
        from .parser import format_expr

        return format_expr(self)


@dataclass(frozen=True)
class Num(Expr):
    value: Fraction

    def __post_init__(self):
        if isinstance(self.value, bool) or not isinstance(self.value, Rational):
            raise TypeError(f"Num needs an exact rational, got {self.value!r}")
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Const(Expr):
    """Named constant: ``pi``, ``e``, ``C`` (integration) or ``eps``."""

    name: str

    def __post_init__(self):
        if self.name not in CONSTANT_NAMES:
            raise ValueError(f"unknown named constant {self.name!r}")


@dataclass(frozen=True)
class Sym(Expr):
    name: str

    def __post_init__(self):
        if not is_valid_symbol_name(self.name):
            raise ValueError(f"invalid symbol name {self.name!r}")


@dataclass(frozen=True)
class Diff(Expr):
    """Differential atom d^order(base); an opaque algebraic unit."""

    base: str
    order: int = 1

    def __post_init__(self):
        if isinstance(self.base, Sym):
            object.__setattr__(self, "base", self.base.name)
        if not is_valid_symbol_name(self.base):
            raise ValueError(f"invalid differential base {self.base!r}")
        if not isinstance(self.order, int) or self.order < 1:
            raise ValueError(f"differential order must be >= 1, got {self.order!r}")

    @property
    def symbol(self) -> Sym:
        return Sym(self.base)


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: Expr


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}")


@dataclass(frozen=True)
class Deferred(Expr):
    """Unevaluated ``d^order(arg)``; resolved by the differentiation module."""

    arg: Expr
    order: int = 1


ZERO = Num(0)
ONE = Num(1)
NEG_ONE = Num(-1)
HALF = Num(Fraction(1, 2))
E = Const("e")
PI = Const("pi")
C = Const("C")
EPS = Const("eps")


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return Sym(value)
    if isinstance(value, Rational) and not isinstance(value, bool):
        return Num(value)
    raise TypeError(f"cannot convert {value!r} to an expression")


def symbols(names: str) -> tuple:
    return tuple(Sym(n) for n in names.replace(",", " ").split())


# ---------------------------------------------------------------------------
# ordering


@lru_cache(maxsize=1 << 16)
def sort_key(e: Expr) -> tuple:
    """Total order: constants < symbols < differentials < functions < powers
    < products < sums."""
    if isinstance(e, Num):
        return (0, e.value)
    if isinstance(e, Const):
        return (1, e.name)
    if isinstance(e, Sym):
        return (2, e.name)
    if isinstance(e, Diff):
        return (3, e.base, e.order)
    if isinstance(e, Func):
        return (4, e.name, sort_key(e.arg))
    if isinstance(e, Deferred):
        return (5, e.order, sort_key(e.arg))
    if isinstance(e, Pow):
        return (6, sort_key(e.base), sort_key(e.exp))
    if isinstance(e, Mul):
        return (7, tuple(sort_key(f) for f in e.factors))
    if isinstance(e, Add):
        return (8, tuple(sort_key(t) for t in e.terms))
    raise TypeError(f"not an expression: {e!r}")


def as_base_exp(e: Expr) -> tuple:
    if isinstance(e, Pow):
        return e.base, e.exp
    return e, ONE


def _factor_key(f: Expr) -> tuple:
    # factors free of differentials first, then by base, then exponent
    b, x = as_base_exp(f)
    return (has_diff(f), sort_key(b), sort_key(x))


def _monomial_key(m: Expr) -> tuple:
    factors = m.factors if isinstance(m, Mul) else (m,)
    return (has_diff(m), tuple(_factor_key(f) for f in factors))


@lru_cache(maxsize=1 << 16)
def has_diff(e: Expr) -> bool:
    if isinstance(e, Diff):
        return True
    return any(has_diff(c) for c in children(e))


def children(e: Expr) -> tuple:
    if isinstance(e, Add):
        return e.terms
    if isinstance(e, Mul):
        return e.factors
    if isinstance(e, Pow):
        return (e.base, e.exp)
    if isinstance(e, (Func, Deferred)):
        return (e.arg,)
    return ()


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal of every node."""
    yield e
    for c in children(e):
        yield from walk(c)


def node_count(e: Expr) -> int:
    return sum(1 for _ in walk(e))


def free_atoms(e: Expr) -> tuple:
    """Return ``(symbols, differential_atoms)`` occurring in ``e``."""
    syms = frozenset(n for n in walk(e) if isinstance(n, Sym))
    diffs = frozenset(n for n in walk(e) if isinstance(n, Diff))
    return syms, diffs


def free_symbols(e: Expr) -> frozenset:
    return free_atoms(e)[0]


def is_constant(e: Expr) -> bool:
    """True when ``e`` contains no symbols or differential atoms."""
    return not any(isinstance(n, (Sym, Diff)) for n in walk(e))


# ---------------------------------------------------------------------------
# smart constructors


def _flatten(items: Iterable[Expr], kind: type) -> Iterator[Expr]:
    for item in items:
        if isinstance(item, kind):
            yield from (item.terms if kind is Add else item.factors)
        else:
            yield item


def _split_coeff(t: Expr) -> tuple:
    if isinstance(t, Mul) and isinstance(t.factors[0], Num):
        rest = t.factors[1:]
        return t.factors[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return Fraction(1), t


def _with_coeff(c: Fraction, m: Expr) -> Expr:
    if c == 1:
        return m
    if isinstance(m, Mul):
        return Mul((Num(c),) + m.factors)
    return Mul((Num(c), m))


def add(*terms: Expr) -> Expr:
    const = Fraction(0)
    coeffs: dict = {}
    for t in _flatten(terms, Add):
        if isinstance(t, Num):
            const += t.value
            continue
        c, m = _split_coeff(t)
        coeffs[m] = coeffs.get(m, 0) + c
    monos = sorted((m for m, c in coeffs.items() if c != 0), key=_monomial_key)
    out = [_with_coeff(coeffs[m], m) for m in monos]
    if const != 0:
        out.insert(0, Num(const))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(tuple(out))


def _degree(e: Expr) -> int:
    if isinstance(e, Num) or isinstance(e, Const):
        return 0
    if isinstance(e, Add):
        return max(_degree(t) for t in e.terms)
    if isinstance(e, Mul):
        return sum(_degree(f) for f in e.factors)
    if isinstance(e, Pow) and _is_pos_int(e.exp):
        return int(e.exp.value) * _degree(e.base)
    return 1


def _is_pos_int(e: Expr) -> bool:
    return isinstance(e, Num) and e.value.denominator == 1 and e.value > 0


def _is_sum_power(f: Expr) -> bool:
    return isinstance(f, Pow) and isinstance(f.base, Add) and _is_pos_int(f.exp)


def _is_sum_denominator(f: Expr) -> bool:
    return (
        isinstance(f, Pow)
        and isinstance(f.base, Add)
        and isinstance(f.exp, Num)
        and f.exp.value < 0
    )


def _should_expand(sums: list) -> bool:
    if any(has_diff(s) for s in sums):
        return True
    return sum(_degree(s) for s in sums) <= 4


def _expand(coeff: Fraction, rest: list, sums: list) -> Expr:
    acc = [mul(Num(coeff), *rest)]
    for s in sums:
        if isinstance(s, Add):
            factors = [s]
        else:
            factors = [s.base] * int(s.exp.value)
        for f in factors:
            acc = [mul(a, t) for a in acc for t in f.terms]
    return add(*acc)


def mul(*factors: Expr) -> Expr:
    coeff = Fraction(1)
    bases: dict = {}
    originals: dict = {}
    for f in _flatten(factors, Mul):
        if isinstance(f, Num):
            coeff *= f.value
            continue
        b, x = as_base_exp(f)
        bases.setdefault(b, []).append(x)
        originals.setdefault(b, f)
    if coeff == 0:
        return ZERO

    rebuilt = []
    regroup = False
    for b, exps in bases.items():
        if len(exps) == 1:
            rebuilt.append(originals[b])
            continue
        p = power(b, add(*exps))
        if isinstance(p, Num):
            coeff *= p.value
        else:
            regroup = regroup or isinstance(p, Mul)
            rebuilt.append(p)
    if regroup:
        return mul(Num(coeff), *rebuilt)

    sums = [f for f in rebuilt if isinstance(f, Add)]
    if sums:
        powsums = [f for f in rebuilt if _is_sum_power(f)]
        rest = [f for f in rebuilt if not isinstance(f, Add) and not _is_sum_power(f)]
        # keep p(x)/q(x) whole unless differentials must be separated
        quotient = any(_is_sum_denominator(f) for f in rest) and not any(has_diff(s) for s in sums + powsums)
        if quotient:
            if len(sums) + len(powsums) > 1 and _should_expand(sums + powsums):
                numerator = _expand(Fraction(1), [], sums + powsums)
                if not isinstance(numerator, Add):
                    return mul(Num(coeff), numerator, *rest)
                rebuilt = rest + [numerator]
        elif len(sums) == 1 and not powsums:
            return add(*(mul(Num(coeff), *rest, t) for t in sums[0].terms))
        elif _should_expand(sums + powsums):
            return _expand(coeff, rest, sums + powsums)

    rebuilt.sort(key=_factor_key)
    if coeff != 1:
        rebuilt.insert(0, Num(coeff))
    if not rebuilt:
        return Num(coeff)
    if len(rebuilt) == 1:
        return rebuilt[0]
    return Mul(tuple(rebuilt))


def _iroot(n: int, q: int):
    """Exact integer q-th root of n >= 0, or None."""
    if n < 2:
        return n
    r = int(round(n ** (1.0 / q))) if n.bit_length() < 1000 else 1 << (n.bit_length() // q)
    # Newton refinement for large n
    for _ in range(200):
        nxt = ((q - 1) * r + n // r ** (q - 1)) // q
        if abs(nxt - r) <= 1:
            break
        r = nxt
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**q == n:
            return cand
    return None


def exact_root(v: Fraction, q: int):
    """Exact rational q-th root of a non-negative rational, or None."""
    a = _iroot(v.numerator, q)
    b = _iroot(v.denominator, q)
    if a is None or b is None:
        return None
    return Fraction(a, b)


def _num_pow(v: Fraction, n: Fraction) -> Expr:
    if n.denominator == 1:
        if v == 0 and n < 0:
            raise DegenerateExpression("division by zero")
        return Num(v ** int(n))
    if v == 0:
        if n < 0:
            raise DegenerateExpression("division by zero")
        return ZERO
    if v < 0:
        return Pow(Num(v), Num(n))
    whole = n.numerator // n.denominator
    frac = n - whole
    root = exact_root(v, frac.denominator)
    if root is not None:
        return Num(root**frac.numerator * v**whole)
    if whole == 0:
        return Pow(Num(v), Num(frac))
    return mul(Num(v**whole), Pow(Num(v), Num(frac)))


def is_positive_constant(e: Expr) -> bool:
    if isinstance(e, Num):
        return e.value > 0
    if isinstance(e, Const):
        return e.name in ("e", "pi")
    return False


def power(b: Expr, x: Expr) -> Expr:
    if isinstance(x, Num):
        n = x.value
        if n == 0:
            return ONE
        if n == 1:
            return b
        if isinstance(b, Num):
            return _num_pow(b.value, n)
        integral = n.denominator == 1
        if isinstance(b, Pow) and (integral or is_positive_constant(b.base)):
            return power(b.base, mul(b.exp, x))
        if isinstance(b, Mul) and integral:
            return mul(*(power(f, x) for f in b.factors))
        if isinstance(b, Add) and integral and n > 1 and _should_expand([Pow(b, x)]):
            return _expand(Fraction(1), [], [Pow(b, x)])
        return Pow(b, x)
    if b == ONE:
        return ONE
    if b == E and isinstance(x, Func) and x.name == "ln":
        return x.arg
    if isinstance(b, Pow) and is_positive_constant(b.base):
        return power(b.base, mul(b.exp, x))
    return Pow(b, x)


def func(name: str, arg: Expr) -> Expr:
    if name == "sqrt":
        return power(arg, HALF)
    if name == "exp":
        return power(E, arg)
    if name == "ln":
        if arg == ONE:
            return ZERO
        if arg == E:
            return ONE
        if isinstance(arg, Pow) and arg.base == E:
            return arg.exp
    elif name in ("sin", "tan") and arg == ZERO:
        return ZERO
    elif name == "cos" and arg == ZERO:
        return ONE
    elif name == "abs":
        if isinstance(arg, Num):
            return Num(abs(arg.value))
        if is_positive_constant(arg) or (isinstance(arg, Pow) and arg.base == E):
            return arg
    return Func(name, arg)


def sin(u) -> Expr:
    return func("sin", as_expr(u))


def cos(u) -> Expr:
    return func("cos", as_expr(u))


def tan(u) -> Expr:
    return func("tan", as_expr(u))


def exp(u) -> Expr:
    return func("exp", as_expr(u))


def ln(u) -> Expr:
    return func("ln", as_expr(u))


def sqrt(u) -> Expr:
    return func("sqrt", as_expr(u))


def Abs(u) -> Expr:
    return func("abs", as_expr(u))


def normalize(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up into canonical form.

    Raises DegenerateExpression on division by the exact constant 0.
    """
    return _rebuild(e, None)


def _rebuild(e: Expr, bindings) -> Expr:
    if isinstance(e, (Num, Const)):
        return e
    if isinstance(e, (Sym, Diff)):
        if bindings is not None and e in bindings:
            return bindings[e]
        return e
    if isinstance(e, Add):
        return add(*(_rebuild(t, bindings) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(_rebuild(f, bindings) for f in e.factors))
    if isinstance(e, Pow):
        return power(_rebuild(e.base, bindings), _rebuild(e.exp, bindings))
    if isinstance(e, Func):
        return func(e.name, _rebuild(e.arg, bindings))
    if isinstance(e, Deferred):
        return Deferred(_rebuild(e.arg, bindings), e.order)
    raise TypeError(f"not an expression: {e!r}")


def _atom_key(k) -> Expr:
    if isinstance(k, str):
        return Sym(k)
    if isinstance(k, (Sym, Diff)):
        return k
    raise TypeError(f"substitution keys must be symbols or differentials, got {k!r}")


def substitute(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous (non-cascading) substitution followed by normalization.

    Keys are :class:`Sym`, :class:`Diff` or symbol names; unknown keys are
    ignored.
    """
    table = {_atom_key(k): normalize(as_expr(v)) for k, v in bindings.items()}
    return _rebuild(e, table)


# ---------------------------------------------------------------------------
# equations and assumptions


@dataclass(frozen=True)
class Equation:
    lhs: Expr
    rhs: Expr

    def __post_init__(self):
        object.__setattr__(self, "lhs", normalize(as_expr(self.lhs)))
        object.__setattr__(self, "rhs", normalize(as_expr(self.rhs)))

    def residual(self) -> Expr:
        """``lhs - rhs``."""
        return add(self.lhs, mul(NEG_ONE, self.rhs))

    def __str__(self) -> str:
        return f"{self.lhs} = {self.rhs}"


def _names(items) -> frozenset:
    out = set()
    for item in items:
        name = item.name if isinstance(item, Sym) else item
        if not is_valid_symbol_name(name):
            raise ValueError(f"invalid symbol name {name!r}")
        out.add(name)
    return frozenset(out)


@dataclass(frozen=True)
class Assumptions:
    """Per-computation declarations.

    ``independent`` symbols have vanishing higher differentials (d2x = 0);
    ``positive`` symbols may serve as bases of symbolic powers.
    """

    independent: frozenset = field(default_factory=frozenset)
    positive: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "independent", _names(self.independent))
        object.__setattr__(self, "positive", _names(self.positive))


# ---------------------------------------------------------------------------
# evaluation


def _lookup(e: Expr, env: Mapping):
    if e in env:
        return env[e]
    name = e.name if isinstance(e, (Sym, Const)) else None
    if name is not None and name in env:
        return env[name]
    raise UnboundSymbol(f"no value bound for {e}")


def exact_value(e: Expr, env: Mapping = None) -> Fraction:
    """Evaluate with exact rational arithmetic.

    Raises ValueError when a step leaves the rationals (transcendental
    functions, irrational roots) and DegenerateExpression on division by 0.
    """
    env = env or {}
    if isinstance(e, Num):
        return e.value
    if isinstance(e, (Sym, Diff, Const)):
        return Fraction(_lookup(e, env))
    if isinstance(e, Add):
        return sum((exact_value(t, env) for t in e.terms), Fraction(0))
    if isinstance(e, Mul):
        out = Fraction(1)
        for f in e.factors:
            out *= exact_value(f, env)
        return out
    if isinstance(e, Pow):
        b = exact_value(e.base, env)
        x = exact_value(e.exp, env)
        if x.denominator == 1:
            if b == 0 and x < 0:
                raise DegenerateExpression("division by zero")
            return b ** int(x)
        if b >= 0:
            root = exact_root(b, x.denominator)
            if root is not None:
                if root == 0 and x < 0:
                    raise DegenerateExpression("division by zero")
                return root**x.numerator
        raise ValueError(f"{b}^{x} is not rational")
    if isinstance(e, Func) and e.name == "abs":
        return abs(exact_value(e.arg, env))
    raise ValueError(f"cannot evaluate {type(e).__name__} exactly")


_NUMPY_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "ln": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}


def numeric(e: Expr, env: Mapping = None):
    """Floating-point evaluation; values in ``env`` may be numpy arrays."""
    env = env or {}
    if isinstance(e, Num):
        return float(e.value)
    if isinstance(e, Const):
        if e.name == "pi":
            return math.pi
        if e.name == "e":
            return math.e
        return _as_float(_lookup(e, env))
    if isinstance(e, (Sym, Diff)):
        return _as_float(_lookup(e, env))
    if isinstance(e, Add):
        out = 0.0
        for t in e.terms:
            out = out + numeric(t, env)
        return out
    if isinstance(e, Mul):
        out = 1.0
        for f in e.factors:
            out = out * numeric(f, env)
        return out
    if isinstance(e, Pow):
        b = numeric(e.base, env)
        if isinstance(e.exp, Num):
            x = e.exp.value
            if x.denominator == 1:
                with np.errstate(divide="ignore"):
                    return np.power(np.float64(b) if not np.ndim(b) else b, float(x))
            if x.denominator % 2 == 1:
                # real odd root of a negative base
                return np.sign(b) * np.abs(b) ** float(x) if x.numerator % 2 else np.abs(b) ** float(x)
            return np.power(b, float(x))
        return np.power(b, numeric(e.exp, env))
    if isinstance(e, Func):
        return _NUMPY_FUNCS[e.name](numeric(e.arg, env))
    raise ValueError(f"cannot evaluate {type(e).__name__} numerically")


def _as_float(v):
    if isinstance(v, np.ndarray):
        return v.astype(float)
    return float(v)
