"""Text <-> expression conversion.

Input grammar (precedence climbing, see ``docs/grammar.md``)::

    equation    = expr "=" expr
    expr        = term { ("+" | "-") term }
    term        = unary { ("*" | "/") unary }
    unary       = "-" unary | "+" unary | power
    power       = primary [ "^" exponent ]
    exponent    = "-" exponent | "+" exponent | power
    primary     = number | constant | symbol | differential
                | function "(" expr ")" | d-operator "(" expr ")"
                | "(" expr ")"

Multiplication must be written explicitly: ``2*z*dz`` parses, ``2z dz`` is
rejected, because ``dx`` has to lex as one differential atom.  ``dx``,
``d2x`` and ``d^2x`` are differential atoms; ``d(...)`` and ``d2(...)`` are
deferred applications of the differential operator.

Emitters produce plain text (which re-parses to the same expression),
LaTeX (amsmath, upright d) and a lossless JSON tree.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction

from . import expr as ex
from .expr import (
    Add, Const, Deferred, Diff, Equation, Expr, Func, Mul, Num, Pow, Sym,
)


class ErrorKind(enum.Enum):
    UnexpectedToken = "UnexpectedToken"
    UnbalancedDelimiter = "UnbalancedDelimiter"
    UnknownFunction = "UnknownFunction"
    MalformedDifferential = "MalformedDifferential"


@dataclass(frozen=True)
class SourceSpan:
    """Byte offsets into the UTF-8 encoded input."""

    start: int
    end: int


class ParseError(ValueError):
    code = "ParseError"

    def __init__(self, kind: ErrorKind, message: str, span: SourceSpan, text: str = ""):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.span = span
        self.text = text

    def render(self) -> str:
        """Message plus the input line with a caret under the span."""
        raw = self.text.encode()
        col = len(raw[: self.span.start].decode(errors="ignore"))
        width = max(1, len(raw[self.span.start : self.span.end].decode(errors="ignore")))
        return f"error: {self.message}\n  {self.text}\n  {' ' * col}{'^' * width}"

    def __str__(self) -> str:
        return f"{self.kind.value} at {self.span.start}..{self.span.end}: {self.message}"


@dataclass(frozen=True)
class Token:
    kind: str  # num, const, sym, diff, dop, func, ident, op, eof
    value: object
    start: int  # character offsets
    end: int


_CONSTANT_SPELLINGS = {"pi": "pi", "π": "pi", "e": "e", "C": "C", "eps": "eps", "ε": "eps"}


def _is_ident_start(c: str) -> bool:
    return c.isascii() and c.isalpha()


def _is_ident_char(c: str) -> bool:
    return c.isascii() and (c.isalnum() or c == "_")


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, kind, message, start, end):
        raise ParseError(kind, message, _byte_span(self.text, start, end), self.text)

    def tokens(self) -> list:
        out = []
        text = self.text
        while self.pos < len(text):
            c = text[self.pos]
            if c.isspace():
                self.pos += 1
            elif c.isdigit() or (c == "." and self.pos + 1 < len(text) and text[self.pos + 1].isdigit()):
                out.append(self._number())
            elif c in "πε":
                out.append(Token("const", _CONSTANT_SPELLINGS[c], self.pos, self.pos + 1))
                self.pos += 1
            elif _is_ident_start(c):
                out.append(self._word())
            elif c in "+-*/^()=,":
                out.append(Token("op", c, self.pos, self.pos + 1))
                self.pos += 1
            else:
                self.error(ErrorKind.UnexpectedToken, f"unexpected character {c!r}", self.pos, self.pos + 1)
        out.append(Token("eof", None, len(text), len(text)))
        return out

    def _number(self) -> Token:
        text, start = self.text, self.pos
        i = start
        while i < len(text) and text[i].isdigit():
            i += 1
        if i < len(text) and text[i] == "." and i + 1 < len(text) and text[i + 1].isdigit():
            i += 1
            while i < len(text) and text[i].isdigit():
                i += 1
        if i < len(text) and text[i] in "eE":
            j = i + 1
            if j < len(text) and text[j] in "+-":
                j += 1
            if j < len(text) and text[j].isdigit():
                while j < len(text) and text[j].isdigit():
                    j += 1
                i = j
        self.pos = i
        return Token("num", Fraction(text[start:i]), start, i)

    def _word(self) -> Token:
        text, start = self.text, self.pos
        i = start
        while i < len(text) and _is_ident_char(text[i]):
            i += 1
        word = text[start:i]
        self.pos = i
        if word in _CONSTANT_SPELLINGS:
            return Token("const", _CONSTANT_SPELLINGS[word], start, i)
        if word in ex.FUNCTIONS:
            return Token("func", word, start, i)
        if word.startswith("d"):
            return self._differential(word, start, i)
        return Token("ident", word, start, i)

    def _differential(self, word: str, start: int, end: int) -> Token:
        text = self.text
        order_digits = ""
        rest = word[1:]
        if word == "d" and end < len(text) and text[end] == "^":
            # d^2x or d^2(...)
            j = end + 1
            k = j
            while k < len(text) and text[k].isdigit():
                k += 1
            if k == j:
                self.error(ErrorKind.MalformedDifferential, "expected an order after 'd^'", start, k + 1)
            order_digits = text[j:k]
            m = k
            while m < len(text) and _is_ident_char(text[m]):
                m += 1
            rest = text[k:m]
            end = m
            self.pos = m
        else:
            while rest and rest[0].isdigit():
                order_digits += rest[0]
                rest = rest[1:]
        order = int(order_digits) if order_digits else 1
        if order < 1:
            self.error(ErrorKind.MalformedDifferential, "differential order must be at least 1", start, end)
        if not rest:
            if self.pos < len(text) and text[self.pos] == "(":
                return Token("dop", order, start, end)
            self.error(ErrorKind.MalformedDifferential, f"'{text[start:end]}' needs a variable or '('", start, end)
        if not ex.is_valid_symbol_name(rest):
            self.error(ErrorKind.MalformedDifferential, f"'{rest}' is not a valid variable for a differential", start, end)
        return Token("diff", Diff(rest, order), start, end)


def _byte_span(text: str, start: int, end: int) -> SourceSpan:
    return SourceSpan(len(text[:start].encode()), len(text[:end].encode()))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _Lexer(text).tokens()
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def is_op(self, *ops) -> bool:
        return self.tok.kind == "op" and self.tok.value in ops

    def error(self, kind, message, tok: Token):
        raise ParseError(kind, message, _byte_span(self.text, tok.start, tok.end), self.text)

    def unexpected(self):
        t = self.tok
        if t.kind == "eof":
            self.error(ErrorKind.UnexpectedToken, "unexpected end of input", t)
        if t.kind == "op" and t.value == ")":
            self.error(ErrorKind.UnbalancedDelimiter, "unmatched ')'", t)
        shown = self.text[t.start : t.end]
        # an operand right after a complete operand is usually a missing '*'
        hint = "" if t.kind == "op" and t.value != "(" else " (multiplication needs an explicit '*')"
        self.error(ErrorKind.UnexpectedToken, f"unexpected {shown!r}{hint}", t)

    def finish(self):
        if self.tok.kind != "eof":
            self.unexpected()

    def expr(self) -> Expr:
        left = self.term()
        while self.is_op("+", "-"):
            op = self.advance().value
            right = self.term()
            left = ex.add(left, right if op == "+" else ex.mul(ex.NEG_ONE, right))
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.is_op("*", "/"):
            op = self.advance().value
            right = self.unary()
            left = ex.mul(left, right if op == "*" else ex.power(right, ex.NEG_ONE))
        return left

    def unary(self) -> Expr:
        if self.is_op("-"):
            self.advance()
            return ex.mul(ex.NEG_ONE, self.unary())
        if self.is_op("+"):
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.is_op("^"):
            self.advance()
            return ex.power(base, self.exponent())
        return base

    def exponent(self) -> Expr:
        if self.is_op("-"):
            self.advance()
            return ex.mul(ex.NEG_ONE, self.exponent())
        if self.is_op("+"):
            self.advance()
            return self.exponent()
        return self.power()

    def parenthesized(self) -> Expr:
        opener = self.tok
        if not self.is_op("("):
            self.error(ErrorKind.UnexpectedToken, "expected '('", opener)
        self.advance()
        inner = self.expr()
        if not self.is_op(")"):
            if self.tok.kind == "eof":
                self.error(ErrorKind.UnbalancedDelimiter, "'(' is never closed", opener)
            self.unexpected()
        self.advance()
        return inner

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(t.value)
        if t.kind == "const":
            self.advance()
            return Const(t.value)
        if t.kind == "diff":
            self.advance()
            return t.value
        if t.kind == "ident":
            self.advance()
            if self.is_op("("):
                self.error(ErrorKind.UnknownFunction, f"unknown function {t.value!r}", t)
            return Sym(t.value)
        if t.kind == "func":
            self.advance()
            return ex.func(t.value, self.parenthesized())
        if t.kind == "dop":
            self.advance()
            return Deferred(self.parenthesized(), t.value)
        if self.is_op("("):
            return self.parenthesized()
        self.unexpected()


def parse_expr(text: str) -> Expr:
    """Parse and normalize an expression.

    >>> parse_expr("x*dy + y*dx")
    Add(terms=(Mul(factors=(Sym(name='x'), Diff(base='y', order=1))), Mul(factors=(Sym(name='y'), Diff(base='x', order=1)))))
    """
    p = _Parser(text)
    e = p.expr()
    if p.is_op("="):
        p.error(ErrorKind.UnexpectedToken, "expected an expression, found an equation", p.tok)
    p.finish()
    return e


def parse_equation(text: str) -> Equation:
    p = _Parser(text)
    lhs = p.expr()
    if not p.is_op("="):
        if p.tok.kind == "eof":
            p.error(ErrorKind.UnexpectedToken, "expected '=' in equation", p.tok)
        p.unexpected()
    p.advance()
    rhs = p.expr()
    p.finish()
    return Equation(lhs, rhs)


def parse(text: str):
    """Parse an equation if the text contains '=', otherwise an expression."""
    if "=" in text:
        return parse_equation(text)
    return parse_expr(text)


def parse_ratio(text: str) -> tuple:
    """Parse ``dy/dx`` into ``(Diff(y), Diff(x))``."""
    e = parse_expr(text)
    num = den = None
    if isinstance(e, Mul) and len(e.factors) == 2:
        for f in e.factors:
            if isinstance(f, Diff):
                num = f
            elif isinstance(f, Pow) and isinstance(f.base, Diff) and f.exp == ex.NEG_ONE:
                den = f.base
    if num is None or den is None:
        raise ParseError(
            ErrorKind.MalformedDifferential,
            "a derivative target must look like dy/dx",
            SourceSpan(0, len(text.encode())),
            text,
        )
    return num, den


# ---------------------------------------------------------------------------
# plain text

_SUM, _PRODUCT, _UNARY, _POWER, _ATOM = range(1, 6)


def _is_negative(e: Expr) -> bool:
    if isinstance(e, Num):
        return e.value < 0
    if isinstance(e, Mul):
        return isinstance(e.factors[0], Num) and e.factors[0].value < 0
    return False


def _inline_negative_power(f: Expr) -> bool:
    """``(1 + x)^-2`` cannot print as ``1/(1 + x)^2``: that re-parses expanded."""
    if not (isinstance(f, Pow) and isinstance(f.base, Add) and isinstance(f.exp, Num)):
        return False
    n = -f.exp.value
    return n > 1 and n.denominator == 1 and ex.power(f.base, Num(n)) != Pow(f.base, Num(n))


def _split_fraction(e: Expr) -> tuple:
    """Return ``(coefficient, numerator factors, denominator factors)``."""
    factors = e.factors if isinstance(e, Mul) else (e,)
    coeff = Fraction(1)
    num, den = [], []
    for f in factors:
        if isinstance(f, Num):
            coeff *= f.value
        elif isinstance(f, Pow) and isinstance(f.exp, Num) and f.exp.value < 0 and not _inline_negative_power(f):
            den.append(ex.power(f.base, Num(-f.exp.value)))
        else:
            num.append(f)
    return coeff, num, den


def _plain(e: Expr) -> tuple:
    if isinstance(e, Num):
        v = e.value
        if v.denominator == 1:
            return str(v.numerator), _ATOM if v >= 0 else _UNARY
        return f"{v.numerator}/{v.denominator}", _PRODUCT
    if isinstance(e, Const):
        return e.name, _ATOM
    if isinstance(e, Sym):
        return e.name, _ATOM
    if isinstance(e, Diff):
        return (f"d{e.base}" if e.order == 1 else f"d{e.order}{e.base}"), _ATOM
    if isinstance(e, Func):
        return f"{e.name}({_plain(e.arg)[0]})", _ATOM
    if isinstance(e, Deferred):
        op = "d" if e.order == 1 else f"d{e.order}"
        return f"{op}({_plain(e.arg)[0]})", _ATOM
    if isinstance(e, Add):
        parts = []
        for i, t in enumerate(e.terms):
            if i and _is_negative(t):
                s, level = _plain(ex.mul(ex.NEG_ONE, t))
                parts.append(" - " + (f"({s})" if level <= _SUM else s))
            else:
                s = _plain(t)[0]
                parts.append((" + " if i else "") + s)
        return "".join(parts), _SUM
    if isinstance(e, Pow):
        if isinstance(e.exp, Num) and e.exp.value < 0 and not _inline_negative_power(e):
            return _plain_product(e)
        if e.base == ex.E:
            return f"exp({_plain(e.exp)[0]})", _ATOM
        if e.exp == ex.HALF:
            return f"sqrt({_plain(e.base)[0]})", _ATOM
        b, bl = _plain(e.base)
        x, xl = _plain(e.exp)
        if bl <= _POWER:
            b = f"({b})"
        if xl < _ATOM:
            x = f"({x})"
        return f"{b}^{x}", _POWER
    if isinstance(e, Mul):
        return _plain_product(e)
    raise TypeError(f"not an expression: {e!r}")


def _plain_factor(f: Expr) -> str:
    s, level = _plain(f)
    return f"({s})" if level <= _PRODUCT else s


def _plain_product(e: Expr) -> tuple:
    coeff, num, den = _split_fraction(e)
    mag = abs(coeff)
    num_parts = [_plain_factor(f) for f in num]
    if mag.numerator != 1 or not num_parts:
        num_parts.insert(0, str(mag.numerator))
    den_parts = [_plain_factor(f) for f in den]
    if mag.denominator != 1:
        den_parts.insert(0, str(mag.denominator))
    body = "*".join(num_parts)
    if den_parts:
        d = den_parts[0] if len(den_parts) == 1 else "(" + "*".join(den_parts) + ")"
        body = f"{body}/{d}"
    if coeff < 0:
        return (f"-({body})" if den_parts else f"-{body}"), _UNARY
    return body, _PRODUCT


# ---------------------------------------------------------------------------
# LaTeX

_LATEX_CONST = {"pi": r"\pi", "e": "e", "C": "C", "eps": r"\varepsilon"}


def _latex(e: Expr) -> tuple:
    if isinstance(e, Num):
        v = e.value
        if v.denominator == 1:
            return str(v.numerator), _ATOM if v >= 0 else _UNARY
        sign = "-" if v < 0 else ""
        return f"{sign}\\frac{{{abs(v.numerator)}}}{{{v.denominator}}}", _PRODUCT
    if isinstance(e, Const):
        return _LATEX_CONST[e.name], _ATOM
    if isinstance(e, Sym):
        return e.name, _ATOM
    if isinstance(e, Diff):
        op = r"\mathrm{d}" if e.order == 1 else rf"\mathrm{{d}}^{e.order}"
        return f"{op} {e.base}", _ATOM
    if isinstance(e, Func):
        arg = _latex(e.arg)[0]
        if e.name == "abs":
            return rf"\left|{arg}\right|", _ATOM
        return rf"\{e.name}\left({arg}\right)", _ATOM
    if isinstance(e, Deferred):
        op = r"\mathrm{d}" if e.order == 1 else rf"\mathrm{{d}}^{e.order}"
        return rf"{op}\left({_latex(e.arg)[0]}\right)", _ATOM
    if isinstance(e, Add):
        parts = []
        for i, t in enumerate(e.terms):
            if i and _is_negative(t):
                s, level = _latex(ex.mul(ex.NEG_ONE, t))
                parts.append(" - " + (rf"\left({s}\right)" if level <= _SUM else s))
            else:
                parts.append((" + " if i else "") + _latex(t)[0])
        return "".join(parts), _SUM
    if isinstance(e, Pow):
        if isinstance(e.exp, Num) and e.exp.value < 0:
            return _latex_product(e)
        if e.exp == ex.HALF:
            return rf"\sqrt{{{_latex(e.base)[0]}}}", _ATOM
        b, bl = _latex(e.base)
        if bl <= _POWER:
            b = rf"\left({b}\right)"
        return f"{b}^{{{_latex(e.exp)[0]}}}", _POWER
    if isinstance(e, Mul):
        return _latex_product(e)
    raise TypeError(f"not an expression: {e!r}")


def _latex_factor(f: Expr) -> str:
    s, level = _latex(f)
    return rf"\left({s}\right)" if level <= _SUM else s


def _latex_product(e: Expr) -> tuple:
    coeff, num, den = _split_fraction(e)
    mag = abs(coeff)
    num_parts = [_latex_factor(f) for f in num]
    if mag.numerator != 1 or not num_parts:
        num_parts.insert(0, str(mag.numerator))
    den_parts = [_latex_factor(f) for f in den]
    if mag.denominator != 1:
        den_parts.insert(0, str(mag.denominator))
    sep = r"\,"
    body = sep.join(num_parts)
    if den_parts:
        body = rf"\frac{{{body}}}{{{sep.join(den_parts)}}}"
    if coeff < 0:
        return f"-{body}", _UNARY
    return body, _PRODUCT


# ---------------------------------------------------------------------------
# JSON


def to_json(e: Expr) -> dict:
    """Lossless tree encoding; see ``docs/expr.schema.json``."""
    if isinstance(e, Num):
        return {"type": "num", "value": str(e.value)}
    if isinstance(e, Const):
        return {"type": "const", "name": e.name}
    if isinstance(e, Sym):
        return {"type": "sym", "name": e.name}
    if isinstance(e, Diff):
        return {"type": "diff", "base": e.base, "order": e.order}
    if isinstance(e, Add):
        return {"type": "add", "terms": [to_json(t) for t in e.terms]}
    if isinstance(e, Mul):
        return {"type": "mul", "factors": [to_json(f) for f in e.factors]}
    if isinstance(e, Pow):
        return {"type": "pow", "base": to_json(e.base), "exp": to_json(e.exp)}
    if isinstance(e, Func):
        return {"type": "func", "name": e.name, "arg": to_json(e.arg)}
    if isinstance(e, Deferred):
        return {"type": "deferred", "order": e.order, "arg": to_json(e.arg)}
    raise TypeError(f"not an expression: {e!r}")


def from_json(data) -> Expr:
    """Inverse of :func:`to_json`; accepts a dict or a JSON string."""
    if isinstance(data, str):
        data = json.loads(data)
    kind = data["type"]
    if kind == "num":
        return Num(Fraction(data["value"]))
    if kind == "const":
        return Const(data["name"])
    if kind == "sym":
        return Sym(data["name"])
    if kind == "diff":
        return Diff(data["base"], data["order"])
    if kind == "add":
        return Add(tuple(from_json(t) for t in data["terms"]))
    if kind == "mul":
        return Mul(tuple(from_json(f) for f in data["factors"]))
    if kind == "pow":
        return Pow(from_json(data["base"]), from_json(data["exp"]))
    if kind == "func":
        return Func(data["name"], from_json(data["arg"]))
    if kind == "deferred":
        return Deferred(from_json(data["arg"]), data["order"])
    raise ValueError(f"unknown node type {kind!r}")


STYLES = ("plain", "latex", "json")


def format_expr(e: Expr, style: str = "plain") -> str:
    style = style.lower()
    if style == "plain":
        return _plain(e)[0]
    if style == "latex":
        return _latex(e)[0]
    if style == "json":
        return json.dumps(to_json(e), sort_keys=True)
    raise ValueError(f"unknown style {style!r}; expected one of {STYLES}")


def format_equation(eq: Equation, style: str = "plain") -> str:
    if style.lower() == "json":
        return json.dumps({"lhs": to_json(eq.lhs), "rhs": to_json(eq.rhs)}, sort_keys=True)
    return f"{format_expr(eq.lhs, style)} = {format_expr(eq.rhs, style)}"
