import json
from pathlib import Path

import jsonschema
import pytest
from hypothesis import given

from leibniz import expr as ex
from leibniz.expr import Deferred, Diff, Num, Sym
from leibniz.parser import (
    ErrorKind, ParseError, format_equation, format_expr, from_json, parse, parse_equation,
    parse_expr, parse_ratio, to_json,
)

from strategies import differential_expressions, expressions

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "expr.schema.json").read_text())


@pytest.mark.parametrize(
    "text, shown",
    [
        ("x^3", "x^3"),
        ("3*x^2*dx", "3*x^2*dx"),
        ("x*dy + y*dx", "x*dy + y*dx"),
        ("-y/x", "-(y/x)"),
        ("2*z/x - (y/x)*(dx/dz)", "2*z/x - y*dx/(x*dz)"),
        ("sqrt(x^2 + 1)", "sqrt(1 + x^2)"),
        ("exp(2*x)", "exp(2*x)"),
        ("d2y/dx^2", "d2y/dx^2"),
        ("-x^2", "-x^2"),
        ("2^3^2", "512"),
        ("(-2)^2", "4"),
        ("x^-1", "1/x"),
        ("1/(2*x)", "1/(2*x)"),
    ],
)
def test_plain_printing(text, shown):
    assert format_expr(parse_expr(text)) == shown


def test_unary_minus_binds_looser_than_power():
    assert parse_expr("-x^2") == ex.mul(ex.NEG_ONE, ex.power(Sym("x"), Num(2)))
    assert parse_expr("2^-1") == Num(ex.Fraction(1, 2))


def test_constants_and_unicode():
    assert parse_expr("π") == ex.PI
    assert parse_expr("ε") == ex.EPS == parse_expr("eps")
    assert parse_expr("2.5e-1") == Num(ex.Fraction(1, 4))


def test_deferred_operator():
    e = parse_expr("d(x*y)")
    assert isinstance(e, Deferred) and e.order == 1
    assert parse_expr("d2(x^3)") == Deferred(ex.power(Sym("x"), Num(3)), 2)


def test_equation_and_ratio():
    eq = parse_equation("z^2 = x*y")
    assert eq.lhs == parse_expr("z^2") and eq.rhs == parse_expr("x*y")
    assert parse("x = 1") == parse_equation("x = 1")
    assert parse_ratio("dA/dt") == (Diff("A"), Diff("t"))
    assert format_equation(eq) == "z^2 = x*y"


@pytest.mark.parametrize(
    "text, kind, start, end",
    [
        ("2z dz", ErrorKind.UnexpectedToken, 1, 2),
        ("x + ", ErrorKind.UnexpectedToken, 4, 4),
        ("(x + 1", ErrorKind.UnbalancedDelimiter, 0, 1),
        ("x + 1)", ErrorKind.UnbalancedDelimiter, 5, 6),
        ("f(x)", ErrorKind.UnknownFunction, 0, 1),
        ("d^x", ErrorKind.MalformedDifferential, 0, 3),
        ("d0x", ErrorKind.MalformedDifferential, 0, 3),
        ("x $ y", ErrorKind.UnexpectedToken, 2, 3),
        ("π π", ErrorKind.UnexpectedToken, 3, 5),
    ],
)
def test_parse_errors_carry_spans(text, kind, start, end):
    with pytest.raises(ParseError) as info:
        parse_expr(text)
    err = info.value
    assert err.kind is kind
    assert (err.span.start, err.span.end) == (start, end)
    assert err.code == "ParseError"


def test_caret_rendering():
    with pytest.raises(ParseError) as info:
        parse_expr("2z dz")
    lines = info.value.render().splitlines()
    assert lines[1].strip() == "2z dz"
    assert lines[2].index("^") == lines[1].index("z")


def test_bad_ratio_target():
    with pytest.raises(ParseError):
        parse_ratio("dy*dx")


def test_latex():
    assert format_expr(parse_expr("3*x^2*dx"), "latex") == r"3\,x^{2}\,\mathrm{d} x"
    assert r"\mathrm{d}^2 y" in format_expr(parse_expr("d2y/dx^2"), "latex")
    assert r"\frac" in format_expr(parse_expr("y/x"), "latex")
    assert r"\sqrt" in format_expr(parse_expr("sqrt(x)"), "latex")


def test_json_example_validates():
    tree = to_json(parse_expr("x*dy + y*dx + sin(x)^(1/2)"))
    jsonschema.validate(tree, SCHEMA)
    assert from_json(json.dumps(tree)) == parse_expr("x*dy + y*dx + sin(x)^(1/2)")


@given(expressions)
def test_plain_round_trip(e):
    assert parse_expr(format_expr(e)) == e


@given(expressions)
def test_json_round_trip(e):
    tree = to_json(e)
    jsonschema.validate(tree, SCHEMA)
    assert from_json(tree) == e
    assert from_json(format_expr(e, "json")) == e


@given(differential_expressions)
def test_round_trip_with_differentials(e):
    assert parse_expr(format_expr(e)) == e
    assert from_json(to_json(e)) == e


@pytest.mark.parametrize("text, hinted", [("2z", True), ("2 (x)", True), ("x + * y", False)])
def test_missing_star_hint_only_after_an_operand(text, hinted):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert ("explicit '*'" in info.value.message) == hinted
