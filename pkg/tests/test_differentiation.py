import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from leibniz import expr as ex
from leibniz.differentiation import differential, is_positive, nth_differential, resolve
from leibniz.errors import NonPositiveBase, UnsupportedNode
from leibniz.expr import Assumptions, Diff, Equation, Num, Sym
from leibniz.parser import parse_expr as P

from strategies import coefficient_lists, points, polynomial, smooth_expressions

X_INDEP = Assumptions(independent={"x"})


def dx_coefficient(form, var="x"):
    """Coefficient of d<var> in a first-order form, read off by substitution."""
    others = {Diff(s): ex.ZERO for s in ("x", "y", "z", "t", "u", "v") if s != var}
    return ex.substitute(form, {**others, Diff(var): ex.ONE})


def finite_difference(e, env, var, h=1e-6):
    hi = dict(env, **{var: env[var] + h})
    lo = dict(env, **{var: env[var] - h})
    return (ex.numeric(e, hi) - ex.numeric(e, lo)) / (2 * h)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("x^3", "3*x^2*dx"),
        ("x*y", "x*dy + y*dx"),
        ("5", "0"),
        ("pi*r^2", "2*pi*r*dr"),
        ("sin(x^2)", "2*x*cos(x^2)*dx"),
        ("cos(t)", "-sin(t)*dt"),
        ("tan(x)", "dx/cos(x)^2"),
        ("ln(x)", "dx/x"),
        ("exp(3*x)", "3*exp(3*x)*dx"),
        ("sqrt(x)", "dx/(2*sqrt(x))"),
        ("2^x", "2^x*ln(2)*dx"),
        ("y/x", "dy/x - y*dx/x^2"),
        ("dx", "d2x"),
    ],
)
def test_rules(text, expected):
    assert differential(P(text)) == P(expected)


def test_equation_differentiates_both_sides():
    eq = differential(Equation(P("z^2"), P("x*y")))
    assert eq.lhs == P("2*z*dz") and eq.rhs == P("x*dy + y*dx")


def test_second_differential_keeps_d2x():
    assert nth_differential(P("x^3"), 2) == P("3*x^2*d2x + 6*x*dx^2")
    assert nth_differential(P("x^3"), 2, X_INDEP) == P("6*x*dx^2")
    assert nth_differential(P("x^3"), 3, X_INDEP) == P("6*dx^3")
    with pytest.raises(ValueError):
        nth_differential(P("x"), 0)


def test_generalized_power_rule():
    u, v = Sym("u"), Sym("v")
    a = Assumptions(positive={"u"})
    got = differential(ex.power(u, v), a)
    want = ex.add(
        ex.mul(v, ex.power(u, ex.add(v, ex.NEG_ONE)), Diff("u")),
        ex.mul(ex.ln(u), ex.power(u, v), Diff("v")),
    )
    assert got == want
    # constant exponent: dv = 0 leaves the plain power rule, no positivity needed
    assert differential(P("u^5")) == P("5*u^4*du")
    with pytest.raises(NonPositiveBase):
        differential(ex.power(u, v))


def test_positivity():
    a = Assumptions(positive={"u"})
    assert is_positive(P("u^2 + pi"), a)
    assert not is_positive(P("u - 1"), a)
    assert differential(P("(1 + u)^x"), a) is not None


def test_abs_has_no_rule():
    with pytest.raises(UnsupportedNode):
        differential(P("abs(x)"))


def test_deferred_nodes():
    assert resolve(P("d(x*y)")) == P("x*dy + y*dx")
    assert resolve(P("d2(x^3)"), X_INDEP) == P("6*x*dx^2")
    assert differential(P("d(x^2)")) == P("2*dx^2 + 2*x*d2x")


@given(smooth_expressions, smooth_expressions, st.integers(-3, 3))
def test_linearity(f, g, c):
    lhs = differential(ex.add(f, ex.mul(Num(c), g)))
    rhs = ex.add(differential(f), ex.mul(Num(c), differential(g)))
    assert lhs == rhs


@given(smooth_expressions, smooth_expressions)
def test_product_rule_symmetry(f, g):
    assert differential(ex.mul(f, g)) == differential(ex.mul(g, f))
    assert differential(ex.mul(f, g)) == ex.add(ex.mul(f, differential(g)), ex.mul(g, differential(f)))


@given(smooth_expressions, points(["x", "y", "z"]))
def test_partial_coefficients_match_finite_differences(e, env):
    d = differential(e)
    for var in ("x", "y", "z"):
        coeff = float(ex.numeric(dx_coefficient(d, var), env))
        fd = finite_difference(e, env, var)
        assert coeff == pytest.approx(fd, rel=1e-4, abs=1e-4)


@given(coefficient_lists, st.fractions(-3, 3, max_denominator=4))
def test_polynomial_differential_is_classical(cs, a):
    d = dx_coefficient(differential(polynomial(cs)))
    classical = sum(k * c * a ** (k - 1) for k, c in enumerate(cs) if k)
    assert ex.exact_value(d, {"x": a}) == classical


positive_factors = st.lists(
    st.tuples(st.integers(1, 4), st.integers(0, 3), st.integers(1, 3)), min_size=1, max_size=4
)


@given(positive_factors, st.floats(0.2, 3.0))
def test_product_to_sum_identity(spec, x0):
    # y = Π f_j  =>  dy = y * Σ d(ln f_j), with each f_j = a + b*x^k > 0 for x > 0
    fs = [ex.add(Num(a), ex.mul(Num(b), ex.power(Sym("x"), Num(k)))) for a, b, k in spec]
    y = ex.mul(*fs)
    lhs = dx_coefficient(differential(y))
    rhs = ex.mul(y, ex.add(*(dx_coefficient(differential(ex.ln(f))) for f in fs)))
    l, r = float(ex.numeric(lhs, {"x": x0})), float(ex.numeric(rhs, {"x": x0}))
    assert abs(l - r) <= 1e-10 * max(1.0, abs(l))


def test_generalized_power_rule_matches_finite_differences():
    a = Assumptions(positive={"u"})
    e = P("u^v")
    d = differential(e, a)
    for u0, v0 in [(0.5, 2.0), (1.7, -0.3), (3.0, 1.5)]:
        env = {"u": u0, "v": v0}
        for var in ("u", "v"):
            coeff = float(ex.numeric(dx_coefficient(d, var), env))
            assert coeff == pytest.approx(finite_difference(e, env, var), rel=1e-6)
    assert math.isclose(float(ex.numeric(dx_coefficient(d, "v"), {"u": math.e, "v": 0.0})), 1.0)
