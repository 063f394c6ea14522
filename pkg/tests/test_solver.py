import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leibniz import expr as ex
from leibniz.errors import (
    HeldTargetConflict, NotLinearInDifferentials, TargetAbsent, UnderdeterminedSystem,
)
from leibniz.expr import Assumptions, Diff, Equation, Num, Sym
from leibniz.parser import parse_equation as Q
from leibniz.parser import parse_expr as P
from leibniz.solver import (
    RatioTarget, monomial_form, partial_ratio, second_derivative, solve, solve_for_ratio,
)

from strategies import coefficient_lists, polynomial

T_INDEP = Assumptions(independent={"t"})


def test_ratio_target():
    t = RatioTarget.parse("dy/dx")
    assert (t.numerator, t.denominator) == (Diff("y"), Diff("x"))
    assert str(t) == "dy/dx"
    with pytest.raises(ValueError):
        RatioTarget(Diff("y", 2), Diff("x"))
    with pytest.raises(ValueError):
        RatioTarget(Diff("x"), Diff("x"))


def test_implicit_hyperbola():
    sol = solve(Q("x*y = 5"), "dy/dx")
    assert sol.expr == P("-y/x")
    assert sol.side_conditions == ("x != 0",)


def test_explicit_and_implicit_circle():
    assert solve_for_ratio(Q("y = x^3"), "dy/dx") == P("3*x^2")
    assert solve_for_ratio(Q("x^2 + y^2 = 1"), "dy/dx") == P("-x/y")


def test_multivariable_keeps_free_ratio():
    got = solve_for_ratio(Q("z^2 = x*y"), "dy/dz")
    assert got == P("2*z/x - (y/x)*(dx/dz)")


def test_related_rates_divide_by_dt():
    assert solve_for_ratio(Q("A = pi*r^2"), "dA/dt") == P("2*pi*r*dr/dt")
    # ladder: x^2 + y^2 = 25, rate of y from rate of x
    assert solve_for_ratio(Q("x^2 + y^2 = 25"), "dy/dt") == P("-(x/y)*dx/dt")


def test_system_eliminates_intermediate():
    got = solve_for_ratio([Q("y = x^3"), Q("x = sin(t)")], "dy/dt")
    assert got == P("3*x^2*cos(t)")


def test_target_absent_and_nonlinear():
    with pytest.raises(TargetAbsent):
        solve_for_ratio(Q("x^2 = 4"), "dy/dx")
    with pytest.raises(NotLinearInDifferentials):
        monomial_form(P("sin(dx)"))
    assert monomial_form(P("3*x*dx^2 + y*dx*dy")) == {P("dx^2"): P("3*x"), P("dx*dy"): Sym("y")}


def test_partial_ratio():
    assert partial_ratio(Q("z^2 = x*y"), "dy/dz", {"x"}) == P("2*z/x")
    assert partial_ratio(Q("z^2 = x*y"), "dy/dx", {"z"}) == P("-y/x")
    with pytest.raises(HeldTargetConflict):
        partial_ratio(Q("z^2 = x*y"), "dy/dz", {"z"})
    with pytest.raises(UnderdeterminedSystem):
        partial_ratio(Q("w = x*y*z"), "dw/dx", {"y"})


def test_second_derivative_explicit():
    assert second_derivative(Q("y = x^3"), "y", "x") == P("6*x")
    assert second_derivative(Q("y = x^3"), "y", "x", Assumptions(independent={"x"})) == P("6*x")
    raw = second_derivative(Q("y = x^3"), "y", "x", resolve=False)
    assert raw == P("d2y/dx^2 - 3*x^2*d2x/dx^2")


def test_second_derivative_parametric():
    # classical parametric oracle: (y''x' - y'x'')/x'^3 with x = t^2, y = t^3
    got = second_derivative([Q("x = t^2"), Q("y = t^3")], "y", "x", T_INDEP)
    assert got == P("3/(4*t)")
    xp, xpp, yp, ypp = P("2*t"), Num(2), P("3*t^2"), P("6*t")
    classical = ex.mul(ex.add(ex.mul(ypp, xp), ex.mul(ex.NEG_ONE, yp, xpp)), ex.power(xp, Num(-3)))
    assert ex.normalize(classical) == got


def test_second_derivative_change_of_variables():
    got = second_derivative([Q("y = x^3"), Q("x = sin(t)")], "y", "t", T_INDEP)
    f = ex.substitute(got, {"x": P("sin(t)")})
    g = lambda t: math.sin(t) ** 3
    h = 1e-4
    for t0 in np.linspace(-1.4, 1.4, 30):
        fd = (g(t0 + h) - 2 * g(t0) + g(t0 - h)) / h**2
        val = float(ex.numeric(f, {"t": t0}))
        assert abs(val - fd) <= 1e-5 * max(1.0, abs(fd))


def test_second_derivative_implicit_matches_classical():
    # x*y = 5: y = 5/x, y'' = 10/x^3
    got = second_derivative(Q("x*y = 5"), "y", "x")
    for x0 in (0.5, 1.0, 3.0):
        val = float(ex.numeric(ex.substitute(got, {"y": ex.mul(Num(5), ex.power(Sym("x"), ex.NEG_ONE))}), {"x": x0}))
        assert val == pytest.approx(10 / x0**3, rel=1e-12)


@given(coefficient_lists, st.fractions(-3, 3, max_denominator=5))
def test_solver_matches_classical_derivative(cs, a):
    # y = p(x): dy/dx from the solver against the power rule on coefficients
    eq = Equation(Sym("y"), polynomial(cs))
    got = solve_for_ratio(eq, "dy/dx")
    classical = sum(k * c * a ** (k - 1) for k, c in enumerate(cs) if k)
    assert ex.exact_value(got, {"x": a}) == classical


@given(
    st.lists(st.tuples(st.integers(-3, 3), st.integers(0, 3), st.integers(0, 3)), min_size=2, max_size=5),
    st.floats(0.5, 2.0),
    st.floats(0.5, 2.0),
)
def test_inverse_ratios_multiply_to_one(terms, x0, y0):
    # F(x, y) = 0 with F a random polynomial; (dy/dx)*(dx/dy) = 1 wherever both exist
    F = ex.add(*(ex.mul(Num(c), ex.power(Sym("x"), Num(i)), ex.power(Sym("y"), Num(j))) for c, i, j in terms))
    eq = Equation(F, ex.ZERO)
    try:
        dydx = solve_for_ratio(eq, "dy/dx")
        dxdy = solve_for_ratio(eq, "dx/dy")
    except TargetAbsent:
        return
    env = {"x": x0, "y": y0}
    with np.errstate(all="ignore"):
        prod = float(ex.numeric(dydx, env)) * float(ex.numeric(dxdy, env))
    if np.isfinite(prod) and prod != 0:
        assert abs(prod - 1) <= 1e-10
