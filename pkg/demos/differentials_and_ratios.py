"""
Differentials as algebra
========================

Take d of both sides of an equation, then solve for whichever ratio you want.
"""

from leibniz import differential, parse, partial_ratio, second_derivative, solve

# d of a product: d(uv) = u dv + v du
print(differential(parse("x*y")))

# implicit relation x*y = 5; the solver reports what it divided by
sol = solve("x*y = 5", "dy/dx")
print("dy/dx =", sol.expr, " assuming", ", ".join(sol.side_conditions))

# related rates: area of a growing circle
print("dA/dt =", solve(["A = pi*r^2"], "dA/dt").expr)

# a relation with three variables leaves a leftover ratio
print("dy/dz =", solve("z^2 = x*y", "dy/dz").expr)
# ...which disappears once x is held fixed
print("(dy/dz)_x =", partial_ratio("z^2 = x*y", "dy/dz", held=["x"]))

# second derivatives: explicit, parametric and implicit
print("y = x^3:", second_derivative("y = x^3", "y", "x"))
print("x = t^2, y = t^3:", second_derivative(["x = t^2", "y = t^3"], "y", "x"))
print("x*y = 5:", second_derivative("x*y = 5", "y", "x"))
