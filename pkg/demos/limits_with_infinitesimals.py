"""
Limits by substitution
======================

Replace x with a + eps, simplify the truncated eps-series and keep the
standard part.
"""

from leibniz import hr_eval, limit, parse_expr, slope_at

f = parse_expr("(x^2 - 25)/(x - 5)")

# the series itself shows the infinitesimal tail
print(hr_eval(f, {"x": parse_expr("5 + eps")}))
print("limit at 5+:", limit(f, "x", "5", side="right"))

# classic cases
print("sin(x)/x at 0:", limit(parse_expr("sin(x)/x"), "x", "0"))
print("(1 - cos(x))/x^2 at 0:", limit(parse_expr("(1 - cos(x))/x^2"), "x", "0"))
print("(3x^2 + 1)/(x^2 - 2) at oo:", limit(parse_expr("(3*x^2 + 1)/(x^2 - 2)"), "x", "oo"))

# one-sided limits can disagree
r = limit(parse_expr("abs(x)/x"), "x", "0")
print("abs(x)/x at 0:", r, f"({r.reason})")
print("1/x at 0+:", limit(parse_expr("1/x"), "x", "0", side="right"))

# slopes as standard parts of difference quotients
for a in ("0", "1", "2"):
    print(f"slope of x^3 at {a}:", slope_at(parse_expr("x^3"), "x", a))
