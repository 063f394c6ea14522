"""
Integrals as sums of slices
===========================

An exact differential form has a potential; its total change along any path
is the difference of the potential at the endpoints.  Shapes that are not
covered by a formula are summed numerically.
"""

import numpy as np

from leibniz import SumSpec, antidifferential, infinite_sum, total_difference

p = antidifferential("dy + dx")
print(p, "  total from (2,3) to (7,4):", total_difference(p, {"x": 2, "y": 3}, {"x": 7, "y": 4}))

p = antidifferential("2*x*y*dx + x^2*dy")
print(p, "  total from (0,0) to (1,2):", total_difference(p, {"x": 0, "y": 0}, {"x": 1, "y": 2}))

# area under a parabola
print("area under x^2 on [0,1]:", infinite_sum(SumSpec("x^2*dx", "x", 0, 1)))

# arc length of y = x^2: each slice is sqrt(dx^2 + dy^2) on the curve
s = infinite_sum(SumSpec("(dx^2 + dy^2)^(1/2)", "x", 0, 1, curve="y = x^2"))
exact = np.sqrt(5) / 2 + np.arcsinh(2) / 4
print(f"arc length: {s:.12f} (closed form {exact:.12f})")

# volume of a sphere of radius 1 from discs
r = infinite_sum(SumSpec("pi*(1 - x^2)*dx", "x", -1, 1), full_output=True)
print(f"sphere volume: {r.value:.12f} from {r.slices} slices (4/3 pi = {4 * np.pi / 3:.12f})")
