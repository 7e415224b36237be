"""
Piecewise-constant families: the equilibrium threshold
======================================================

Cells take up quartz at a constant rate k and clear it (p = 1) up to a
load horizon N; above the horizon they die instead (q = 1).  This demo
walks the whole equilibrium story for one family: where F peaks, which
inflows admit equilibria, and what the root structure looks like.
"""

import numpy as np

from quartzeq import (
    F_piecewise,
    PiecewiseConstantFamily,
    F_equilibrium,
    alpha_star,
    solve_roots,
    stationary_point,
)

k, N = 1.0, 1
fam = PiecewiseConstantFamily(k, N)

# --- the equilibrium function has one interior maximum -------------------
# F(x) tells us which inflow-to-supply ratios alpha/r an equilibrium can
# absorb at free-quartz level x.  It rises from 0, peaks, and decays.
print("x        F(x)")
for x in np.geomspace(0.01, 100.0, 9):
    print(f"{x:8.3f} {F_piecewise(k, N, float(x)):.6f}")

y_star, x_star, f_max = stationary_point(k, N)
print(f"\npeak: x* = {x_star:.12f}, F_max = {f_max:.12f} (y* = {y_star})")
print(f"critical inflow at r = 1: alpha* = {alpha_star(k, N, 1.0):.12f}")

# --- the closed form agrees with the certified series --------------------
# The same value can be summed term by term with a rigorous tail bound;
# the closed form must land inside that interval.
x = 0.7
bv = F_equilibrium(fam, x)
print(f"\nseries F({x}) = {bv.value!r} +/- {bv.tail_bound:.2e} ({bv.terms_used} terms)")
print(f"closed F({x}) = {F_piecewise(k, N, x)!r}")

# --- root structure across the threshold ----------------------------------
# Below alpha*: two equilibria (the smaller one is the stable branch).
# At alpha*: the branches merge into a tangent root.  Above: none.
for alpha in (0.2, 0.25, 0.3):
    rep = solve_roots(k, N, 1.0, alpha)
    roots = ", ".join(f"{root:.12f}" for root in rep.roots) or "-"
    print(f"alpha = {alpha}: {rep.classification:10s} roots: {roots}")

# At alpha = 0.2 the two roots are (3 -/+ sqrt 5)/2; check digit for digit.
rep = solve_roots(k, N, 1.0, 0.2)
print(f"\nlow root  - (3-sqrt5)/2 = {rep.roots[0] - (3 - 5**0.5) / 2:.2e}")
print(f"high root - (3+sqrt5)/2 = {rep.roots[1] - (3 + 5**0.5) / 2:.2e}")
