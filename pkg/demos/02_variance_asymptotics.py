"""Variance growth of linear statistics as the window grows.

Smooth statistics have bounded variance tending to (a/2) int |grad h|^2;
indicator statistics grow like the surface area, Var / R^(d-1) tending to
sqrt(a / 2 pi) times the surface area.

Run:  python demos/02_variance_asymptotics.py
"""

from perturbed_lattice import asymptotic_target, ball, gauss_pi, variance_exact, variance_realspace

a = 1.0

g = gauss_pi(2)
print("Gaussian bump, target", asymptotic_target(g, a))
for R in (5, 10, 20, 40):
    print(f"  R={R:>3}  Var={variance_exact(g, R, a).value:.6f}")

disc = ball(2)
print("disc, target", asymptotic_target(disc.body, a))
for R in (10, 25, 50, 100):
    print(f"  R={R:>3}  Var/R={variance_realspace(disc, R, a) / R:.6f}")
