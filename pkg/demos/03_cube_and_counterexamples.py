"""Where the smooth picture breaks down.

* The cube mean oscillates around R^d at non-integer R.
* The stationarised cube variance grows faster than the surface area.
* A function in H^1 with a lattice of shrinking Fourier bumps has a
  stationary variance growing faster than R^(d-2).

Small dispersions are used so that the lattice terms are visible at moderate R.

Run:  python demos/03_cube_and_counterexamples.py
"""

from perturbed_lattice import cube, mean_exact, sobolev_g, variance_exact, variance_stationary

q1 = cube(1)
for R in (10.0, 10.25, 10.5, 10.75):
    print(f"cube mean - R at R={R:<6} {mean_exact(q1, R, 0.25).value - R:+.6f}")

q2 = cube(2)
print("\nstationary vs plain cube variance over R, a = 0.01")
for R in (10.5, 20.5, 40.5):
    vs = variance_stationary(q2, R, 0.01).value / R
    v = variance_exact(q2, R, 0.01).value / R
    print(f"  R={R:<5} Var_s/R={vs:9.4f}   Var/R={v:.6f}")

g = sobolev_g(2, 0.1)
print("\nH^1 counterexample, a = 0.05")
for R in (8, 16, 32):
    res = variance_stationary(g, R, 0.05)
    print(f"  R={R:>3} Var_s={res.value:10.4f}  (continuum part {res.extras['A0']:.4f})")
