"""Sample a perturbed lattice and compare the empirical count statistics
with the exact mean and variance.

Run:  python demos/01_sampling_and_exact_moments.py
"""

import numpy as np

from perturbed_lattice import (ProcessConfig, ball, mean_exact, run_mc, sample_statistic,
                               variance_exact, variance_realspace, zscore)

# A disc of radius R = 10 and Gaussian displacements with a = 1.
h = ball(2)
cfg = ProcessConfig(d=2, a=1.0, R=10.0, seed=2024)

# One realisation, keeping the displaced points.
r = sample_statistic(cfg, h, rng_stream=0, keep_points=True)
print("points in the disc:", int(r.value), "of", len(r.points), "simulated sites")
print("excluded-site tail bound:", r.tail_bound)

# Exact moments, two independent ways for the variance.
mean = mean_exact(h, cfg.R, cfg.a)
var_f = variance_exact(h, cfg.R, cfg.a)
var_r = variance_realspace(h, cfg.R, cfg.a)
print(f"exact mean        {mean.value:.6f}   (area {np.pi * cfg.R**2:.6f})")
print(f"variance, Fourier {var_f.value:.10f}")
print(f"variance, lattice {var_r:.10f}")

# Monte Carlo check.
est = run_mc(cfg, h, 20_000)
z = zscore(est, mean.value, var_r)
print(f"MC mean {est.mean:.3f} +- {est.se_mean:.3f}, var {est.variance:.3f} +- {est.se_variance:.3f}")
print(f"z-scores: mean {z.mean:+.2f}, variance {z.variance:+.2f}")
