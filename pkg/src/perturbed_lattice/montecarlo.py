"""Monte Carlo estimates of the mean and variance of linear statistics.

Replicates are split into fixed-size blocks. Each block is summarised by its
central moments and the blocks are merged in index order, so the result does
not depend on how many workers computed them.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math
from typing import NamedTuple

import numpy as np

from .errors import NotSamplableError
from .point_process import ProcessConfig, enumerate_window, sample_statistics

BLOCK = 4096


@dataclass(frozen=True)
class Accumulator:
    """Count, mean and central moment sums M2, M3, M4 of a stream of values."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    @classmethod
    def from_values(cls, values):
        x = np.asarray(values, dtype=float)
        if x.size == 0:
            return cls()
        mu = float(np.mean(x))
        dev = x - mu
        dev2 = dev * dev
        return cls(int(x.size), mu, float(np.sum(dev2)), float(np.sum(dev2 * dev)),
                   float(np.sum(dev2 * dev2)))

    def merge(self, other):
        """Combine with a disjoint stream (pairwise update of central moments)."""
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        na, nb = self.n, other.n
        n = na + nb
        delta = other.mean - self.mean
        d_n = delta / n
        mean = self.mean + nb * d_n
        m2 = self.m2 + other.m2 + delta * d_n * na * nb
        m3 = (self.m3 + other.m3 + delta * d_n * d_n * na * nb * (na - nb)
              + 3.0 * d_n * (na * other.m2 - nb * self.m2))
        m4 = (self.m4 + other.m4
              + delta * d_n**3 * na * nb * (na * na - na * nb + nb * nb)
              + 6.0 * d_n * d_n * (na * na * other.m2 + nb * nb * self.m2)
              + 4.0 * d_n * (na * other.m3 - nb * self.m3))
        return Accumulator(n, mean, m2, m3, m4)

    @property
    def variance(self):
        """Unbiased sample variance."""
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0

    @property
    def mu4(self):
        return self.m4 / self.n if self.n else 0.0


@dataclass(frozen=True)
class McEstimate:
    n_replicates: int
    mean: float
    variance: float
    se_mean: float
    se_variance: float
    seed: int
    tail_bound: float = 0.0

    @classmethod
    def from_accumulator(cls, acc, seed, tail_bound=0.0):
        n = acc.n
        var = max(acc.variance, 0.0)
        se_mean = math.sqrt(var / n)
        # asymptotic variance of the sample variance from the fourth central moment
        pop_var = acc.m2 / n
        v4 = (acc.mu4 - (n - 3) / (n - 1) * pop_var * pop_var) / n
        return cls(n, acc.mean, var, se_mean, math.sqrt(max(v4, 0.0)), int(seed), tail_bound)


def run_mc(cfg, h, n_replicates, seed=None, workers=1, tol=1e-12):
    """Estimate E N and Var N from ``n_replicates`` replicates.

    ``seed`` overrides ``cfg.seed``. The output is identical for any ``workers``.
    """
    if n_replicates < 2:
        raise ValueError("n_replicates must be at least 2")
    if workers < 1:
        raise ValueError("workers must be positive")
    if h.evaluate is None or (not h.samplable and not h.is_zero):
        raise NotSamplableError(f"{h.key} is not samplable")
    if seed is not None:
        cfg = ProcessConfig(cfg.d, cfg.a, cfg.R, cfg.kind, int(seed))
    window = enumerate_window(h, cfg, tol)
    starts = list(range(0, n_replicates, BLOCK))

    def block(start):
        reps = np.arange(start, min(start + BLOCK, n_replicates))
        return Accumulator.from_values(sample_statistics(cfg, h, reps, window=window))

    if workers == 1:
        parts = [block(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, starts))
    acc = Accumulator()
    for part in parts:
        acc = acc.merge(part)
    return McEstimate.from_accumulator(acc, cfg.seed, window.tail_bound)


class ZScore(NamedTuple):
    mean: float
    variance: float
    degenerate: bool


def _z(diff, se):
    if se > 0:
        return diff / se, False
    return (0.0 if diff == 0 else math.copysign(math.inf, diff)), True


def zscore(est, exact_mean, exact_variance):
    """((mean - exact) / se_mean, (variance - exact) / se_variance) and a degeneracy flag.

    A zero standard error is flagged as degenerate; the corresponding z is 0
    when the discrepancy is also zero and infinite otherwise.
    """
    if est.n_replicates < 30:
        raise ValueError("z-scores need at least 30 replicates")
    zm, dm = _z(est.mean - exact_mean, est.se_mean)
    zv, dv = _z(est.variance - exact_variance, est.se_variance)
    return ZScore(zm, zv, dm or dv)
