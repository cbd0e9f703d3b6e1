"""Small numerical helpers: composite Gauss-Legendre rules, theta sums, sinc."""

from functools import lru_cache
import math

import numpy as np


@lru_cache(maxsize=64)
def _gl(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(lo, hi, order):
    """Nodes and weights of an ``order``-point Gauss-Legendre rule on [lo, hi]."""
    x, w = _gl(order)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def composite_gl(lo, hi, panel_width, order):
    """Composite Gauss-Legendre rule on [lo, hi] with panels of at most ``panel_width``."""
    if hi <= lo:
        return np.empty(0), np.empty(0)
    n_panels = max(1, int(math.ceil((hi - lo) / panel_width)))
    edges = np.linspace(lo, hi, n_panels + 1)
    x, w = _gl(order)
    half = 0.5 * np.diff(edges)
    nodes = edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def sinc(x):
    """Unnormalised sinc, sin(x)/x, with a Taylor branch near zero."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    x2 = x * x
    taylor = 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0
    return np.where(small, taylor, np.sin(safe) / safe)


def theta_1d(c, n_max):
    """Partial theta sum  sum_{|k| <= n_max} exp(-c k^2)."""
    k = np.arange(1, n_max + 1, dtype=float)
    return 1.0 + 2.0 * float(np.sum(np.exp(-c * k * k)))


def theta_tail(c, m_max, d):
    """Tail  sum_{m in Z^d, |m|_inf > m_max} exp(-c |m|^2)  of a d-dimensional theta sum.

    The one-dimensional tail beyond m_max is bounded by a geometric series, so the
    returned number is an upper bound (not an estimate).
    """
    if c <= 0:
        return math.inf
    head = theta_1d(c, m_max)
    # sum_{k > m_max} e^{-c k^2} <= e^{-c (m+1)^2} / (1 - e^{-c (2m+3)})
    m1 = m_max + 1
    tail1 = 2.0 * math.exp(-c * m1 * m1) / -math.expm1(-c * (2 * m1 + 1))
    full = head + tail1
    return full**d - head**d


def unit_sphere_area(d):
    """Surface area of the unit sphere S^{d-1} in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def default_m_max(a):
    """Default lattice truncation ceil(sqrt(40 / (a pi^2))) + 1."""
    return int(math.ceil(math.sqrt(40.0 / (a * math.pi**2)))) + 1
