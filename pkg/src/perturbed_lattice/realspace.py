"""Real-space oracle: exact per-site Gaussian measures summed over the lattice.

Every site n contributes independently, so

    E N = sum_n E h((n + x + xi) / R),      Var N = sum_n Var h((n + x + xi) / R)

for a deterministic shift x. For indicators the per-site law is Bernoulli with
the inclusion probability p_n. The stationarised process is handled by the law
of total variance over the uniform shift.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import special

from ._quadrature import composite_gl, gauss_legendre
from .errors import NotSamplableError, UnsupportedDimensionError
from .point_process import ProcessConfig, _make_window, enumerate_window
from .test_functions import ConvexBody, TestFunction, ball, cube

# Gaussian displacements beyond this many standard deviations are ignored
_SIGMA_CUT = 10.0
_HERMITE_ORDER = 40


def _as_body(obj):
    if isinstance(obj, ConvexBody):
        return obj
    if isinstance(obj, TestFunction) and obj.is_indicator and obj.body is not None:
        return obj.body
    raise ValueError("expected a ball or cube body (or its indicator)")


def _indicator(body):
    return cube(body.d) if body.shape == "cube" else ball(body.d, body.radius)


def _interval_mass(lo, hi, sigma):
    """P(lo <= X <= hi) for X ~ N(0, sigma^2), accurate in both tails."""
    lo = np.asarray(lo, dtype=float) / sigma
    hi = np.asarray(hi, dtype=float) / sigma
    upper = special.ndtr(-lo) - special.ndtr(-hi)
    lower = special.ndtr(hi) - special.ndtr(lo)
    return np.clip(np.where(lo > 0, upper, lower), 0.0, 1.0)


def _ball_mass(rho, radius, sigma, d, order=12):
    """P(|c + xi| <= radius) for |c| = rho, xi ~ N(0, sigma^2 I_d), vectorised over rho.

    The transverse radius s = radius * sin(t) is integrated against its chi
    density; the axial coordinate then contributes an interval mass over the
    chord of half-length radius * cos(t).
    """
    rho = np.asarray(rho, dtype=float)
    if d == 1:
        return _interval_mass(-rho - radius, -rho + radius, sigma)
    t_max = math.asin(min(1.0, _SIGMA_CUT * sigma / radius))
    width = min(0.2, 0.5 * sigma / radius)
    t, w = composite_gl(0.0, t_max, width, order)
    s = radius * np.sin(t)
    half = radius * np.cos(t)
    if d == 2:
        dens = 2.0 * np.exp(-0.5 * (s / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
    elif d == 3:
        dens = s / sigma**2 * np.exp(-0.5 * (s / sigma) ** 2)
    else:
        raise UnsupportedDimensionError("ball measures are implemented for d <= 3")
    wt = w * dens * half
    out = np.empty(rho.shape)
    flat = rho.ravel()
    res = out.reshape(-1)
    for i in range(0, len(flat), 2048):
        r = flat[i:i + 2048, None]
        res[i:i + 2048] = np.sum(wt[None, :] * _interval_mass(-r - half, -r + half, sigma), axis=1)
    return np.clip(out, 0.0, 1.0)


def inclusion_probability(body, R, shift, n, a):
    """P(n + xi_n in R K + shift), vectorised over rows of ``n``."""
    body = _as_body(body)
    if not (R > 0 and a > 0):
        raise ValueError("R and a must be positive")
    n = np.asarray(n, dtype=float)
    single = n.ndim == 1
    n = np.atleast_2d(n)
    c = n - np.asarray(shift, dtype=float)
    sigma = math.sqrt(a / 2.0)
    if body.shape == "cube":
        half = 0.5 * R
        p = np.prod(_interval_mass(-half - c, half - c, sigma), axis=1)
    else:
        p = _ball_mass(np.sqrt(np.sum(c * c, axis=1)), R * body.radius, sigma, body.d)
    return float(p[0]) if single else p


def _window(h, R, a, tol, shift=None):
    cfg = ProcessConfig(d=h.d, a=a, R=R)
    win = enumerate_window(h, cfg, tol)
    if shift is None or len(win) == 0:
        return win
    # widen so that any shift in [0, 1]^d stays covered
    return _make_window(win.center, win.radius + math.sqrt(h.d), win.tail_bound)


def _oracle_window(h, R, a, tol, widen=False):
    """Sites for the oracle sums; smooth functions use the Hermite-node reach."""
    if h.support_radius is not None or h.is_zero:
        return _window(h, R, a, tol, shift=True if widen else None)
    reach = math.sqrt(a) * float(np.max(np.polynomial.hermite.hermgauss(_HERMITE_ORDER)[0]))
    radius = R * h.effective_radius(tol * 1e-6) + reach * math.sqrt(h.d) + (math.sqrt(h.d) if widen else 0.0)
    return _make_window((0.0,) * h.d, radius, tol)


def _site_moments(h, R, a, sites, shift):
    """Per-site (E h, Var h) of h((n + shift + xi) / R)."""
    c = sites + np.asarray(shift, dtype=float)
    if h.is_indicator:
        p = inclusion_probability(_as_body(h), R, np.zeros(h.d), c, a)
        return p, p * (1.0 - p)
    x, w = np.polynomial.hermite.hermgauss(_HERMITE_ORDER)
    d = h.d
    nodes = np.array(list(itertools.product(x, repeat=d))) * math.sqrt(a)
    weights = np.prod(np.array(list(itertools.product(w, repeat=d))), axis=1) * math.pi ** (-d / 2)
    mean = np.empty(len(c))
    var = np.empty(len(c))
    step = max(1, 4_000_000 // len(nodes))
    for i in range(0, len(c), step):
        cc = c[i:i + step]
        centre = h.evaluate(cc / R)
        vals = h.evaluate((cc[:, None, :] + nodes[None, :, :]) / R) - centre[:, None]
        m1 = vals @ weights
        # centred form keeps small variances accurate
        mean[i:i + step] = centre + m1
        var[i:i + step] = np.maximum((vals * vals) @ weights - m1 * m1, 0.0)
    return mean, var


def _check(h):
    if h.evaluate is None:
        raise NotSamplableError(f"{h.key} has no real-space evaluator")


def mean_realspace(h, R, a, tol=1e-12, shift=None):
    """sum_n E h((n + shift + xi_n) / R) over a window whose excluded tail is below ``tol``."""
    _check(h)
    if h.is_zero:
        return 0.0
    shift = np.zeros(h.d) if shift is None else np.asarray(shift, dtype=float)
    win = _oracle_window(h, R, a, tol, widen=bool(np.any(shift)))
    mean, _ = _site_moments(h, R, a, win.sites, shift)
    return float(np.sum(mean))


def variance_realspace(h, R, a, tol=1e-12, shift=None):
    """sum_n Var h((n + shift + xi_n) / R); for indicators sum_n p_n (1 - p_n)."""
    _check(h)
    if h.is_zero:
        return 0.0
    shift = np.zeros(h.d) if shift is None else np.asarray(shift, dtype=float)
    win = _oracle_window(h, R, a, tol, widen=bool(np.any(shift)))
    _, var = _site_moments(h, R, a, win.sites, shift)
    return float(np.sum(var))


def _shift_grid(d, order):
    if d > 2:
        raise UnsupportedDimensionError("shift averaging is implemented for d <= 2")
    x, w = gauss_legendre(0.0, 1.0, order)
    pts = np.array(list(itertools.product(x, repeat=d)))
    wts = np.prod(np.array(list(itertools.product(w, repeat=d))), axis=1)
    return pts, wts


def _shift_moments(h, R, a, order, tol):
    pts, wts = _shift_grid(h.d, order)
    win = _oracle_window(h, R, a, tol, widen=True)
    means = np.empty(len(pts))
    variances = np.empty(len(pts))
    for k, z in enumerate(pts):
        m, v = _site_moments(h, R, a, win.sites, z)
        means[k], variances[k] = np.sum(m), np.sum(v)
    return wts, means, variances


def variance_stationary_realspace(h, R, a, order=16, tol=1e-12, return_parts=False):
    """E_zeta[Var(N | zeta)] + Var_zeta(E[N | zeta]) by Gauss-Legendre over zeta in [0, 1]^d."""
    _check(h)
    if h.is_zero:
        return (0.0, 0.0, 0.0) if return_parts else 0.0
    wts, means, variances = _shift_moments(h, R, a, order, tol)
    avg_var = float(wts @ variances)
    centre = float(wts @ means)
    var_mean = float(wts @ (means - centre) ** 2)
    total = avg_var + var_mean
    return (total, avg_var, var_mean) if return_parts else total


def averaged_variance(body, R, a, order=16, tol=1e-12):
    """Average over x in [0, 1]^d of Var n(R K + x) = sum_n p_n(x) (1 - p_n(x))."""
    h = _indicator(_as_body(body))
    wts, _, variances = _shift_moments(h, R, a, order, tol)
    return float(wts @ variances)


def theta_periodization(x, a, n_max=None):
    """(sum_{|n| <= n_max} phi_a(x - n), sum_{|m| <= n_max} exp(-a pi^2 |m|^2) cos(2 pi <m, x>)).

    Returns the two sums and a bound on the larger of their truncation tails.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = len(x)
    if n_max is None:
        n_max = int(math.ceil(math.sqrt(40.0 * max(a, 1.0 / (a * math.pi**2))))) + 2
    k = np.arange(-n_max, n_max + 1)
    real_1d = np.array([np.sum(np.exp(-(xj - k) ** 2 / a)) for xj in x]) / math.sqrt(math.pi * a)
    four_1d = [np.sum(np.exp(-a * math.pi**2 * k * k) * np.exp(2j * math.pi * k * xj)) for xj in x]
    real = float(np.prod(real_1d))
    fourier = float(np.real(np.prod(four_1d)))
    return real, fourier, _theta_tail_bound(x, a, n_max, real_1d)


def _theta_tail_bound(x, a, n_max, real_1d):
    """Bound on both truncation errors: prod(S + T) - prod(S) per side, T a geometric tail."""
    gap = n_max + 1 - np.abs(x)
    if np.any(gap <= 0):
        return math.inf
    r_tail = 2.0 * np.exp(-gap**2 / a) / (math.sqrt(math.pi * a) * -np.expm1(-2.0 * gap / a))
    c = a * math.pi**2
    m1 = n_max + 1
    f_tail = 2.0 * math.exp(-c * m1 * m1) / -math.expm1(-c * (2 * m1 + 1))
    f_head = 1.0 + 2.0 * sum(math.exp(-c * j * j) for j in range(1, n_max + 1))
    bound_real = float(np.prod(real_1d + r_tail) - np.prod(real_1d))
    bound_four = (f_head + f_tail) ** len(x) - f_head ** len(x)
    return max(bound_real, bound_four)
