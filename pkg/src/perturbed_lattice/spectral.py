"""Fourier-side formulas for the mean and variance of linear statistics.

With e(x) = exp(2 pi i x) and the Gaussian characteristic function
exp(-a pi^2 |lam|^2):

* mean:      E N(h,R)   = R^d sum_m exp(-a pi^2 |m|^2) h^(Rm)
* variance:  Var N(h,R) = sum_m A_m(h,R),

      A_m = R^d int h^(lam) h^(Rm - lam) (exp(-a pi^2 |m|^2)
                  - exp(-a pi^2 (|lam|^2 + |Rm - lam|^2) / R^2)) dlam

* stationary variance: A_0 + R^{2d} sum_{m != 0} exp(-2 a pi^2 |m|^2) |h^(Rm)|^2.

For m != 0 the undamped part of A_m is  exp(-a pi^2 |m|^2) (h^2)^(Rm)  and the
damped part is evaluated after the parallelogram identity

    |lam|^2 + |Rm - lam|^2 = (R^2 |m|^2 + |Rm - 2 lam|^2) / 2,

which turns it into an integral against a Gaussian centred at Rm/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import csv
import io
import itertools
import math
from typing import Optional

import numpy as np
from scipy import special

from ._quadrature import (composite_gl, default_m_max, gauss_legendre, theta_tail,
                          unit_sphere_area)
from .errors import QuadratureError, UnsupportedDimensionError
from .test_functions import BUMP_RADIUS, ConvexBody, TestFunction, bump, sobolev_G

SCHEMES = ("radial-1d", "separable-1d-products", "tensor-adaptive", "monte-carlo-importance")

# Gaussian factors below exp(-_GAUSS_CUT) are treated as zero when choosing domains
_GAUSS_CUT = 40.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature controls. ``scheme=None`` picks the best structured scheme."""

    scheme: Optional[str] = None
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_evaluations: int = 400_000_000
    order: int = 12
    mc_samples: int = 200_000
    mc_seed: int = 12345

    def __post_init__(self):
        if self.scheme is not None and self.scheme not in SCHEMES:
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.order < 6:
            raise ValueError("order must be at least 6")


@dataclass
class SpectralResult:
    """A lattice-indexed sum with its per-term breakdown.

    ``truncation_bound`` covers the omitted lattice terms; ``quad_error`` is the
    estimated quadrature error of the retained terms; ``imag_residue`` is the
    discarded imaginary part.
    """

    value: float
    breakdown: dict
    truncation_bound: float
    m_max: int
    quad_error: float = 0.0
    imag_residue: float = 0.0
    extras: dict = field(default_factory=dict)

    def rows(self):
        """Breakdown as rows ``(m_1, ..., m_d, value)`` in lexicographic m order."""
        return [tuple(m) + (v,) for m, v in sorted(self.breakdown.items())]

    def to_csv(self, d=None):
        """CSV text with columns m1..md, value, truncation_bound."""
        if d is None:
            d = len(next(iter(self.breakdown))) if self.breakdown else 1
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"m{j + 1}" for j in range(d)] + ["value", "truncation_bound"])
        for row in self.rows():
            w.writerow(list(row[:-1]) + [repr(float(row[-1])), repr(self.truncation_bound)])
        return buf.getvalue()


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _lattice(m_max, d):
    """All m in Z^d with |m|_inf <= m_max, lexicographic."""
    k = np.arange(-m_max, m_max + 1)
    return np.array(list(itertools.product(k, repeat=d)), dtype=np.int64).reshape(-1, d)


def _scheme(h, quad):
    if quad.scheme is not None:
        return quad.scheme
    if h.separable is not None and h.is_indicator:
        return "separable-1d-products"
    if h.radial is not None:
        return "radial-1d"
    return "tensor-adaptive"


def _sup_fourier(h):
    if h.l1_norm is not None:
        return h.l1_norm
    return h.meta.get("sup_G", math.inf)


def _panel_width(h, R, a):
    # resolve both the oscillation of h^ and the Gaussian damping
    osc = 0.5 / max(h.meta.get("frequency_scale", 1.0), 1e-12)
    if h.body is not None and h.body.shape == "ball":
        osc = 0.5 / max(h.body.radius, 1.0)
    damp = R / (math.pi * math.sqrt(2.0 * a))
    return min(osc, damp / 2.0)


def _half_width(R, a):
    return R * math.sqrt(_GAUSS_CUT / (2.0 * a * math.pi**2))


def _fourier_cutoff(h):
    # radius beyond which |h^| is negligible, if the function declares one
    return h.meta.get("fourier_cutoff", math.inf)


class _Integrator:
    """Composite Gauss-Legendre integration with a coarse companion rule for error estimates."""

    def __init__(self, quad):
        self.quad = quad
        self.evaluations = 0

    def rule(self, lo, hi, width, coarse=False):
        order = self.quad.order - 4 if coarse else self.quad.order
        return composite_gl(lo, hi, width, order)

    def line(self, f, lo, hi, width):
        x, w = self.rule(lo, hi, width)
        xc, wc = self.rule(lo, hi, width, coarse=True)
        self._charge(len(x) + len(xc))
        fine = np.sum(w * f(x))
        coarse = np.sum(wc * f(xc))
        return fine, abs(fine - coarse)

    def plane(self, f, tlo, thi, slo, shi, width):
        vals = []
        for coarse in (False, True):
            t, wt = self.rule(tlo, thi, width, coarse)
            s, ws = self.rule(slo, shi, width, coarse)
            self._charge(len(t) * len(s))
            total = 0.0
            # chunk over t so the grid stays small in memory
            step = max(1, 2_000_000 // max(len(s), 1))
            for i in range(0, len(t), step):
                tt = t[i:i + step, None]
                total += np.sum(wt[i:i + step, None] * ws[None, :] * f(tt, s[None, :]))
            vals.append(total)
        return vals[0], abs(vals[0] - vals[1])

    def _charge(self, n):
        self.evaluations += n
        if self.evaluations > self.quad.max_evaluations:
            raise QuadratureError(
                f"quadrature budget of {self.quad.max_evaluations} evaluations exceeded")


# --------------------------------------------------------------------------
# mean
# --------------------------------------------------------------------------


def mean_exact(h, R, a, m_max=None):
    """E N(h,R) = R^d sum_{|m|_inf <= m_max} exp(-a pi^2 |m|^2) h^(Rm)."""
    d = h.d
    if m_max is None:
        m_max = default_m_max(a)
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    ms = _lattice(m_max, d)
    if h.is_zero:
        return SpectralResult(0.0, {tuple(m): 0.0 for m in ms}, 0.0, m_max)
    weights = np.exp(-a * np.pi**2 * np.sum(ms * ms, axis=1))
    vals = np.asarray(h.fourier(R * ms.astype(float)))
    terms = R**d * weights * vals
    imag = float(abs(np.sum(np.imag(terms))))
    terms = np.real(terms)
    value = float(np.sum(terms))
    bound = R**d * _sup_fourier(h) * theta_tail(a * np.pi**2, m_max, d)
    return SpectralResult(value, {tuple(int(v) for v in m): float(t) for m, t in zip(ms, terms)},
                          bound, m_max, imag_residue=imag)


def mean_stationary(h, R):
    """E N_s(h,R) = R^d int h."""
    if h.is_zero:
        return 0.0
    if h.integral is None:
        raise ValueError(f"the integral of {h.key} is unknown")
    return float(R**h.d * h.integral)


# --------------------------------------------------------------------------
# the A_0 term
# --------------------------------------------------------------------------


def _damped_l2(h, R, a, integ):
    """int |h^(lam)|^2 exp(-2 a pi^2 |lam|^2 / R^2) dlam and its error estimate."""
    d = h.d
    c = 2.0 * a * np.pi**2 / R**2
    width = _panel_width(h, R, a)
    top = min(_half_width(R, a), _fourier_cutoff(h))
    scheme = _scheme(h, integ.quad)
    if scheme == "separable-1d-products":
        f = h.separable
        one, err = integ.line(lambda t: f(t) ** 2 * np.exp(-c * t * t), -top, top, width)
        return one**d, d * err * max(one, 1.0) ** (d - 1)
    if scheme == "radial-1d":
        area = unit_sphere_area(d)
        val, err = integ.line(
            lambda r: np.abs(h.radial(r)) ** 2 * np.exp(-c * r * r) * r ** (d - 1), 0.0, top, width)
        return area * val, area * err
    if d == 1:
        val, err = integ.line(
            lambda t: np.abs(h.fourier(t[:, None])) ** 2 * np.exp(-c * t * t), -top, top, width)
        return val, err
    if d == 2:
        def f(t, s):
            lam = np.stack(np.broadcast_arrays(t, s), axis=-1)
            return np.abs(h.fourier(lam)) ** 2 * np.exp(-c * (t * t + s * s))
        return integ.plane(f, -top, top, -top, top, width)
    raise UnsupportedDimensionError("tensor quadrature is limited to d <= 2")


def a0_term(h, R, a, quad=None):
    """A_0(h,R) = R^d int |h^|^2 (1 - exp(-2 a pi^2 |lam|^2 / R^2)) and its error estimate."""
    quad = quad or QuadratureSpec()
    if h.is_zero:
        return 0.0, 0.0
    if "spec" in h.meta:
        return _sobolev_a0(h, R, a, quad)
    if h.l2_norm_sq is None:
        raise ValueError(f"the L2 norm of {h.key} is unknown")
    integ = _Integrator(quad)
    if _scheme(h, quad) == "monte-carlo-importance":
        damped, err = _mc_damped(h, np.zeros(h.d), R, a, quad)
    else:
        damped, err = _damped_l2(h, R, a, integ)
    return float(R**h.d * (h.l2_norm_sq - damped)), float(R**h.d * err)


def _sobolev_a0(h, R, a, quad):
    spec = h.meta["spec"]
    d = spec.d
    c = 2.0 * a * np.pi**2 / R**2
    r, wr = composite_gl(0.0, BUMP_RADIUS, BUMP_RADIUS / 8, quad.order)
    # direction cosine u = cos(angle to the sublattice axis)
    if d == 2:
        th, wth = gauss_legendre(0.0, np.pi, 2 * quad.order)
        u, wu = np.cos(th), 2.0 * wth
    else:
        u, wu = gauss_legendre(-1.0, 1.0, 2 * quad.order)
        wu = 2.0 * np.pi * wu
    radial_w = wr * bump(r) ** 2 * r ** (d - 1)
    j = np.arange(1, spec.M + 1, dtype=float)
    b, cm = spec.b(j), spec.c(j)
    total = 0.0
    for lo in range(0, len(j), 256):
        jj, bb, cc = j[lo:lo + 256, None, None], b[lo:lo + 256, None, None], cm[lo:lo + 256, None, None]
        rr, uu = r[None, :, None], u[None, None, :]
        dist2 = jj * jj + 2.0 * jj * bb * rr * uu + bb * bb * rr * rr
        inner = -np.expm1(-c * dist2)
        per_bump = np.sum(radial_w[None, :, None] * wu[None, None, :] * inner, axis=(1, 2))
        # +j and -j bumps contribute equally
        total += float(np.sum(2.0 * cc[:, 0, 0] ** 2 * bb[:, 0, 0] ** d * per_bump))
    return R**d * total, 0.0


# --------------------------------------------------------------------------
# the m != 0 terms
# --------------------------------------------------------------------------


def _damped_cross(h, eta_vec, R, a, integ):
    """int h^(lam) h^(eta - lam) exp(-2 a pi^2 |lam - eta/2|^2 / R^2) dlam (no m prefactor)."""
    d = h.d
    c = 2.0 * a * np.pi**2 / R**2
    width = _panel_width(h, R, a)
    L = _half_width(R, a)
    scheme = _scheme(h, integ.quad)
    if scheme == "radial-1d":
        eta = float(np.sqrt(np.sum(eta_vec * eta_vec)))
        cut = _fourier_cutoff(h)
        if eta > 2.0 * cut:
            return 0.0, 0.0
        t0 = eta / 2.0
        L = min(L, cut + 1.0)
        rad = h.radial
        if d == 1:
            return integ.line(
                lambda t: rad(np.abs(t)) * rad(np.abs(eta - t)) * np.exp(-c * (t - t0) ** 2),
                t0 - L, t0 + L, width)
        # axial symmetry about the eta direction: (t along eta, s = transverse radius)
        shell = 2.0 if d == 2 else 2.0 * np.pi

        def f(t, s):
            p = rad(np.sqrt(t * t + s * s)) * rad(np.sqrt((eta - t) ** 2 + s * s))
            return p * np.exp(-c * ((t - t0) ** 2 + s * s)) * shell * s ** (d - 2)

        return integ.plane(f, t0 - L, t0 + L, 0.0, L, width)
    if d == 1:
        e = float(eta_vec[0])
        return integ.line(
            lambda t: np.real(h.fourier(t[:, None]) * h.fourier((e - t)[:, None]))
            * np.exp(-c * (t - e / 2) ** 2), e / 2 - L, e / 2 + L, width)
    if d == 2:
        e = np.asarray(eta_vec, dtype=float)

        def f(t, s):
            lam = np.stack(np.broadcast_arrays(t, s), axis=-1)
            p = np.real(h.fourier(lam) * h.fourier(e - lam))
            return p * np.exp(-c * ((t - e[0] / 2) ** 2 + (s - e[1] / 2) ** 2))

        return integ.plane(f, e[0] / 2 - L, e[0] / 2 + L, e[1] / 2 - L, e[1] / 2 + L, width)
    raise UnsupportedDimensionError(
        "Fourier-side variance of non-radial functions is limited to d <= 2; "
        "use the real-space oracle")


def _mc_damped(h, eta_vec, R, a, quad):
    """Importance-sampled version of the damped integral (Gaussian proposal around eta/2)."""
    d = h.d
    c = 2.0 * a * np.pi**2 / R**2
    rng = np.random.default_rng(quad.mc_seed)
    sd = math.sqrt(1.0 / (2.0 * c))
    lam = eta_vec / 2.0 + sd * rng.standard_normal((quad.mc_samples, d))
    norm = (math.pi / c) ** (d / 2.0)
    vals = np.real(h.fourier(lam) * h.fourier(eta_vec - lam)) * norm
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(len(vals)))


def _undamped_cross(h, eta_vec):
    """int h^(lam) h^(eta - lam) dlam = (h^2)^(eta)."""
    if h.square_fourier is None:
        raise ValueError(
            f"{h.key}: the transform of h^2 is needed for the m != 0 variance terms")
    return float(np.real(h.square_fourier(np.asarray(eta_vec, dtype=float)[None, :])[0]))


def _separable_factors(h, R, a, m_max, integ):
    """Per-axis factors for indicator products: (undamped[k], damped[k]) for |k| <= m_max."""
    f = h.separable
    c = 2.0 * a * np.pi**2 / R**2
    width = _panel_width(h, R, a)
    L = _half_width(R, a)
    ks = np.arange(-m_max, m_max + 1)
    und = np.exp(-a * np.pi**2 * ks**2) * f(R * ks.astype(float))
    dmp = np.empty(len(ks))
    err = np.empty(len(ks))
    for i, k in enumerate(ks):
        e = R * k
        pre = math.exp(-a * np.pi**2 * k * k / 2.0)
        val, er = integ.line(lambda t: f(t) * f(e - t) * np.exp(-c * (t - e / 2) ** 2),
                             e / 2 - L, e / 2 + L, width)
        dmp[i], err[i] = pre * val, pre * er
    return ks, und, dmp, err


def _resolve(h, R, a, m_max, quad):
    if h.d != int(h.d):
        raise ValueError("bad dimension")
    if not (R > 0 and a > 0):
        raise ValueError("R and a must be positive")
    if m_max is None:
        m_max = default_m_max(a)
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    return m_max, quad or QuadratureSpec()


def variance_exact(h, R, a, m_max=None, quad=None):
    """Var N(h,R) as sum_{|m|_inf <= m_max} A_m(h,R)."""
    m_max, quad = _resolve(h, R, a, m_max, quad)
    d = h.d
    ms = _lattice(m_max, d)
    if h.is_zero:
        return SpectralResult(0.0, {tuple(int(v) for v in m): 0.0 for m in ms}, 0.0, m_max)
    if "spec" in h.meta:
        raise ValueError(f"{h.key}: only the stationary variance is available on the Fourier side")
    l2 = h.l2_norm_sq
    integ = _Integrator(quad)
    scheme = _scheme(h, quad)
    breakdown = {}
    q_err = 0.0
    pruned = 0.0
    envelope_scale = 2.0 * R**d * l2

    if scheme == "separable-1d-products":
        ks, und, dmp, err = _separable_factors(h, R, a, m_max, integ)
        idx = ms + m_max
        a0 = None
        for m, row in zip(ms, idx):
            key = tuple(int(v) for v in m)
            prod_u = float(np.prod(und[row]))
            prod_d = float(np.prod(dmp[row]))
            if not m.any():
                # 1 - D(0)^d, with D(0) close to one
                val = R**d * (l2 - prod_d)
                a0 = val
            else:
                val = R**d * (prod_u - prod_d)
            breakdown[key] = val
            rel = float(np.sum(err[row] / np.maximum(np.abs(dmp[row]), 1e-300)))
            q_err += R**d * abs(prod_d) * rel
    else:
        a0, e0 = a0_term(h, R, a, quad)
        q_err += e0
        breakdown[(0,) * d] = a0
        cache = {}
        for m in ms:
            if not m.any():
                continue
            key = tuple(int(v) for v in m)
            m2 = int(np.sum(m * m))
            env = envelope_scale * math.exp(-a * np.pi**2 * m2 / 2.0)
            if env < quad.abs_tol * 1e-6:
                pruned += env
                continue
            cache_key = m2 if scheme == "radial-1d" else key
            if cache_key not in cache:
                eta = R * m.astype(float)
                pre = math.exp(-a * np.pi**2 * m2 / 2.0)
                if scheme == "monte-carlo-importance":
                    dv, de = _mc_damped(h, eta, R, a, quad)
                else:
                    try:
                        dv, de = _damped_cross(h, eta, R, a, integ)
                    except QuadratureError as exc:
                        raise QuadratureError(str(exc), breakdown) from exc
                und = math.exp(-a * np.pi**2 * m2) * _undamped_cross(h, eta)
                cache[cache_key] = (R**d * (und - pre * dv), R**d * pre * de)
            val, err = cache[cache_key]
            breakdown[key] = val
            q_err += err
    value = float(sum(breakdown[k] for k in sorted(breakdown)))
    trunc = envelope_scale * theta_tail(a * np.pi**2 / 2.0, m_max, d) + pruned
    tol = quad.abs_tol + quad.rel_tol * abs(value)
    if scheme != "monte-carlo-importance" and q_err > max(tol, 1e-6 * abs(value)):
        raise QuadratureError(
            f"variance quadrature error estimate {q_err:.3g} exceeds tolerance {tol:.3g}",
            breakdown)
    return SpectralResult(value, breakdown, trunc, m_max, quad_error=q_err,
                          extras={"A0": a0, "scheme": scheme})


def variance_stationary(h, R, a, m_max=None, quad=None):
    """Var N_s(h,R): the A_0 integral plus R^{2d} sum_{m != 0} exp(-2 a pi^2 |m|^2) |h^(Rm)|^2.

    The breakdown holds A_0 at m = 0 and the discrete terms at m != 0;
    ``extras`` carries the two parts separately.
    """
    m_max, quad = _resolve(h, R, a, m_max, quad)
    d = h.d
    ms = _lattice(m_max, d)
    if h.is_zero:
        return SpectralResult(0.0, {tuple(int(v) for v in m): 0.0 for m in ms}, 0.0, m_max,
                              extras={"A0": 0.0, "sum": 0.0})
    a0, e0 = a0_term(h, R, a, quad)
    nz = ms[np.any(ms != 0, axis=1)]
    lam = R * nz.astype(float)
    if "spec" in h.meta:
        g = sobolev_G(h.meta["spec"], lam)
        if np.any(g.truncated):
            raise ValueError(f"{h.key}: M={h.meta['spec'].M} is too small for R*m_max="
                             f"{R * m_max:g}; increase M")
        fh = g.value
    else:
        fh = h.fourier(lam)
    terms = R ** (2 * d) * np.exp(-2.0 * a * np.pi**2 * np.sum(nz * nz, axis=1)) * np.abs(fh) ** 2
    breakdown = {(0,) * d: a0}
    for m, t in zip(nz, terms):
        breakdown[tuple(int(v) for v in m)] = float(t)
    disc = float(np.sum(terms))
    value = a0 + disc
    trunc = R ** (2 * d) * _sup_fourier(h) ** 2 * theta_tail(2.0 * a * np.pi**2, m_max, d)
    tol = quad.abs_tol + quad.rel_tol * abs(value)
    if e0 > max(tol, 1e-6 * abs(value)):
        raise QuadratureError(f"A_0 quadrature error estimate {e0:.3g} exceeds {tol:.3g}",
                              breakdown)
    return SpectralResult(value, breakdown, trunc, m_max, quad_error=e0,
                          extras={"A0": a0, "sum": disc})


# --------------------------------------------------------------------------
# bound functional, asymptotic targets, envelope diagnostic
# --------------------------------------------------------------------------


def _cube_l2_1d(t):
    """int_{-t}^{t} sinc^2(pi u) du."""
    t = np.asarray(t, dtype=float)
    si, _ = special.sici(2.0 * np.pi * t)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, (2.0 / np.pi) * (si - np.sin(np.pi * safe) ** 2 / (np.pi * safe)), 0.0)


def upper_bound_functional(h, R, order=16):
    """B(h,R) = R^{d-2} int_{|lam|<=R} |h^|^2 |lam|^2 + R^d int_{|lam|>=R} |h^|^2."""
    d = h.d
    if h.is_zero:
        return 0.0
    l2 = h.l2_norm_sq
    if h.radial is not None:
        width = 0.25 / max(h.body.radius if h.body is not None else 1.0, 1.0)
        r, w = composite_gl(0.0, R, width, order)
        f2 = np.abs(h.radial(r)) ** 2
        area = unit_sphere_area(d)
        inner_grad = area * np.sum(w * f2 * r ** (d + 1))
        inner = area * np.sum(w * f2 * r ** (d - 1))
        return float(R ** (d - 2) * inner_grad + R**d * (l2 - inner))
    if h.separable is not None and h.is_indicator:
        if d == 1:
            x, w = composite_gl(-R, R, 0.25, order)
            grad = np.sum(w * np.sin(np.pi * x) ** 2) / np.pi**2
            return float(grad / R + R * (1.0 - _cube_l2_1d(R)))
        if d == 2:
            th, w = composite_gl(-np.pi / 2, np.pi / 2, 0.25 / max(R, 1.0), order)
            x = R * np.sin(th)
            jac = R * np.cos(th)
            chord = _cube_l2_1d(R * np.cos(th))
            f2 = h.separable(x) ** 2
            inner = np.sum(w * jac * f2 * chord)
            # |lam|^2 = lam_1^2 + lam_2^2; both halves are equal by symmetry
            inner_grad = 2.0 * np.sum(w * jac * np.sin(np.pi * x) ** 2 / np.pi**2 * chord)
            return float(inner_grad + R**2 * (1.0 - inner))
    if d == 2:
        r, wr = composite_gl(0.0, R, 0.25, order)
        th, wt = composite_gl(0.0, 2 * np.pi, 2 * np.pi / 64, order)
        lam = np.stack([r[:, None] * np.cos(th), r[:, None] * np.sin(th)], axis=-1)
        f2 = np.abs(h.fourier(lam)) ** 2
        ww = (wr * r)[:, None] * wt[None, :]
        inner = np.sum(ww * f2)
        inner_grad = np.sum(ww * f2 * (r * r)[:, None])
        return float(inner_grad + R**2 * (l2 - inner))
    raise UnsupportedDimensionError(f"bound functional for {h.key} in d={d} is not supported")


def asymptotic_target(obj, a):
    """Limit constant of the variance.

    A :class:`ConvexBody` gives sqrt(a / 2 pi) * surface area (the limit of
    Var / R^{d-1}); a smooth :class:`TestFunction` gives (a/2) int |grad h|^2
    (the limit of Var / R^{d-2}).
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if isinstance(obj, ConvexBody):
        return math.sqrt(a / (2.0 * math.pi)) * obj.surface_area
    if isinstance(obj, TestFunction):
        if obj.is_indicator:
            raise ValueError(
                f"{obj.key} is an indicator (not in H^1); pass its ConvexBody for the "
                "surface-area limit")
        from .test_functions import gradient_energy
        return 0.5 * a * gradient_energy(obj)
    raise TypeError("expected a ConvexBody or a TestFunction")


@dataclass
class EnvelopeReport:
    R: float
    a: float
    ratios: dict
    max_ratio: float
    max_imag: float
    terms: dict


def am_envelope_check(h, R, a, m_max=3, quad=None):
    """Ratios |A_m| / (R^d exp(-a pi^2 |m|^2 / 2) (1 + R|m|)^{-(d+1)/2}) for m != 0.

    A_m carries an explicit R^d factor; dividing it out leaves the R-independent
    decay law whose boundedness is being checked.
    """
    d = h.d
    if h.is_zero:
        ms = [tuple(int(v) for v in m) for m in _lattice(m_max, d) if np.any(m)]
        return EnvelopeReport(R, a, {m: 0.0 for m in ms}, 0.0, 0.0, {m: 0.0 for m in ms})
    if h.body is None or h.body.shape != "ball":
        raise ValueError("the envelope diagnostic is defined for ball indicators")
    res = variance_exact(h, R, a, m_max=m_max, quad=quad)
    ratios = {}
    for m, val in res.breakdown.items():
        if not any(m):
            continue
        norm_m = math.sqrt(sum(v * v for v in m))
        env = R**d * math.exp(-a * math.pi**2 * norm_m**2 / 2.0) * (1.0 + R * norm_m) ** (-(d + 1) / 2)
        ratios[m] = abs(val) / env
    return EnvelopeReport(R, a, ratios, max(ratios.values()), res.imag_residue,
                          {m: v for m, v in res.breakdown.items() if any(m)})
