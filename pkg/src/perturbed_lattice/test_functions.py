"""Test functions h with evaluators, Fourier transforms and geometry metadata.

Fourier transforms use the convention

    h^(lam) = int h(x) exp(-2 pi i <x, lam>) dx.

Every catalog entry is addressable by a string key (see :func:`get_test_function`):
``"zero"``, ``"cube"``, ``"ball:r=<real>"``, ``"gauss:pi"`` and
``"sobolev-g:eps=<real>,M=<int>"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional
import math

import numpy as np
from scipy import integrate, special

from ._quadrature import composite_gl, sinc, unit_sphere_area
from .errors import NotSamplableError, UnsupportedDimensionError

ArrayFn = Callable[[np.ndarray], np.ndarray]


# --------------------------------------------------------------------------
# Convex bodies
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexBody:
    """A centred ball of radius ``radius`` or the unit cube [-1/2, 1/2]^d."""

    shape: str
    d: int
    radius: float = 1.0

    def __post_init__(self):
        if self.shape not in ("ball", "cube"):
            raise ValueError(f"unknown body shape {self.shape!r}")
        if self.d < 1:
            raise UnsupportedDimensionError("dimension must be >= 1")
        if self.shape == "ball" and not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def volume(self):
        if self.shape == "cube":
            return 1.0
        d = self.d
        return math.pi ** (d / 2) * self.radius**d / math.gamma(d / 2 + 1)

    @property
    def surface_area(self):
        if self.shape == "cube":
            return 2.0 * self.d
        return self.d * self.volume / self.radius

    @property
    def circumradius(self):
        """Radius of the smallest centred ball containing the body."""
        if self.shape == "cube":
            return 0.5 * math.sqrt(self.d)
        return self.radius

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        if self.shape == "cube":
            return np.all(np.abs(x) <= 0.5, axis=-1)
        return np.sum(x * x, axis=-1) <= self.radius**2


# --------------------------------------------------------------------------
# Test function descriptor
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """Immutable description of a test function on R^d.

    ``fourier`` maps an array of frequencies with trailing axis ``d`` to the
    transform values. ``radial`` (when set) gives the transform as a function of
    |lam|, ``separable`` (when set) the one-dimensional factor of a product
    transform. ``envelope`` is a monotone radial bound |h(x)| <= envelope(|x|);
    functions without one cannot be sampled in real space.
    """

    __test__ = False  # keep pytest from collecting this class

    key: str
    d: int
    fourier: Optional[ArrayFn]
    evaluate: Optional[ArrayFn] = None
    analytic: bool = True
    integral: Optional[float] = None
    l1_norm: Optional[float] = None
    l2_norm_sq: Optional[float] = None
    grad_energy: Optional[float] = None
    sup_abs: float = 1.0
    support_radius: Optional[float] = None
    envelope: Optional[ArrayFn] = None
    is_indicator: bool = False
    body: Optional[ConvexBody] = None
    radial: Optional[ArrayFn] = None
    separable: Optional[ArrayFn] = None
    square_fourier: Optional[ArrayFn] = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def is_zero(self):
        return self.sup_abs == 0.0

    @property
    def samplable(self):
        return self.evaluate is not None and self.envelope is not None

    def effective_radius(self, tol):
        """Radius outside of which |h| <= tol (the support radius when compact)."""
        if self.is_zero:
            return 0.0
        if self.support_radius is not None:
            return self.support_radius
        if self.envelope is None:
            raise NotSamplableError(f"{self.key} declares no tail envelope")
        hi = 1.0
        while float(self.envelope(np.array(hi))) > tol:
            hi *= 2.0
            if hi > 1e8:
                raise NotSamplableError(f"{self.key}: envelope does not decay to {tol}")
        lo = 0.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if float(self.envelope(np.array(mid))) > tol:
                lo = mid
            else:
                hi = mid
        return hi

    def __call__(self, x):
        if self.evaluate is None:
            raise NotSamplableError(f"{self.key} has no real-space evaluator")
        return self.evaluate(np.asarray(x, dtype=float))


def _norm(lam):
    lam = np.asarray(lam, dtype=float)
    return np.sqrt(np.sum(lam * lam, axis=-1))


def _check_d(d):
    if int(d) != d or d < 1 or d > 3:
        raise UnsupportedDimensionError(f"dimension d={d} not in the supported range 1..3")
    return int(d)


# --------------------------------------------------------------------------
# Catalog entries
# --------------------------------------------------------------------------


def zero_function(d):
    d = _check_d(d)

    def zeros(x):
        return np.zeros(np.shape(x)[:-1])

    return TestFunction(
        key="zero", d=d, fourier=zeros, evaluate=zeros, integral=0.0, l1_norm=0.0,
        l2_norm_sq=0.0, grad_energy=0.0, sup_abs=0.0, support_radius=0.0,
        envelope=lambda r: np.zeros(np.shape(r)), radial=lambda r: np.zeros(np.shape(r)),
        separable=None, square_fourier=zeros,
    )


def cube_fourier_1d(t):
    """One-dimensional factor sinc(pi t) of the unit-cube transform."""
    return sinc(np.pi * np.asarray(t, dtype=float))


def cube(d):
    """Indicator of the unit cube Q = [-1/2, 1/2]^d."""
    d = _check_d(d)
    body = ConvexBody("cube", d)

    def fourier(lam):
        lam = np.asarray(lam, dtype=float)
        return np.prod(cube_fourier_1d(lam), axis=-1)

    def evaluate(x):
        return body.contains(x).astype(float)

    rad = body.circumradius
    return TestFunction(
        key="cube", d=d, fourier=fourier, evaluate=evaluate, integral=1.0, l1_norm=1.0,
        l2_norm_sq=1.0, grad_energy=math.inf, sup_abs=1.0, support_radius=rad,
        envelope=lambda r: (np.asarray(r) <= rad).astype(float), is_indicator=True,
        body=body, separable=cube_fourier_1d, square_fourier=fourier,
    )


def ball_fourier_radial(rho, r, d):
    """Transform of the indicator of the radius-r ball in R^d as a function of |lam|.

    Equals r^d (2 pi)^{d/2} J_{d/2}(z) / z^{d/2} with z = 2 pi r |lam|.
    """
    rho = np.asarray(rho, dtype=float)
    nu = d / 2.0
    z = 2.0 * np.pi * r * np.abs(rho)
    small = z < 1e-2
    zs = np.where(small, 1.0, z)
    ratio = special.jv(nu, zs) / zs**nu
    # J_nu(z)/z^nu = sum_k (-1)^k (z/2)^{2k} / (2^nu k! Gamma(nu+k+1))
    q = (0.5 * z) ** 2
    series = (1.0 - q / (nu + 1) + q * q / (2 * (nu + 1) * (nu + 2))
              - q**3 / (6 * (nu + 1) * (nu + 2) * (nu + 3)))
    series = series / (2.0**nu * math.gamma(nu + 1))
    ratio = np.where(small, series, ratio)
    return r**d * (2.0 * np.pi) ** nu * ratio


def ball(d, r=1.0):
    """Indicator of the centred ball of radius r."""
    d = _check_d(d)
    r = float(r)
    body = ConvexBody("ball", d, r)

    def radial(rho):
        return ball_fourier_radial(rho, r, d)

    def fourier(lam):
        return radial(_norm(lam))

    def evaluate(x):
        return body.contains(x).astype(float)

    vol = body.volume
    return TestFunction(
        key=f"ball:r={r:g}", d=d, fourier=fourier, evaluate=evaluate, integral=vol,
        l1_norm=vol, l2_norm_sq=vol, grad_energy=math.inf, sup_abs=1.0, support_radius=r,
        envelope=lambda s: (np.asarray(s) <= r).astype(float), is_indicator=True,
        body=body, radial=radial, square_fourier=fourier,
    )


def gauss_pi(d):
    """The Gaussian bump h(x) = exp(-pi |x|^2), which is its own transform."""
    d = _check_d(d)

    def radial(rho):
        rho = np.asarray(rho, dtype=float)
        return np.exp(-np.pi * rho * rho)

    def fourier(lam):
        return radial(_norm(lam))

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-np.pi * np.sum(x * x, axis=-1))

    def square_fourier(lam):
        rho = _norm(lam)
        return 2.0 ** (-d / 2) * np.exp(-0.5 * np.pi * rho * rho)

    return TestFunction(
        key="gauss:pi", d=d, fourier=fourier, evaluate=evaluate, integral=1.0, l1_norm=1.0,
        l2_norm_sq=2.0 ** (-d / 2), grad_energy=math.pi * d * 2.0 ** (-d / 2), sup_abs=1.0,
        support_radius=None, envelope=radial, radial=radial, square_fourier=square_fourier,
        meta={"fourier_cutoff": math.sqrt(50.0 / math.pi)},
    )


# --------------------------------------------------------------------------
# Sobolev counterexample, built on the Fourier side
# --------------------------------------------------------------------------

BUMP_RADIUS = 0.25


def bump(x):
    """Smooth bump rho(x) = exp(1 - 1/(1 - |4x|^2)) on |x| < 1/4, rho(0) = 1."""
    x = np.asarray(x, dtype=float)
    s = 16.0 * x * x
    inside = s < 1.0
    safe = np.where(inside, s, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe)), 0.0)


def _bump_radial_moments(d, n=400):
    """Return (int rho^2, int rho^2 |mu|^2) over R^d for the radial bump."""
    r, w = composite_gl(0.0, BUMP_RADIUS, BUMP_RADIUS / 8, n // 8)
    rho2 = bump(r) ** 2
    area = unit_sphere_area(d)
    i0 = area * float(np.sum(w * rho2 * r ** (d - 1)))
    i2 = area * float(np.sum(w * rho2 * r ** (d + 1)))
    return i0, i2


@dataclass(frozen=True)
class SobolevCounterexampleSpec:
    """Parameters of G(lam) = sum_m c_m rho((lam - m) / b_m) over the first-axis sublattice.

    The sum runs over m = (j, 0, ..., 0) with 1 <= |j| <= M, with
    b_m = |m|^{-1/(d+1)} and c_m = b_m |m|^{-1-eps}.
    """

    d: int
    eps: float
    M: int = 1000

    def __post_init__(self):
        if not 2 <= self.d <= 3:
            raise UnsupportedDimensionError("the Sobolev counterexample needs d in {2, 3}")
        if not 0.0 < self.eps < 0.25:
            raise ValueError("eps must lie in (0, 1/4)")
        if self.M < 1:
            raise ValueError("M must be >= 1")

    def b(self, j):
        return np.abs(np.asarray(j, dtype=float)) ** (-1.0 / (self.d + 1))

    def c(self, j):
        j = np.abs(np.asarray(j, dtype=float))
        return self.b(j) * j ** (-1.0 - self.eps)


class GValue(NamedTuple):
    value: np.ndarray
    truncated: np.ndarray


def sobolev_G(spec, lam):
    """Evaluate G at frequencies ``lam`` (trailing axis d).

    Returns ``(value, truncated)``; ``truncated`` marks points beyond the
    enumerated range |j| <= M, where the untruncated G may differ.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape[-1] != spec.d:
        raise ValueError(f"expected trailing axis of size {spec.d}")
    j = np.rint(lam[..., 0])
    valid = (j != 0) & (np.abs(j) <= spec.M)
    jj = np.where(valid, j, 1.0)
    offset = lam.copy()
    offset[..., 0] = lam[..., 0] - jj
    b = spec.b(jj)
    val = spec.c(jj) * bump(_norm(offset) / b)
    val = np.where(valid, val, 0.0)
    truncated = np.abs(lam[..., 0]) > spec.M + BUMP_RADIUS
    return GValue(val, truncated)


def sobolev_partial_sums(spec, js=None):
    """Partial sums of sum c_m b_m^d and sum c_m^2 b_m^d over |j| <= J for J in ``js``."""
    j = np.arange(1, spec.M + 1, dtype=float)
    c, b = spec.c(j), spec.b(j)
    s1 = np.cumsum(2.0 * c * b**spec.d)
    s2 = np.cumsum(2.0 * c * c * b**spec.d)
    if js is None:
        return s1, s2
    idx = np.asarray(js, dtype=int) - 1
    return s1[idx], s2[idx]


def sobolev_g(d, eps, M=1000):
    """The Sobolev counterexample g, available only through its transform G."""
    spec = SobolevCounterexampleSpec(d, eps, M)
    i0, i2 = _bump_radial_moments(d)
    j = np.arange(1, spec.M + 1, dtype=float)
    c, b = spec.c(j), spec.b(j)
    l2 = float(np.sum(2.0 * c * c * b**d * i0))
    grad = 4.0 * math.pi**2 * float(np.sum(2.0 * c * c * b**d * (j * j * i0 + b * b * i2)))
    G_l1 = float(np.sum(2.0 * c * b**d)) * _bump_l1(d)

    def fourier(lam):
        return sobolev_G(spec, lam).value

    return TestFunction(
        key=f"sobolev-g:eps={eps:g},M={M}", d=d, fourier=fourier, evaluate=None,
        integral=0.0, l1_norm=None, l2_norm_sq=l2, grad_energy=grad,
        sup_abs=math.inf, support_radius=None, envelope=None,
        meta={"spec": spec, "bump_l2": i0, "bump_l2_r2": i2, "G_l1": G_l1,
              "sup_G": 1.0},
    )


def _bump_l1(d):
    r, w = composite_gl(0.0, BUMP_RADIUS, BUMP_RADIUS / 8, 50)
    return unit_sphere_area(d) * float(np.sum(w * bump(r) * r ** (d - 1)))


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def get_test_function(key, d):
    """Look up a catalog test function by string key."""
    key = key.strip()
    name, _, params = key.partition(":")
    kv = {}
    if params and name != "gauss":
        for part in params.split(","):
            k, sep, v = part.partition("=")
            if not sep:
                raise ValueError(f"malformed parameter {part!r} in {key!r}")
            kv[k.strip()] = v.strip()
    if name == "zero":
        return zero_function(d)
    if name == "cube":
        return cube(d)
    if name == "ball":
        return ball(d, float(kv.get("r", 1.0)))
    if name == "gauss":
        if params not in ("", "pi"):
            raise ValueError(f"unknown gaussian variant {key!r}; only 'gauss:pi'")
        return gauss_pi(d)
    if name == "sobolev-g":
        if "eps" not in kv:
            raise ValueError("sobolev-g needs eps=<real>")
        return sobolev_g(d, float(kv["eps"]), int(kv.get("M", 1000)))
    raise ValueError(
        f"unknown test function {key!r}; known: zero, cube, ball:r=<real>, gauss:pi, "
        "sobolev-g:eps=<real>,M=<int>"
    )


def fourier_transform(h, lam):
    """h^(lam) under the exp(-2 pi i <x, lam>) convention; numeric fallback if needed."""
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0:
        lam = lam.reshape(1)
    if h.fourier is not None:
        return h.fourier(lam)
    flat = lam.reshape(-1, h.d)
    out = np.array([numeric_fourier(h, p) for p in flat])
    return out.reshape(lam.shape[:-1])


def numeric_fourier(h, lam, scale=1.0, tol=1e-11):
    """Transform of x -> h(x / scale) at ``lam`` by adaptive quadrature over the support.

    Bodies are integrated with exact (chord) limits; smooth functions over a box
    of their effective radius. Returns a complex number.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    d = h.d
    if h.is_zero:
        return 0j
    if h.evaluate is None:
        raise NotSamplableError(f"{h.key} has no real-space evaluator")
    opts = {"epsabs": tol, "epsrel": tol, "limit": 400}

    def phase(*x):
        return 2.0 * np.pi * sum(xi * li for xi, li in zip(x, lam))

    if h.body is not None:
        K = h.body
        if K.shape == "cube":
            ranges = [(-0.5 * scale, 0.5 * scale)] * d
            weight = lambda *x: 1.0  # noqa: E731
        else:
            rr = K.radius * scale
            ranges = _ball_ranges(d, rr)
            weight = lambda *x: 1.0  # noqa: E731
    else:
        rad = h.effective_radius(1e-17) * scale
        ranges = [(-rad, rad)] * d

        def weight(*x):
            return float(h.evaluate(np.array(x) / scale))

    # nquad passes the innermost variable first
    re = integrate.nquad(lambda *x: weight(*x[::-1]) * math.cos(phase(*x[::-1])),
                         ranges[::-1], opts=opts)[0]
    im = integrate.nquad(lambda *x: -weight(*x[::-1]) * math.sin(phase(*x[::-1])),
                         ranges[::-1], opts=opts)[0]
    return complex(re, im)


def _ball_ranges(d, r):
    # x_1 outermost; each further coordinate is limited by the remaining radius
    def lim(*outer):
        s = math.sqrt(max(r * r - sum(v * v for v in outer), 0.0))
        return (-s, s)

    return [(-r, r)] + [lim] * (d - 1)


def gradient_energy(h):
    """int |grad h|^2, evaluated on the Fourier side as 4 pi^2 int |h^|^2 |lam|^2.

    Indicators (and any function whose transform is not square integrable
    against |lam|^2) give ``math.inf``.
    """
    if h.is_zero:
        return 0.0
    if h.is_indicator:
        return math.inf
    d = h.d
    if h.radial is not None:
        # the integrand decays like the transform squared; integrate until negligible
        rmax = 1.0
        while abs(h.radial(np.array(rmax))) ** 2 * rmax ** (d + 1) > 1e-30:
            rmax *= 1.5
            if rmax > 1e6:
                return math.inf
        r, w = composite_gl(0.0, rmax, 0.25, 20)
        val = unit_sphere_area(d) * np.sum(w * np.abs(h.radial(r)) ** 2 * r ** (d + 1))
        return float(4.0 * np.pi**2 * val)
    if h.grad_energy is not None:
        return h.grad_energy
    raise ValueError(f"no Fourier data to compute the gradient energy of {h.key}")
