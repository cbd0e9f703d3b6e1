"""Sampling the Gaussian-perturbed lattice and its stationarised version.

Displacements are generated by a stateless, counter-based hash keyed by
``(seed, replicate, lattice site, axis)``. A site's displacement therefore
does not depend on which other sites are enumerated, nor on the order in
which replicates are processed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional
import math

import numpy as np
from scipy import special

from .errors import NotSamplableError, ToleranceUnreachableError, UnsupportedDimensionError

PERTURBED = "perturbed"
STATIONARIZED = "stationarized"

DEFAULT_BUFFER = 8.0
DEFAULT_TOL = 1e-12
_BATCH = 512

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_ZETA_TAG = np.uint64(0xD1B54A32D192ED03)


@dataclass(frozen=True)
class ProcessConfig:
    d: int
    a: float
    R: float
    kind: str = PERTURBED
    seed: int = 0

    def __post_init__(self):
        if int(self.d) != self.d or not 1 <= self.d <= 3:
            raise UnsupportedDimensionError(f"d={self.d} outside the supported range 1..3")
        if not self.a > 0:
            raise ValueError("dispersion a must be positive")
        if not self.R > 0:
            raise ValueError("scale R must be positive")
        if self.kind not in (PERTURBED, STATIONARIZED):
            raise ValueError(f"kind must be {PERTURBED!r} or {STATIONARIZED!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def sigma(self):
        """Per-coordinate standard deviation sqrt(a/2) of the displacements."""
        return math.sqrt(self.a / 2.0)


@dataclass(frozen=True)
class LatticeWindow:
    """Lattice sites n with |n - center| <= radius, listed in lexicographic order."""

    center: tuple
    radius: float
    bounds: tuple
    sites: np.ndarray
    tail_bound: float

    def __len__(self):
        return len(self.sites)


@dataclass(frozen=True)
class Realization:
    value: float
    tail_bound: float
    points: Optional[np.ndarray] = None


# --------------------------------------------------------------------------
# Counter-based randomness
# --------------------------------------------------------------------------


def _mix64(x):
    """SplitMix64 finaliser, applied elementwise to uint64 arrays."""
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def _absorb(state, values):
    with np.errstate(over="ignore"):
        return _mix64(state + _GOLDEN + np.asarray(values).astype(np.int64).view(np.uint64))


def _seed_state(seed):
    with np.errstate(over="ignore"):
        return _mix64(np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF) + _GOLDEN)


def site_keys(seed, sites):
    """Per-site hash state (replicate independent); ``sites`` has shape (S, d)."""
    sites = np.asarray(sites, dtype=np.int64)
    state = np.full(sites.shape[0], _seed_state(seed), dtype=np.uint64)
    with np.errstate(over="ignore"):
        for j in range(sites.shape[1]):
            state = _absorb(state, sites[:, j])
    return state


def _replicate_keys(seed, replicates):
    with np.errstate(over="ignore"):
        return _absorb(np.full(len(replicates), _seed_state(seed) ^ _ZETA_TAG, dtype=np.uint64),
                       np.asarray(replicates))


def _to_unit(bits):
    # 53 random bits -> open interval (0, 1)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def standard_normals(seed, replicates, sites):
    """Standard normal draws of shape (len(replicates), S, d), keyed per (replicate, site, axis)."""
    sites = np.asarray(sites, dtype=np.int64)
    d = sites.shape[1]
    skeys = site_keys(seed, sites)
    rkeys = _replicate_keys(seed, replicates)
    out = np.empty((len(rkeys), len(skeys), d))
    with np.errstate(over="ignore"):
        base = _mix64(skeys[None, :] ^ rkeys[:, None])
        for j in range(d):
            bits = _mix64(base + np.uint64(j + 1) * _GOLDEN)
            out[:, :, j] = special.ndtri(_to_unit(bits))
    return out


def uniform_shifts(seed, replicates, d):
    """The stationarising shift zeta, uniform on [0, 1)^d, one per replicate."""
    rkeys = _replicate_keys(seed, replicates)
    out = np.empty((len(rkeys), d))
    with np.errstate(over="ignore"):
        for j in range(d):
            out[:, j] = _to_unit(_mix64(rkeys ^ (_ZETA_TAG + np.uint64(j + 1) * _M2)))
    return out


# --------------------------------------------------------------------------
# Windows
# --------------------------------------------------------------------------


def _ball_volume(d, r):
    return math.pi ** (d / 2) * max(r, 0.0) ** d / math.gamma(d / 2 + 1)


def _displacement_sf(t, d, a):
    """P(|xi| >= t) for xi with density (a pi)^{-d/2} exp(-|x|^2/a)."""
    t = np.maximum(np.asarray(t, dtype=float), 0.0)
    return special.gammaincc(d / 2.0, t * t / a)


def excluded_tail_bound(h, cfg, radius, center=None):
    """Upper bound on the expected |contribution| of all sites with |n - center| > radius.

    For compactly supported h a site at distance rho can only contribute if its
    displacement exceeds rho - R * support_radius. Otherwise the bound is
    envelope(rho / 2R) + sup|h| P(|xi| >= rho / 2). Sites are counted shell by
    shell with the unit-cell volume bound.
    """
    if h.is_zero:
        return 0.0
    d, a, R = cfg.d, cfg.a, cfg.R
    half_diag = 0.5 * math.sqrt(d)
    compact = h.support_radius is not None

    def per_site(rho):
        if compact:
            return h.sup_abs * _displacement_sf(rho - R * h.support_radius, d, a)
        return (np.asarray(h.envelope(rho / (2.0 * R))) +
                h.sup_abs * _displacement_sf(rho / 2.0, d, a))

    total = 0.0
    step = 1.0
    rho = float(radius)
    while True:
        shells = rho + step * np.arange(256)
        bound = per_site(shells)
        counts = np.array([_ball_volume(d, s + step + half_diag) - _ball_volume(d, s - half_diag)
                           for s in shells])
        total += float(np.sum(bound * counts))
        if bound[-1] * counts[-1] < 1e-300:
            return total
        if rho > 1e7:
            raise ToleranceUnreachableError(f"tail envelope of {h.key} is not summable")
        rho = float(shells[-1] + step)
        step *= 2.0


def enumerate_window(h, cfg, tol=DEFAULT_TOL, buffer=DEFAULT_BUFFER):
    """Sites carrying all but ``tol`` of the expected |statistic|.

    The radius starts at R * (effective radius of h) + buffer * sqrt(a) and grows
    until the excluded tail bound is below ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not h.samplable:
        raise NotSamplableError(f"{h.key} is not samplable (no evaluator or tail envelope)")
    if h.d != cfg.d:
        raise ValueError(f"test function is {h.d}-dimensional, process is {cfg.d}-dimensional")
    d = cfg.d
    center = (0.0,) * d
    if h.is_zero:
        return LatticeWindow(center, 0.0, ((0, -1),) * d, np.empty((0, d), dtype=np.int64), 0.0)
    base = cfg.R * h.effective_radius(tol) if h.support_radius is not None else 0.0
    radius = base + buffer * math.sqrt(cfg.a)
    for _ in range(200):
        tail = excluded_tail_bound(h, cfg, radius)
        if tail <= tol:
            break
        radius += max(0.5, 0.1 * radius)
    else:
        raise ToleranceUnreachableError(f"cannot reach tol={tol} for {h.key}")
    return _make_window(center, radius, tail)


def _make_window(center, radius, tail):
    d = len(center)
    bounds = tuple((int(math.floor(c - radius)), int(math.ceil(c + radius))) for c in center)
    axes = [np.arange(lo, hi + 1) for lo, hi in bounds]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    diff = grid - np.asarray(center)
    keep = np.sum(diff * diff, axis=1) <= radius * radius
    return LatticeWindow(tuple(center), float(radius), bounds, grid[keep].astype(np.int64),
                         float(tail))


# --------------------------------------------------------------------------
# Sampling
# --------------------------------------------------------------------------


def sample_points(cfg, window, replicates):
    """Perturbed positions, shape (len(replicates), S, d), for the given replicate indices."""
    replicates = np.asarray(replicates, dtype=np.int64)
    z = standard_normals(cfg.seed, replicates, window.sites)
    pts = window.sites[None, :, :] + cfg.sigma * z
    if cfg.kind == STATIONARIZED:
        pts += uniform_shifts(cfg.seed, replicates, cfg.d)[:, None, :]
    return pts


def sample_statistics(cfg, h, replicates, window=None, tol=DEFAULT_TOL):
    """Linear statistics sum_w h(w / R) for a batch of replicate indices."""
    if h.evaluate is None:
        raise NotSamplableError(f"{h.key} is not samplable")
    if window is None:
        window = enumerate_window(h, cfg, tol)
    replicates = np.atleast_1d(np.asarray(replicates, dtype=np.int64))
    if len(window) == 0:
        return np.zeros(len(replicates))
    out = np.empty(len(replicates))
    for start in range(0, len(replicates), _BATCH):
        chunk = replicates[start:start + _BATCH]
        vals = np.ascontiguousarray(h.evaluate(sample_points(cfg, window, chunk) / cfg.R))
        # row-wise reduction over a contiguous axis: same order for any batch size
        out[start:start + len(chunk)] = np.add.reduce(vals, axis=1)
    return out


def sample_statistic(cfg, h, rng_stream, tol=DEFAULT_TOL, keep_points=False, window=None):
    """One realisation of N(h, R) (or N_s(h, R)) for replicate index ``rng_stream``."""
    if h.evaluate is None or (not h.samplable and not h.is_zero):
        raise NotSamplableError(f"{h.key} is not samplable")
    if window is None:
        window = enumerate_window(h, cfg, tol)
    if len(window) == 0:
        empty = np.empty((0, cfg.d)) if keep_points else None
        return Realization(0.0, 0.0, empty)
    pts = sample_points(cfg, window, [rng_stream])[0]
    value = float(np.sum(h.evaluate(pts / cfg.R)))
    return Realization(value, window.tail_bound, pts if keep_points else None)
