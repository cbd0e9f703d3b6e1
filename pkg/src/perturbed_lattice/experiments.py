"""Registry of named numerical experiments producing tables of result rows."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
import csv
import io
import json
import math
from typing import Callable, Optional

import numpy as np

from . import realspace, spectral
from .montecarlo import run_mc
from .point_process import ProcessConfig
from .test_functions import ball, cube, gauss_pi, sobolev_g

COLUMNS = ("experiment", "R", "quantity", "method", "value", "target", "rel_error",
           "error_bound", "seed")
METHODS = ("fourier", "realspace", "mc", "bound")


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    R: Optional[float]
    quantity: str
    method: str
    value: float
    target: Optional[float] = None
    error_bound: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")

    @property
    def rel_error(self):
        if self.target is None or self.target == 0:
            return None
        return abs(self.value - self.target) / abs(self.target)

    def as_dict(self):
        out = asdict(self)
        out["rel_error"] = self.rel_error
        return {k: out[k] for k in COLUMNS}


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    anchor: str
    defaults: dict
    runner: Callable


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    overrides: dict = field(default_factory=dict)
    out: Optional[str] = None
    format: str = "csv"


# --------------------------------------------------------------------------
# experiment bodies
# --------------------------------------------------------------------------


def _thm4(p):
    h = gauss_pi(p["d"])
    target = spectral.asymptotic_target(h, p["a"])
    rows = []
    for R in p["grid"]:
        res = spectral.variance_exact(h, R, p["a"])
        scale = R ** (p["d"] - 2)
        rows.append(ResultRow("thm4-smooth", R, "var/R^(d-2)", "fourier", res.value / scale,
                              target, (res.truncation_bound + res.quad_error) / scale))
    return rows


def _power_label(name, k):
    if k == 0:
        return name
    return f"{name}/R" if k == 1 else f"{name}/R^{k:g}"


def _thm5(p):
    d, a = p["d"], p["a"]
    h = ball(d)
    target = spectral.asymptotic_target(h.body, a)
    label = _power_label("var", d - 1)
    return [ResultRow("thm5-ball", R, label, "realspace",
                      realspace.variance_realspace(h, R, a) / R ** (d - 1), target, 1e-12)
            for R in p["grid"]]


def _lemma24(p):
    d, a = p["d"], p["a"]
    h = ball(d)
    rows = []
    for R in p["grid"]:
        vol = h.body.volume * R**d
        scale = R ** ((d - 1) / 2)
        rows.append(ResultRow("lemma24-ball-mean", R, "(mean-vol)/R^((d-1)/2)", "realspace",
                              (realspace.mean_realspace(h, R, a) - vol) / scale, None, 1e-12))
        res = spectral.mean_exact(h, R, a)
        rows.append(ResultRow("lemma24-ball-mean", R, "(mean-vol)/R^((d-1)/2)", "fourier",
                              (res.value - vol) / scale, None, res.truncation_bound / scale))
    return rows


def _cube_mean(p):
    d, a = p["d"], p["a"]
    h = cube(d)
    rows = []
    for R in p["grid"]:
        res = spectral.mean_exact(h, R, a)
        rows.append(ResultRow("cube-mean-osc", R, "mean-R^d", "fourier", res.value - R**d, None,
                              res.truncation_bound))
    return rows


def _cube_stationary(p):
    d, a = p["d"], p["a"]
    h = cube(d)
    label_s = _power_label("var_s", d - 1)
    label = _power_label("var", d - 1)
    rows = []
    for R in p["grid"]:
        scale = R ** (d - 1)
        st = spectral.variance_stationary(h, R, a)
        rows.append(ResultRow("cube-var-stationary", R, label_s, "fourier", st.value / scale, None,
                              (st.truncation_bound + st.quad_error) / scale))
        ex = spectral.variance_exact(h, R, a)
        rows.append(ResultRow("cube-var-stationary", R, label, "fourier", ex.value / scale, None,
                              (ex.truncation_bound + ex.quad_error) / scale))
    return rows


def _sobolev(p):
    d, a = p["d"], p["a"]
    g = sobolev_g(d, p["eps"], p["M"])
    rows = []
    for R in p["grid"]:
        scale = R ** (d - 2)
        st = spectral.variance_stationary(g, R, a)
        err = (st.truncation_bound + st.quad_error) / scale
        rows.append(ResultRow("sobolev-blowup", R, _power_label("var_s", d - 2), "fourier",
                              st.value / scale, None, err))
        rows.append(ResultRow("sobolev-blowup", R, _power_label("A0", d - 2), "fourier",
                              st.extras["A0"] / scale, None, st.quad_error / scale))
    return rows


def _thm2(p):
    d, a = p["d"], p["a"]
    rows = []
    for h in (gauss_pi(d), cube(d), ball(d)):
        for R in p["grid"]:
            if h.is_indicator:
                var = realspace.variance_realspace(h, R, a)
            else:
                var = spectral.variance_exact(h, R, a).value
            B = spectral.upper_bound_functional(h, R)
            rows.append(ResultRow("thm2-bound", R, f"var/B[{h.key}]", "bound", var / B, None, 0.0))
    return rows


def _averaged(p):
    d, a = p["d"], p["a"]
    rows = []
    for h in (cube(d), ball(d)):
        for R in p["grid"]:
            a0, err = spectral.a0_term(h, R, a)
            av = realspace.averaged_variance(h.body, R, a)
            rows.append(ResultRow("averaged-variance", R, f"A0[{h.key}]", "fourier", a0, None, err))
            rows.append(ResultRow("averaged-variance", R, f"averaged_var[{h.key}]", "realspace",
                                  av, a0, err))
    return rows


def _theta(p):
    rows = []
    xs = np.linspace(0.0, 1.0, 100, endpoint=False)
    for a in p["a_values"]:
        worst, bound = 0.0, 0.0
        for x in xs:
            real, four, tail = realspace.theta_periodization([x], a)
            worst = max(worst, abs(real - four))
            bound = max(bound, tail)
        rows.append(ResultRow("theta-identity", None, f"max|real-fourier|[a={a:g}]", "realspace",
                              worst, None, bound))
        for x in (0.0, 0.5):
            real, four, tail = realspace.theta_periodization([x], a)
            rows.append(ResultRow("theta-identity", None, f"theta[a={a:g},x={x:g}]", "realspace",
                                  real, four, tail))
    return rows


def _mc_smoke(p):
    d, a = p["d"], p["a"]
    h = ball(d)
    rows = []
    for R in p["grid"]:
        cfg = ProcessConfig(d, a, R, seed=p["seed"])
        est = run_mc(cfg, h, p["replicates"])
        mean = spectral.mean_exact(h, R, a).value
        var = realspace.variance_realspace(h, R, a)
        rows.append(ResultRow("mc-smoke", R, "mean", "mc", est.mean, mean, est.se_mean, p["seed"]))
        rows.append(ResultRow("mc-smoke", R, "var", "mc", est.variance, var, est.se_variance,
                              p["seed"]))
    return rows


def _cube_a0(p):
    d, a = p["d"], p["a"]
    h = cube(d)
    target = spectral.asymptotic_target(h.body, a)
    alt = math.sqrt(a / (2 * math.pi)) * 2**d
    rows = []
    for R in p["grid"]:
        a0, err = spectral.a0_term(h, R, a)
        scale = R ** (d - 1)
        rows.append(ResultRow("cube-a0-coefficient", R, _power_label("A0", d - 1), "fourier",
                              a0 / scale, target, err / scale))
        rows.append(ResultRow("cube-a0-coefficient", R, "sqrt(a/2pi)*2^d", "fourier", alt, target,
                              0.0))
    return rows


REGISTRY = {
    e.name: e for e in [
        Experiment("thm4-smooth", "Variance of a smooth statistic tends to (a/2)*int|grad h|^2",
                   "smooth statistics: limit (a/2) int |grad h|^2",
                   {"d": 2, "a": 1.0, "grid": [5.0, 10.0, 20.0]}, _thm4),
        Experiment("thm5-ball", "Ball count variance over R^(d-1) tends to sqrt(a/2pi)*area",
                   "indicators: limit sqrt(a/2pi) * surface area",
                   {"d": 2, "a": 1.0, "grid": [25.0, 50.0, 100.0]}, _thm5),
        Experiment("lemma24-ball-mean", "Mean ball count minus volume, scaled by R^((d-1)/2)",
                   "mean discrepancy for curved bodies is O(R^((d-1)/2))",
                   {"d": 2, "a": 1.0, "grid": [10.0, 20.0, 50.0, 100.0]}, _lemma24),
        Experiment("cube-mean-osc", "Mean cube count minus R^d: zero at integer R, not at half-integers",
                   "cube mean: limsup (E n(Q_R) - R^d) / R^(d-1) > 0",
                   {"d": 1, "a": 0.25, "grid": [10.0, 10.5]}, _cube_mean),
        Experiment("cube-var-stationary", "Stationary cube variance over R^(d-1) grows on half-integer R",
                   "stationary cube: limsup Var(n_s(Q_R)) / R^(d-1) = +inf",
                   {"d": 2, "a": 0.01, "grid": [10.5, 20.5, 40.5]}, _cube_stationary),
        Experiment("sobolev-blowup", "Stationary variance of the H^1 counterexample over R^(d-2)",
                   "H^1 counterexample: limsup Var(N_s(g,R)) / R^(d-2) = +inf",
                   {"d": 2, "a": 0.05, "eps": 0.1, "M": 1000, "grid": [8.0, 16.0, 32.0]}, _sobolev),
        Experiment("thm2-bound", "Ratio of the variance to the bound functional B(h,R)",
                   "variance upper bound: Var <= C * B(h,R)",
                   {"d": 2, "a": 1.0, "grid": [2.0, 5.0, 10.0, 20.0, 50.0]}, _thm2),
        Experiment("averaged-variance", "Translation-averaged count variance equals the A0 term",
                   "averaged variance over translations equals the continuum term",
                   {"d": 1, "a": 1.0, "grid": [3.5, 10.0]}, _averaged),
        Experiment("theta-identity", "Periodised Gaussian equals its Fourier series",
                   "Poisson summation for the Gaussian displacement density",
                   {"a_values": [0.25, 1.0, 4.0]}, _theta),
        Experiment("mc-smoke", "Monte Carlo mean and variance against the exact formulas",
                   "empirical check of the exact mean and variance formulas",
                   {"d": 2, "a": 1.0, "grid": [10.0], "replicates": 100_000, "seed": 2024}, _mc_smoke),
        Experiment("cube-a0-coefficient", "Cube A0 coefficient against 2d and 2^d surface constants",
                   "cube continuum coefficient sqrt(a/2pi) * surface area",
                   {"d": 3, "a": 1.0, "grid": [10.0, 20.0, 40.0]}, _cube_a0),
    ]
}


def list_experiments():
    """(name, description, anchor) for every registered experiment, in registry order."""
    return [(e.name, e.description, e.anchor) for e in REGISTRY.values()]


_TYPES = {"d": int, "a": float, "eps": float, "M": int, "replicates": int, "seed": int,
          "grid": list, "a_values": list}


def _params(exp, overrides):
    params = dict(exp.defaults)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in exp.defaults:
            if key == "a" and "a_values" in exp.defaults:
                params["a_values"] = [float(value)]
                continue
            raise ValueError(f"experiment {exp.name!r} has no parameter {key!r}; "
                             f"allowed: {', '.join(sorted(exp.defaults))}")
        kind = _TYPES[key]
        if kind is list:
            params[key] = [float(v) for v in value]
            if not params[key] or any(not v > 0 for v in params[key]):
                raise ValueError(f"{key} must be a non-empty list of positive numbers")
        else:
            params[key] = kind(value)
    if "d" in params and not 1 <= params["d"] <= 3:
        raise ValueError(f"d={params['d']} outside 1..3")
    if params.get("a", 1.0) <= 0:
        raise ValueError("a must be positive")
    return params


def run_experiment(cfg):
    """Run a registered experiment; returns its rows in grid order."""
    if isinstance(cfg, str):
        cfg = ExperimentConfig(cfg)
    if cfg.name not in REGISTRY:
        raise KeyError(f"unknown experiment {cfg.name!r}; available: {', '.join(REGISTRY)}")
    if cfg.format not in ("csv", "json"):
        raise ValueError("format must be csv or json")
    exp = REGISTRY[cfg.name]
    return exp.runner(_params(exp, cfg.overrides))


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        d = row.as_dict()
        w.writerow([_fmt(d[c]) for c in COLUMNS])
    return buf.getvalue()


def rows_to_json(rows):
    return json.dumps([r.as_dict() for r in rows], indent=2)
