"""Fitting models of the family to a quantum curve.

The objective is the RMS deviation between the unit-mean quantum curve
1 + V cos(2 phi) and the unit-mean model curve 1 + sum c_n cos(2 n phi):

    delta^2 = ((V - c_1)^2 + sum_{n>=2} c_n^2) / 2.

The efficiency is matched through the window half-width with beta = 1,
except where a cosine model with beta < 1 reproduces the quantum curve
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize

from .inequalities import delta_from_coefficients
from .model import (
    EPSILON_MAX,
    PI,
    POSITIVITY_GRID,
    DetectionParams,
    EpsilonCosine,
    FourierSeries,
    LhvDensity,
    ModelFamilyError,
    WrappedGaussian,
    attenuation,
    closed_form_curve,
    compatibility_bound,
    gamma_for_efficiency,
    min_epsilon,
    positivity_check,
    sinc2,
)
from .montecarlo import verify_lhv_constraints

__all__ = [
    "FitTarget",
    "FitResult",
    "fit_epsilon_model",
    "fit_gaussian_model",
    "fit_fourier_model",
    "positivity_check",
    "ETA_TOLERANCE",
]

ETA_TOLERANCE = 1e-3
STEP_TOL = 1e-6
SIGMA_MAX = PI / 8


@dataclass(frozen=True)
class FitTarget:
    eta: float
    V: float
    objective: str = "delta_vs_qm"

    def __post_init__(self):
        if not (0.0 < self.eta <= 1.0):
            raise ValueError(f"target efficiency must lie in (0, 1], got {self.eta!r}")
        if not (0.0 <= self.V <= 1.0):
            raise ValueError(f"target visibility must lie in [0, 1], got {self.V!r}")
        if self.objective != "delta_vs_qm":
            raise ValueError(f"unsupported objective {self.objective!r}")


@dataclass(frozen=True)
class FitResult:
    method: str
    target: FitTarget
    density: LhvDensity
    detection: DetectionParams
    delta: float
    constraints: Dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.constraints.values())

    @property
    def coefficients(self) -> np.ndarray:
        """c_n of the fitted curve."""
        return closed_form_curve(self.density, self.detection).coefficients

    def parameters(self) -> Dict[str, float]:
        p = {"gamma": self.detection.gamma, "beta": self.detection.beta,
             "eta": self.detection.efficiency}
        d = self.density
        if isinstance(d, EpsilonCosine):
            p["epsilon"] = d.epsilon
        elif isinstance(d, WrappedGaussian):
            p["sigma"] = d.sigma
        elif isinstance(d, FourierSeries):
            for i, a in enumerate(d.coeffs, start=1):
                p[f"a{i}"] = a
        return p

    def to_text(self) -> str:
        lines = [
            f"method={self.method}",
            f"target.eta={self.target.eta!r}",
            f"target.V={self.target.V!r}",
            f"density={type(self.density).__name__}",
        ]
        lines += [f"param.{k}={v!r}" for k, v in self.parameters().items()]
        lines.append(f"delta={self.delta!r}")
        lines += [f"constraint.{k}={str(v).lower()}" for k, v in self.constraints.items()]
        return "\n".join(lines) + "\n"


def _constraints(density: LhvDensity, detection: DetectionParams, target: FitTarget) -> Dict[str, bool]:
    grid = max(256, 2 * density.natural_order() + 2)
    rep = verify_lhv_constraints(density, detection, grid_resolution=grid)
    return {
        "positivity": rep.homogeneous_ok,
        "normalization": rep.normalization_ok,
        "beta_le_1": rep.inhomogeneous_ok,
        "eta_match": abs(detection.efficiency - target.eta) <= ETA_TOLERANCE,
    }


def _result(method, target, density, detection) -> FitResult:
    pred = closed_form_curve(density, detection)
    delta = delta_from_coefficients([target.V], pred.coefficients)
    return FitResult(method, target, density, detection, delta, _constraints(density, detection, target))


def fit_epsilon_model(target: FitTarget) -> FitResult:
    """Smallest-epsilon member reaching the target visibility.

    Inside the cosine model's reach (epsilon = 0) the window and beta are
    chosen so that the cosine model reproduces the target curve exactly.
    Raises ``ModelFamilyError`` when epsilon would exceed 1/3.
    """
    eps = min_epsilon(target.V, target.eta)
    if eps > 0.0:
        detection = DetectionParams.from_efficiency(target.eta)
        return _result("epsilon", target, EpsilonCosine(eps), detection)
    # V = sinc^2(2 gamma) with beta = pi eta / (4 gamma) <= 1
    if target.V <= 4.0 / PI**2:
        gamma = PI / 4
    elif target.V >= compatibility_bound(target.eta):
        gamma = gamma_for_efficiency(target.eta)
    else:
        gamma = brentq(lambda g: float(sinc2(2.0 * g)) - target.V, 1e-12, PI / 4, xtol=1e-15)
        gamma = max(gamma, gamma_for_efficiency(target.eta))
    beta = min(1.0, PI * target.eta / (4.0 * gamma))
    return _result("epsilon", target, EpsilonCosine(0.0), DetectionParams(gamma, beta))


def _coordinate_descent(f, x0, lower, upper, steps, tol=STEP_TOL, feasible=None):
    """Minimise f by axis moves with step halving, inside the box.

    Terminates when every step is below ``tol``. Only strictly improving,
    feasible moves are accepted.
    """
    x = np.array(x0, dtype=float)
    fx = f(x)
    steps = np.array(steps, dtype=float)
    while np.any(steps >= tol):
        improved = False
        for i in range(x.size):
            if steps[i] < tol:
                continue
            for sign in (-1.0, 1.0):
                y = x.copy()
                y[i] = np.clip(x[i] + sign * steps[i], lower[i], upper[i])
                if y[i] == x[i]:
                    continue
                if feasible is not None and not feasible(y):
                    continue
                fy = f(y)
                if fy < fx:
                    x, fx, improved = y, fy, True
                    break
        if not improved:
            steps = steps / 2.0
    return x, fx


def _gaussian_delta(sigma, gamma, V):
    pred = closed_form_curve(WrappedGaussian(sigma), DetectionParams(gamma, 1.0))
    return delta_from_coefficients([V], pred.coefficients)


def fit_gaussian_model(target: FitTarget, sigma_grid: Optional[Sequence[float]] = None,
                       gamma_grid: Optional[Sequence[float]] = None) -> FitResult:
    """Grid search over (sigma, gamma), then coordinate descent.

    gamma is confined to the window where 4 gamma / pi matches the target
    efficiency within ``ETA_TOLERANCE``; sigma to (0, pi/8].
    """
    # shrink the window slightly so rounding cannot push eta past the tolerance
    tol = 0.999 * ETA_TOLERANCE
    lo_g = max(PI * (target.eta - tol) / 4.0, 1e-9)
    hi_g = min(PI * (target.eta + tol) / 4.0, PI / 4)
    if sigma_grid is None:
        sigma_grid = np.linspace(PI / 180, SIGMA_MAX, 80)
    if gamma_grid is None:
        gamma_grid = np.linspace(lo_g, hi_g, 5)
    sigma_grid = np.asarray(sigma_grid, dtype=float)
    gamma_grid = np.asarray(gamma_grid, dtype=float)
    if np.any(sigma_grid <= 0) or np.any(sigma_grid > SIGMA_MAX + 1e-12):
        raise ValueError("sigma grid must lie in (0, pi/8]")
    if np.any(gamma_grid < lo_g - 1e-12) or np.any(gamma_grid > hi_g + 1e-12):
        raise ValueError(f"gamma grid must lie in [{lo_g:.6g}, {hi_g:.6g}] to match eta")

    best = None
    for s in sigma_grid:
        for g in gamma_grid:
            key = (_gaussian_delta(s, g, target.V), s, g)
            if best is None or key < best:
                best = key
    _, s0, g0 = best

    ds = np.min(np.diff(np.unique(sigma_grid))) if sigma_grid.size > 1 else s0 / 4
    dg = np.min(np.diff(np.unique(gamma_grid))) if gamma_grid.size > 1 else (hi_g - lo_g) / 4
    x, _ = _coordinate_descent(
        lambda v: _gaussian_delta(v[0], v[1], target.V),
        [s0, g0],
        lower=[min(sigma_grid.min(), 1e-3), lo_g],
        upper=[SIGMA_MAX, hi_g],
        steps=[ds, max(dg, STEP_TOL)],
    )
    return _result("gaussian", target, WrappedGaussian(float(x[0])), DetectionParams(float(x[1]), 1.0))


def _fourier_delta(a, s, V):
    c = a * s
    return math.sqrt(0.5 * ((V - c[0]) ** 2 + float(np.sum(c[1:] ** 2))))


def _pad(a, n):
    out = np.zeros(n)
    k = min(n, len(a))
    out[:k] = np.asarray(a, dtype=float)[:k]
    return out


def fit_fourier_model(target: FitTarget, n_max: int = 8, grid_spec: int = POSITIVITY_GRID) -> FitResult:
    """Best non-negative cosine-series density with ``n_max`` harmonics.

    Candidates: the cosine sub-family, the epsilon model (clipped at 1/3
    when the target is out of its reach), a truncated wrapped Gaussian, and
    the solution of the quadratic program with positivity imposed on a
    ``grid_spec``-point grid. Candidates failing ``positivity_check`` are
    discarded, the best survivor is polished by coordinate descent.
    """
    if not (2 <= n_max <= 8):
        raise ValueError(f"n_max must lie in [2, 8], got {n_max!r}")
    gamma = gamma_for_efficiency(target.eta)
    detection = DetectionParams(gamma, 1.0)
    s = attenuation(gamma, n_max)
    V = target.V

    def feasible(a):
        return positivity_check(a).nonnegative

    seeds = [_pad([min(1.0, V / s[0])], n_max)]
    try:
        eps = min_epsilon(V, target.eta)
    except ModelFamilyError:
        eps = EPSILON_MAX
    seeds.append(_pad([1.0 + eps, eps], n_max))
    try:
        g = fit_gaussian_model(target, gamma_grid=[gamma])
        seeds.append(g.density.coefficients(n_max))
    except ValueError:
        pass
    seeds = [a for a in seeds if feasible(a)]
    start = min(seeds, key=lambda a: (_fourier_delta(a, s, V), tuple(a)))

    n = np.arange(1, n_max + 1)
    xs = np.arange(grid_spec) * (PI / grid_spec)
    C = np.cos(2.0 * np.outer(xs, n))

    def obj(a):
        c = a * s
        return 0.5 * ((V - c[0]) ** 2 + np.sum(c[1:] ** 2))

    def grad(a):
        g = a * s * s
        g[0] = -(V - a[0] * s[0]) * s[0]
        return g

    res = minimize(obj, start, jac=grad, method="SLSQP",
                   constraints=[{"type": "ineq", "fun": lambda a: 1.0 + C @ a, "jac": lambda a: C}],
                   options={"ftol": 1e-15, "maxiter": 500})
    candidates = list(seeds)
    if np.all(np.isfinite(res.x)):
        qp = np.asarray(res.x, dtype=float)
        if not feasible(qp):
            # pull back toward the feasible seed; the feasible set is convex
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if feasible(start + mid * (qp - start)):
                    lo = mid
                else:
                    hi = mid
            qp = start + lo * (qp - start)
        candidates.append(qp)

    best = min(candidates, key=lambda a: (_fourier_delta(a, s, V), tuple(a)))
    span = np.full(n_max, 4.0)
    polished, _ = _coordinate_descent(
        lambda a: _fourier_delta(a, s, V), best, -span, span,
        steps=np.full(n_max, 1e-3), feasible=feasible,
    )
    final = min([best, polished], key=lambda a: (_fourier_delta(a, s, V), tuple(a)))
    return _result("fourier", target, FourierSeries(final), detection)
