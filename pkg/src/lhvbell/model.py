"""Local hidden-variables model family for polarization-correlation experiments.

Every density in the family depends only on the difference of the two hidden
polarization angles and is written as a cosine series

    rho(l1, l2) = (1/pi^2) [1 + sum_n a_n cos(2n (l1 - l2))]

on the square [0, pi)^2. Detection on each side is a top-hat window of
half-width ``gamma`` and height ``beta`` around the polarizer angle. With
these ingredients the normalized coincidence curve has the closed form

    R12 / R1 = (2 beta gamma / pi) [1 + sum_n c_n cos(2n phi)],
    c_n = a_n sin^2(2n gamma) / (2n gamma)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

__all__ = [
    "PI",
    "ModelFamilyError",
    "TailConditionError",
    "reduce_angle",
    "circular_distance",
    "sinc2",
    "HiddenAngles",
    "DetectionParams",
    "LhvDensity",
    "Cosine",
    "EpsilonCosine",
    "WrappedGaussian",
    "FourierSeries",
    "ModelPrediction",
    "PositivityResult",
    "density_eval",
    "density_fourier_coefficients",
    "detection_prob",
    "closed_form_curve",
    "compatibility_bound",
    "min_epsilon",
    "positivity_check",
    "attenuation",
    "gamma_for_efficiency",
    "DEFAULT_N_MAX",
]

PI = math.pi
EPSILON_MAX = 1.0 / 3.0
DEFAULT_N_MAX = 16
CURVE_TAIL = 1e-8
EVAL_TAIL = 1e-12
GAUSSIAN_TAIL = 1e-12
POSITIVITY_GRID = 4096
POSITIVITY_TOL = -1e-10

ArrayLike = Union[float, np.ndarray]


class ModelFamilyError(ValueError):
    """Requested (V, eta) cannot be reached by the model family."""


class TailConditionError(ValueError):
    """Wrapped Gaussian too wide for its single-Gaussian reading to hold."""


def reduce_angle(angle: ArrayLike) -> ArrayLike:
    """Reduce angles to [0, pi). Polarizer angles are defined modulo pi."""
    out = np.mod(angle, PI)
    # np.mod can return exactly pi for tiny negative inputs
    out = np.where(out >= PI, 0.0, out)
    if np.ndim(out) == 0:
        return float(out)
    return out


def circular_distance(a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """Distance between two angles on the period-pi circle, in [0, pi/2]."""
    d = np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), PI)
    d = np.minimum(d, PI - d)
    if np.ndim(d) == 0:
        return float(d)
    return d


def sinc2(x: ArrayLike) -> ArrayLike:
    """sin(x)^2 / x^2 with the removable singularity at 0 filled in."""
    return np.sinc(np.asarray(x, dtype=float) / PI) ** 2


def attenuation(gamma: float, n_max: int) -> np.ndarray:
    """Per-harmonic attenuation sin^2(2n gamma)/(2n gamma)^2, n = 1..n_max."""
    n = np.arange(1, n_max + 1)
    return sinc2(2.0 * n * gamma)


def gamma_for_efficiency(eta: float, beta: float = 1.0) -> float:
    """Window half-width giving overall efficiency ``eta = 4 gamma beta / pi``."""
    return PI * eta / (4.0 * beta)


@dataclass(frozen=True)
class HiddenAngles:
    lambda1: float
    lambda2: float

    def __post_init__(self):
        object.__setattr__(self, "lambda1", reduce_angle(float(self.lambda1)))
        object.__setattr__(self, "lambda2", reduce_angle(float(self.lambda2)))

    @property
    def difference(self) -> float:
        return reduce_angle(self.lambda1 - self.lambda2)


@dataclass(frozen=True)
class DetectionParams:
    """Top-hat detection window.

    ``beta`` above 1 is representable so that constraint checks can report
    it; such a model is not a valid LHV model (see ``is_admissible``).
    """

    gamma: float
    beta: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.gamma <= PI / 4 + 1e-15):
            raise ValueError(f"gamma must lie in (0, pi/4], got {self.gamma!r}")
        if not self.beta >= 0.0:
            raise ValueError(f"beta must be non-negative, got {self.beta!r}")

    @classmethod
    def from_efficiency(cls, eta: float, beta: float = 1.0) -> "DetectionParams":
        if not (0.0 < eta <= beta):
            raise ValueError(f"efficiency {eta!r} not reachable with beta={beta!r}")
        return cls(gamma=gamma_for_efficiency(eta, beta), beta=beta)

    @property
    def efficiency(self) -> float:
        return 4.0 * self.gamma * self.beta / PI

    @property
    def is_admissible(self) -> bool:
        return self.beta <= 1.0


class LhvDensity:
    """Base class for densities that depend only on (l1 - l2) mod pi."""

    def coefficients(self, n_max: int) -> np.ndarray:
        raise NotImplementedError

    def natural_order(self) -> int:
        """Smallest n_max that captures every coefficient above ``EVAL_TAIL``."""
        raise NotImplementedError

    def curve_order(self) -> int:
        """Truncation order used for closed-form curves."""
        return max(DEFAULT_N_MAX, self.natural_order())

    def of_difference(self, delta: ArrayLike) -> ArrayLike:
        a = self.coefficients(self.natural_order())
        n = np.arange(1, a.size + 1)
        delta = np.asarray(delta, dtype=float)
        series = np.cos(2.0 * np.multiply.outer(delta, n)) @ a
        out = (1.0 + series) / PI**2
        if out.ndim == 0:
            return float(out)
        return out

    def __call__(self, lambda1: ArrayLike, lambda2: ArrayLike) -> ArrayLike:
        return self.of_difference(np.asarray(lambda1) - np.asarray(lambda2))

    def marginal_cdf(self, delta: ArrayLike) -> ArrayLike:
        """CDF of the difference (l1 - l2) mod pi on [0, pi)."""
        a = self.coefficients(self.natural_order())
        n = np.arange(1, a.size + 1)
        delta = np.asarray(delta, dtype=float)
        terms = np.sin(2.0 * np.multiply.outer(delta, n)) @ (a / (2.0 * n))
        return (delta + terms) / PI


@dataclass(frozen=True)
class Cosine(LhvDensity):
    def coefficients(self, n_max: int) -> np.ndarray:
        a = np.zeros(n_max)
        a[0] = 1.0
        return a

    def natural_order(self) -> int:
        return 1

    def of_difference(self, delta):
        out = (1.0 + np.cos(2.0 * np.asarray(delta, dtype=float))) / PI**2
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class EpsilonCosine(LhvDensity):
    """Cosine density plus a cos(4 delta) term; non-negative for eps <= 1/3."""

    epsilon: float

    def __post_init__(self):
        if not (0.0 <= self.epsilon <= EPSILON_MAX + 1e-15):
            raise ValueError(f"epsilon must lie in [0, 1/3], got {self.epsilon!r}")

    def coefficients(self, n_max: int) -> np.ndarray:
        a = np.zeros(max(n_max, 0))
        if n_max >= 1:
            a[0] = 1.0 + self.epsilon
        if n_max >= 2:
            a[1] = self.epsilon
        return a

    def natural_order(self) -> int:
        return 2

    def of_difference(self, delta):
        # sum of squares form, manifestly non-negative
        c2 = np.cos(np.asarray(delta, dtype=float)) ** 2
        eps = self.epsilon
        out = 2.0 / PI**2 * ((1.0 - 3.0 * eps) * c2 + 4.0 * eps * c2**2)
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class WrappedGaussian(LhvDensity):
    """Gaussian in the angle difference, wrapped onto the period-pi circle.

    Its cosine series a_n = 2 exp(-2 n^2 sigma^2) is exact for the wrapped
    density at any sigma; point values are summed over the periodic images
    instead, which keeps them non-negative. The density coincides with a
    single unwrapped Gaussian only while the Gaussian is negligible at pi/2;
    see ``max_sigma``.
    """

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")

    @staticmethod
    def max_sigma(tail: float = GAUSSIAN_TAIL) -> float:
        """Largest sigma whose unwrapped density at pi/2 stays below ``tail``."""
        def excess(s):
            return -(PI**2) / (8 * s * s) - math.log(math.sqrt(2 * PI**3) * s) - math.log(tail)

        return brentq(excess, 1e-3, PI)

    def tail_value(self) -> float:
        s = self.sigma
        return math.exp(-(PI**2) / (8 * s * s)) / (math.sqrt(2 * PI**3) * s)

    def coefficients(self, n_max: int) -> np.ndarray:
        n = np.arange(1, n_max + 1)
        return 2.0 * np.exp(-2.0 * n**2 * self.sigma**2)

    def order_for(self, tail: float) -> int:
        return max(1, math.ceil(math.sqrt(math.log(2.0 / tail) / (2.0 * self.sigma**2))))

    def natural_order(self) -> int:
        return self.order_for(EVAL_TAIL)

    def curve_order(self) -> int:
        return max(DEFAULT_N_MAX, self.order_for(CURVE_TAIL))

    def of_difference(self, delta):
        d = reduce_angle(np.asarray(delta, dtype=float))
        d = np.where(d > PI / 2, d - PI, d)
        # images beyond 10 sigma contribute below double precision
        k = np.arange(-(math.ceil(10.0 * self.sigma / PI) + 1), math.ceil(10.0 * self.sigma / PI) + 2)
        x = d[..., None] + k * PI
        s = self.sigma
        out = np.exp(-(x * x) / (2.0 * s * s)).sum(axis=-1) / (math.sqrt(2.0 * PI) * s * PI)
        if out.ndim == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class FourierSeries(LhvDensity):
    """Generic cosine-series density with coefficients a_1..a_N.

    Construction does not enforce positivity; call ``positivity()`` or
    ``positivity_check`` on the coefficients.
    """

    coeffs: tuple = field(default=())

    def __init__(self, coeffs: Sequence[float]):
        arr = tuple(float(c) for c in coeffs)
        if not arr:
            raise ValueError("FourierSeries needs at least one coefficient")
        if not all(math.isfinite(c) for c in arr):
            raise ValueError("FourierSeries coefficients must be finite")
        object.__setattr__(self, "coeffs", arr)

    def coefficients(self, n_max: int) -> np.ndarray:
        a = np.zeros(n_max)
        k = min(n_max, len(self.coeffs))
        a[:k] = self.coeffs[:k]
        return a

    def natural_order(self) -> int:
        return len(self.coeffs)

    def positivity(self) -> "PositivityResult":
        return positivity_check(self.coeffs)


@dataclass(frozen=True)
class ModelPrediction:
    """Closed-form coincidence curve of one model.

    ``level`` is 2 beta gamma / pi, so that
    R12/R1 = level * (1 + sum c_n cos(2 n phi)).
    """

    eta: float
    level: float
    coefficients: np.ndarray
    density_coefficients: np.ndarray

    @property
    def visibility(self) -> float:
        """Amplitude of the cos(2 phi) term."""
        return float(self.coefficients[0])

    @property
    def single_rate(self) -> float:
        """R1/R0 (equal to R2/R0)."""
        return self.eta / 2.0

    def shape(self, phi: ArrayLike) -> ArrayLike:
        """Curve normalized to unit mean, 1 + sum c_n cos(2 n phi)."""
        n = np.arange(1, self.coefficients.size + 1)
        phi = np.asarray(phi, dtype=float)
        out = 1.0 + np.cos(2.0 * np.multiply.outer(phi, n)) @ self.coefficients
        return float(out) if np.ndim(out) == 0 else out

    def coincidence_over_single(self, phi: ArrayLike) -> ArrayLike:
        return self.level * self.shape(phi)

    def coincidence(self, phi: ArrayLike) -> ArrayLike:
        """R12/R0 at relative angle phi."""
        return self.single_rate * self.coincidence_over_single(phi)

    def two_channel(self, phi: ArrayLike):
        """(R++, R--, R+-, R-+) / R0 with the minus channel rotated by pi/2."""
        same = self.coincidence(phi)
        cross = self.coincidence(np.asarray(phi) + PI / 2)
        return same, same, cross, cross


@dataclass(frozen=True)
class PositivityResult:
    nonnegative: bool
    minimum: float
    location: float


def density_eval(density: LhvDensity, angles: HiddenAngles) -> float:
    return float(density(angles.lambda1, angles.lambda2))


def density_fourier_coefficients(
    density: LhvDensity, n_max: int, check_tail: bool = True
) -> np.ndarray:
    """Cosine-series coefficients a_1..a_n_max of ``density``.

    For a wrapped Gaussian, ``check_tail`` rejects widths where the density
    stops looking like a single Gaussian in (-pi/2, pi/2].
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max!r}")
    if check_tail and isinstance(density, WrappedGaussian):
        if density.tail_value() >= GAUSSIAN_TAIL:
            raise TailConditionError(
                f"sigma={density.sigma:.6g} exceeds the tail threshold "
                f"sigma_max={WrappedGaussian.max_sigma():.6g} "
                f"(Gaussian at pi/2 must stay below {GAUSSIAN_TAIL:g})"
            )
    return density.coefficients(n_max)


def detection_prob(params: DetectionParams, lam: ArrayLike, phi: ArrayLike) -> ArrayLike:
    inside = circular_distance(lam, phi) <= params.gamma
    out = np.where(inside, params.beta, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def closed_form_curve(
    density: LhvDensity, params: DetectionParams, n_max: int | None = None
) -> ModelPrediction:
    if n_max is None:
        n_max = density.curve_order()
    elif isinstance(density, WrappedGaussian):
        a_last = density.coefficients(n_max)[-1]
        if a_last >= CURVE_TAIL:
            raise ValueError(
                f"n_max={n_max} truncates a wrapped Gaussian with a_n={a_last:.3g}; "
                f"need n_max >= {density.order_for(CURVE_TAIL)}"
            )
    a = density.coefficients(n_max)
    c = a * attenuation(params.gamma, n_max)
    return ModelPrediction(
        eta=params.efficiency,
        level=2.0 * params.beta * params.gamma / PI,
        coefficients=c,
        density_coefficients=a,
    )


def compatibility_bound(eta: float) -> float:
    """Largest visibility the cosine model reaches at efficiency ``eta``."""
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"efficiency must lie in (0, 1], got {eta!r}")
    return float(sinc2(PI * eta / 2.0))


def min_epsilon(V: float, eta: float) -> float:
    """Smallest epsilon for which the epsilon model reaches visibility V."""
    if not (0.0 <= V <= 1.0):
        raise ValueError(f"visibility must lie in [0, 1], got {V!r}")
    eps = max(0.0, V / compatibility_bound(eta) - 1.0)
    if eps > EPSILON_MAX:
        raise ModelFamilyError(
            f"model family cannot reach V={V:g} at eta={eta:g}: "
            f"needs epsilon={eps:.6g} > 1/3"
        )
    return eps


def positivity_check(coefficients: Sequence[float], grid: int = POSITIVITY_GRID) -> PositivityResult:
    """Minimum of 1 + sum a_n cos(2 n delta) over [0, pi).

    Grid scan followed by a bounded golden-section search around the best
    grid point.
    """
    a = np.asarray(coefficients, dtype=float)
    n = np.arange(1, a.size + 1)

    def poly(x):
        return 1.0 + np.cos(2.0 * np.multiply.outer(np.asarray(x, dtype=float), n)) @ a

    xs = np.arange(grid) * (PI / grid)
    vals = poly(xs)
    k = int(np.argmin(vals))
    best_x, best_v = float(xs[k]), float(vals[k])
    h = PI / grid
    res = minimize_scalar(
        lambda x: float(poly(x)),
        bracket=None,
        bounds=(best_x - h, best_x + h),
        method="bounded",
        options={"xatol": 1e-12},
    )
    if res.success and res.fun < best_v:
        best_x, best_v = float(reduce_angle(res.x)), float(res.fun)
    return PositivityResult(best_v >= POSITIVITY_TOL, best_v, best_x)
