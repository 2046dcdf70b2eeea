"""Bell-type inequalities and curve statistics.

Every statistic accepts either a closed-form curve (``FourierCurve``) or a
sampled one (``SampledCurve``). For sampled inputs the ``*_estimate``
variants propagate standard errors to first order, treating the inputs as
independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from .model import PI, ModelPrediction, compatibility_bound, reduce_angle, sinc2
from .montecarlo import RateEstimate

__all__ = [
    "UndefinedStatisticError",
    "FourierCurve",
    "SampledCurve",
    "qm_curve",
    "InequalityReport",
    "Visibilities",
    "RtotAnalysis",
    "Discrimination",
    "ch_statistic",
    "ch_estimate",
    "ch_report",
    "chsh_statistic",
    "chsh_report",
    "correlator_from_rates",
    "correlator_estimate",
    "visibilities",
    "visibilities_from_coefficients",
    "delta_deviation",
    "delta_from_coefficients",
    "epsilon_delta",
    "delta_lower_bound",
    "delta_report",
    "epsilon_model_visibilities",
    "visibility_ratio_test",
    "compatibility_report",
    "genuine_inequality_report",
    "rtot_analysis",
    "discrimination_check",
    "reports_to_text",
    "reports_from_text",
]

SQRT2 = math.sqrt(2.0)
ANGLE_MATCH = 1e-9


class UndefinedStatisticError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class FourierCurve:
    """mean * (1 + sum_n c_n cos(2 n phi))."""

    mean: float
    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coefficients", np.atleast_1d(np.asarray(self.coefficients, dtype=float)))

    @classmethod
    def from_prediction(cls, prediction: ModelPrediction) -> "FourierCurve":
        """Coincidence curve R12/R0 of a model."""
        return cls(prediction.single_rate * prediction.level, prediction.coefficients)

    def __call__(self, phi):
        n = np.arange(1, self.coefficients.size + 1)
        phi = np.asarray(phi, dtype=float)
        out = self.mean * (1.0 + np.cos(2.0 * np.multiply.outer(phi, n)) @ self.coefficients)
        return float(out) if np.ndim(out) == 0 else out

    def at(self, phi: float) -> RateEstimate:
        return RateEstimate(self(phi), 0.0)


@dataclass(frozen=True)
class SampledCurve:
    """Tabulated curve; lookups match angles modulo pi."""

    phi: np.ndarray
    values: np.ndarray
    std_errors: Optional[np.ndarray] = None

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if phi.shape != values.shape or phi.ndim != 1:
            raise ValueError("phi and values must be 1-D arrays of equal length")
        reduced = np.sort(reduce_angle(phi))
        if reduced.size > 1 and np.min(np.diff(np.append(reduced, reduced[0] + PI))) < ANGLE_MATCH:
            raise ValueError("curve angles must be distinct modulo pi")
        if np.any(values < 0):
            raise ValueError("curve values must be non-negative")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "values", values)
        if self.std_errors is not None:
            object.__setattr__(self, "std_errors", np.asarray(self.std_errors, dtype=float))

    @classmethod
    def from_estimates(cls, phi: Sequence[float], estimates: Sequence[RateEstimate]) -> "SampledCurve":
        return cls(np.asarray(phi), np.array([e.value for e in estimates]),
                   np.array([e.std_error for e in estimates]))

    def at(self, phi: float) -> RateEstimate:
        d = np.abs(reduce_angle(self.phi - phi))
        d = np.minimum(d, PI - d)
        k = int(np.argmin(d))
        if d[k] > ANGLE_MATCH:
            raise KeyError(f"curve has no sample at phi={phi!r} (mod pi)")
        se = 0.0 if self.std_errors is None else float(self.std_errors[k])
        return RateEstimate(float(self.values[k]), se)

    def __call__(self, phi):
        if np.ndim(phi) == 0:
            return self.at(float(phi)).value
        return np.array([self.at(float(p)).value for p in np.ravel(phi)]).reshape(np.shape(phi))


def qm_curve(V: float, mean: float = 1.0) -> FourierCurve:
    """Pure cosine curve with visibility V."""
    return FourierCurve(mean, np.array([V]))


def _as_estimate(x) -> RateEstimate:
    if isinstance(x, RateEstimate):
        return x
    if isinstance(x, tuple) and len(x) == 2:
        return RateEstimate(float(x[0]), float(x[1]))
    return RateEstimate(float(x), 0.0)


def _propagate(f: Callable, estimates: Sequence[RateEstimate]) -> RateEstimate:
    """First-order error propagation by central differences."""
    x = np.array([e.value for e in estimates], dtype=float)
    se = np.array([e.std_error for e in estimates], dtype=float)
    value = f(*x)
    var = 0.0
    for i in np.flatnonzero(se > 0):
        h = 1e-6 * max(abs(x[i]), 1e-6)
        up, dn = x.copy(), x.copy()
        up[i] += h
        dn[i] -= h
        grad = (f(*up) - f(*dn)) / (2 * h)
        var += (grad * se[i]) ** 2
    return RateEstimate(float(value), math.sqrt(var))


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of one inequality, ``statistic <sense> bound``."""

    name: str
    statistic: float
    bound: float
    sense: str = "<="
    inputs: Dict[str, float] = field(default_factory=dict)
    note: str = ""
    std_error: float = 0.0

    def __post_init__(self):
        if self.sense not in ("<=", ">="):
            raise ValueError(f"sense must be '<=' or '>=', got {self.sense!r}")

    @property
    def margin(self) -> float:
        return self.statistic - self.bound

    @property
    def satisfied(self) -> bool:
        return self.margin <= 0 if self.sense == "<=" else self.margin >= 0

    @property
    def verdict(self) -> str:
        return "satisfied" if self.satisfied else "violated"

    def to_text(self) -> str:
        lines = [
            f"name={self.name}",
            f"statistic={self.statistic!r}",
            f"std_error={self.std_error!r}",
            f"bound={self.bound!r}",
            f"sense={self.sense}",
            f"margin={self.margin!r}",
            f"verdict={self.verdict}",
        ]
        lines += [f"inputs.{k}={v!r}" for k, v in self.inputs.items()]
        if self.note:
            lines.append(f"note={self.note}")
        return "\n".join(lines) + "\n"


def reports_to_text(reports: Sequence[InequalityReport]) -> str:
    return "\n".join(r.to_text() for r in reports)


def reports_from_text(text: str) -> List[InequalityReport]:
    out = []
    for chunk in text.strip().split("\n\n"):
        kv = {}
        for line in chunk.strip().splitlines():
            key, _, value = line.partition("=")
            kv[key.strip()] = value
        inputs = {k[len("inputs."):]: float(v) for k, v in kv.items() if k.startswith("inputs.")}
        out.append(InequalityReport(
            name=kv["name"], statistic=float(kv["statistic"]), bound=float(kv["bound"]),
            sense=kv["sense"], inputs=inputs, note=kv.get("note", ""),
            std_error=float(kv.get("std_error", 0.0)),
        ))
    return out


# -- CH -------------------------------------------------------------------

def ch_statistic(R12: Callable, R1: float, R2: float, phi: float = PI / 8) -> float:
    """[3 R12(phi) - R12(3 phi)] / (R1 + R2); every LHV model gives <= 1."""
    denom = R1 + R2
    if denom == 0:
        raise UndefinedStatisticError("R1 + R2 = 0")
    return (3.0 * R12(phi) - R12(3.0 * phi)) / denom


def ch_estimate(curve, R1, R2, phi: float = PI / 8) -> RateEstimate:
    inputs = [curve.at(phi), curve.at(3.0 * phi), _as_estimate(R1), _as_estimate(R2)]
    if inputs[2].value + inputs[3].value == 0:
        raise UndefinedStatisticError("R1 + R2 = 0")
    return _propagate(lambda a, b, r1, r2: (3.0 * a - b) / (r1 + r2), inputs)


def ch_report(curve, R1, R2, phi: float = PI / 8) -> InequalityReport:
    est = ch_estimate(curve, R1, R2, phi)
    return InequalityReport("ch", est.value, 1.0, "<=", {"phi": phi}, std_error=est.std_error)


# -- CHSH -----------------------------------------------------------------

def correlator_from_rates(Rpp: float, Rmm: float, Rpm: float, Rmp: float) -> float:
    total = Rpp + Rmm + Rpm + Rmp
    if total == 0:
        raise UndefinedStatisticError("all four coincidence rates are zero")
    return (Rpp + Rmm - Rpm - Rmp) / total


def correlator_estimate(Rpp, Rmm, Rpm, Rmp) -> RateEstimate:
    ests = [_as_estimate(r) for r in (Rpp, Rmm, Rpm, Rmp)]
    if sum(e.value for e in ests) == 0:
        raise UndefinedStatisticError("all four coincidence rates are zero")
    return _propagate(correlator_from_rates, ests)


def chsh_statistic(E_pi8: float, E_3pi8: float) -> float:
    """S = |3 E(pi/8) - E(3 pi/8)| for rotationally invariant correlators."""
    return abs(3.0 * E_pi8 - E_3pi8)


def chsh_report(E_pi8, E_3pi8) -> InequalityReport:
    e1, e2 = _as_estimate(E_pi8), _as_estimate(E_3pi8)
    est = _propagate(chsh_statistic, [e1, e2])
    return InequalityReport("chsh", est.value, 2.0, "<=",
                            {"E_pi8": e1.value, "E_3pi8": e2.value}, std_error=est.std_error)


# -- visibilities and deviation -----------------------------------------------

class Visibilities(NamedTuple):
    V_A: float
    V_B: float
    V_A_se: float = 0.0
    V_B_se: float = 0.0


def _va(r0, r90):
    if r0 + r90 == 0:
        raise UndefinedStatisticError("R(0) + R(pi/2) = 0")
    return (r0 - r90) / (r0 + r90)


def _vb(r1, r3):
    if r1 + r3 == 0:
        raise UndefinedStatisticError("R(pi/8) + R(3pi/8) = 0")
    return SQRT2 * (r1 - r3) / (r1 + r3)


def visibilities(curve) -> Visibilities:
    """V_A from R(0), R(pi/2) and V_B from R(pi/8), R(3pi/8)."""
    va = _propagate(_va, [curve.at(0.0), curve.at(PI / 2)])
    vb = _propagate(_vb, [curve.at(PI / 8), curve.at(3 * PI / 8)])
    return Visibilities(va.value, vb.value, va.std_error, vb.std_error)


def visibilities_from_coefficients(c: Sequence[float]) -> Visibilities:
    """V_A, V_B of 1 + sum c_n cos(2 n phi) by harmonic bookkeeping.

    cos(n pi/4) - cos(3 n pi/4) is sqrt(2), 0, -sqrt(2), 0, -sqrt(2), 0,
    sqrt(2), 0 for n mod 8 = 1..8, and cos(n pi/4) + cos(3 n pi/4) is
    0, 0, 0, -2, 0, 0, 0, 2.
    """
    c = np.asarray(c, dtype=float)
    n = np.arange(1, c.size + 1)
    odd, even = c[n % 2 == 1], c[n % 2 == 0]
    va = odd.sum() / (1.0 + even.sum())
    diff = {1: 1.0, 3: -1.0, 5: -1.0, 7: 1.0}
    summ = {4: -1.0, 0: 1.0}
    num = sum(diff.get(k % 8, 0.0) * ck for k, ck in zip(n, c))
    den = 1.0 + sum(summ.get(k % 8, 0.0) * ck for k, ck in zip(n, c))
    return Visibilities(float(va), float(num / den))


def delta_deviation(qm_curve: Callable, lhv_curve: Callable, quadrature_points: int = 256) -> float:
    """RMS difference of the two curves, each normalized to its angular mean."""
    if quadrature_points < 64:
        raise ValueError("quadrature_points must be >= 64")
    phi = (np.arange(quadrature_points) + 0.5) * (PI / quadrature_points)
    q = np.asarray(qm_curve(phi), dtype=float)
    m = np.asarray(lhv_curve(phi), dtype=float)
    if q.mean() == 0 or m.mean() == 0:
        raise UndefinedStatisticError("curve with zero mean")
    return float(np.sqrt(np.mean((q / q.mean() - m / m.mean()) ** 2)))


def delta_from_coefficients(c_qm: Sequence[float], c_lhv: Sequence[float]) -> float:
    """Same deviation for two unit-mean cosine series: sqrt(sum d_n^2 / 2)."""
    a, b = np.asarray(c_qm, dtype=float), np.asarray(c_lhv, dtype=float)
    n = max(a.size, b.size)
    d = np.pad(a, (0, n - a.size)) - np.pad(b, (0, n - b.size))
    return float(np.sqrt(0.5 * np.sum(d**2)))


def epsilon_delta(epsilon: float, eta: float) -> float:
    """Deviation of the epsilon model from QM with the same cos(2 phi) amplitude."""
    return SQRT2 / 2.0 * epsilon * float(sinc2(PI * eta))


def delta_lower_bound(V: float, eta: float) -> float:
    """Smallest deviation any epsilon model at efficiency eta shows against a
    QM curve of visibility V. Zero inside the cosine model's reach."""
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"efficiency must lie in (0, 1], got {eta!r}")
    x = PI * eta / 2.0
    return max(0.0, SQRT2 / 2.0 * math.cos(x) ** 2 * (V - float(sinc2(x))))


def delta_report(delta: float, V: float, eta: float) -> InequalityReport:
    return InequalityReport("delta_lower_bound", delta, delta_lower_bound(V, eta), ">=",
                            {"V": V, "eta": eta})


def epsilon_model_visibilities(epsilon: float, eta: float, beta: float = 1.0) -> Visibilities:
    """V_A and V_B of the epsilon model with explicit detection height beta."""
    x = PI * eta / (2.0 * beta)
    vb = (1.0 + epsilon) * float(sinc2(x))
    va = vb / (1.0 + epsilon * float(sinc2(2.0 * x)))
    return Visibilities(va, vb)


def visibility_ratio_test(V_A: float, V_B: float, eta: float) -> InequalityReport:
    """V_B / V_A >= 1 + cos^2(pi eta/2) [V_B - sinc^2(pi eta/2)].

    Holds for the low-efficiency epsilon family; a curve with V_A > V_B
    lies outside that family and is flagged.
    """
    if not V_A > 0:
        raise UndefinedStatisticError("V_A must be positive")
    x = PI * eta / 2.0
    bound = 1.0 + math.cos(x) ** 2 * (V_B - float(sinc2(x)))
    note = ""
    if V_A > V_B:
        note = "V_A > V_B: inequality inapplicable at high efficiency"
    return InequalityReport("visibility_ratio", V_B / V_A, bound, ">=",
                            {"V_A": V_A, "V_B": V_B, "eta": eta}, note=note)


def compatibility_report(V: float, eta: float) -> InequalityReport:
    """Cosine model reproduces QM iff V <= sinc^2(pi eta / 2)."""
    return InequalityReport("cosine_compatibility", V, compatibility_bound(eta), "<=",
                            {"V": V, "eta": eta})


def genuine_inequality_report(V: float, eta: float) -> InequalityReport:
    """QM inserted into the CH inequality: eta (1 + sqrt(2) V) <= 2."""
    return InequalityReport("ch_qm_threshold", eta * (1.0 + SQRT2 * V), 2.0, "<=",
                            {"V": V, "eta": eta})


# -- rotational invariance ------------------------------------------------------

@dataclass(frozen=True)
class RtotAnalysis:
    mean: float
    amplitudes: np.ndarray
    invariant: bool

    def amplitude(self, harmonic: int) -> float:
        """Relative amplitude of cos(2 * harmonic * phi)."""
        return float(self.amplitudes[harmonic - 1])


def rtot_analysis(phi, Rpp, Rmm, Rpm, Rmp, n_harmonics: int = 4, tol: float = 1e-9) -> RtotAnalysis:
    """Cosine amplitudes of R++ + R-- + R+- + R-+ relative to its mean.

    Least-squares fit of mean * (1 + sum_n A_n cos(2 n phi)) on the common
    angle grid; ``invariant`` is true when every |A_n| <= tol.
    """
    phi = np.asarray(phi, dtype=float)
    total = np.asarray(Rpp) + np.asarray(Rmm) + np.asarray(Rpm) + np.asarray(Rmp)
    if phi.size < 2 * n_harmonics + 1:
        raise ValueError("need at least 2 * n_harmonics + 1 angles")
    n = np.arange(1, n_harmonics + 1)
    basis = np.column_stack([np.ones_like(phi), np.cos(2.0 * np.outer(phi, n))])
    coef, *_ = np.linalg.lstsq(basis, total, rcond=None)
    mean = float(coef[0])
    if mean == 0:
        raise UndefinedStatisticError("R_tot has zero mean")
    amps = coef[1:] / mean
    return RtotAnalysis(mean, amps, bool(np.all(np.abs(amps) <= tol)))


# -- discrimination -------------------------------------------------------------

class Discrimination(NamedTuple):
    discriminating: bool
    bound: float
    required_epsilon: float

    @property
    def verdict(self) -> str:
        return "discriminating regime" if self.discriminating else "not discriminating"


def discrimination_check(V_B: float, eta: float) -> Discrimination:
    """Can a measured V_B at efficiency eta separate QM from the model family?

    Below sinc^2(pi eta / 2) the cosine model already reproduces QM, so no
    test can discriminate. Above it, the epsilon needed by the model is
    reported (it may exceed 1/3, i.e. the family cannot follow at all).
    """
    bound = compatibility_bound(eta)
    if V_B <= bound:
        return Discrimination(False, bound, 0.0)
    return Discrimination(True, bound, V_B / bound - 1.0)
