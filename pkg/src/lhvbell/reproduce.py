"""Reference numbers for the model family, recomputed from scratch.

``reproduce_benchmarks`` evaluates each published benchmark and compares it with
the published value at a fixed tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

from .inequalities import (
    FourierCurve,
    ch_statistic,
    delta_from_coefficients,
    discrimination_check,
    qm_curve,
    visibilities,
)
from .model import PI, DetectionParams, WrappedGaussian, closed_form_curve, compatibility_bound
from .quantum import violation_thresholds

__all__ = ["Row", "reproduce_benchmarks", "format_table", "gaussian_benchmark"]

SIGMA = PI / 18
KURTSIEFER_S = 2.6979
KURTSIEFER_ETA = 0.214


@dataclass(frozen=True)
class Row:
    name: str
    computed: float
    expected: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.computed - self.expected) <= self.tolerance


def gaussian_benchmark(eta: float, sigma: float = SIGMA):
    """c_1, V_A, V_B, delta vs QM(V=1) and the CH value of the Gaussian model
    at efficiency eta with beta = 1."""
    det = DetectionParams.from_efficiency(eta)
    pred = closed_form_curve(WrappedGaussian(sigma), det)
    curve = FourierCurve.from_prediction(pred)
    vis = visibilities(curve)
    return {
        "gamma": det.gamma,
        "c1": pred.visibility,
        "V_A": vis.V_A,
        "V_B": vis.V_B,
        "delta": delta_from_coefficients([1.0], pred.coefficients),
        "ch": ch_statistic(curve, pred.single_rate, pred.single_rate),
    }


def reproduce_benchmarks() -> List[Row]:
    rows = [
        Row("compatibility bound, eta=0.2", compatibility_bound(0.2), 0.96753, 1e-5),
        Row("compatibility bound, eta=1", compatibility_bound(1.0), 4 / PI**2, 1e-12),
    ]
    g = gaussian_benchmark(0.848)
    rows += [
        Row("gaussian eta=0.848: c1", g["c1"], 1.000, 0.002),
        Row("gaussian eta=0.848: V_A", g["V_A"], 0.980, 0.003),
        Row("gaussian eta=0.848: V_B", g["V_B"], 0.957, 0.003),
        Row("gaussian eta=0.848: delta", g["delta"], 0.047, 0.003),
    ]
    g1 = gaussian_benchmark(1.0)
    rows += [
        Row("gaussian eta=1: c1", g1["c1"], 0.7627, 0.001),
        Row("gaussian eta=1: V_A", g1["V_A"], 0.8225, 0.002),
        Row("gaussian eta=1: V_B", g1["V_B"], 0.7043, 0.002),
        Row("gaussian eta=1: c1 <= 8/pi^2", float(g1["c1"] <= 8 / PI**2), 1.0, 0.0),
    ]
    ideal = qm_curve(1.0, mean=0.25)
    rows += [
        Row("CH, ideal QM", ch_statistic(ideal, 0.5, 0.5), 1.207, 0.001),
        Row("CH, gaussian eta=1", g1["ch"], 0.996, 0.005),
    ]
    vb = KURTSIEFER_S / (2 * math.sqrt(2))
    d = discrimination_check(vb, KURTSIEFER_ETA)
    d_up = discrimination_check(1.01 * vb, KURTSIEFER_ETA)
    rows += [
        Row("Kurtsiefer V_B from S", vb, 0.9539, 0.0002),
        Row("Kurtsiefer compatibility bound", d.bound, 0.9630, 0.0002),
        Row("Kurtsiefer discriminating", float(d.discriminating), 0.0, 0.0),
        Row("Kurtsiefer V_B +1% discriminating", float(d_up.discriminating), 1.0, 0.0),
        Row("eta=0.82, V=1 violates CH", float(violation_thresholds(0.82, 1.0).genuine_violated), 0.0, 0.0),
    ]
    return rows


def format_table(rows: List[Row]) -> str:
    width = max(len(r.name) for r in rows)
    lines = [f"{'benchmark'.ljust(width)}  {'computed':>12}  {'expected':>12}  {'tol':>8}  result"]
    for r in rows:
        lines.append(f"{r.name.ljust(width)}  {r.computed:12.6f}  {r.expected:12.6f}  {r.tolerance:8.1e}  "
                     f"{'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"
