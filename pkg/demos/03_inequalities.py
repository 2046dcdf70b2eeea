"""
Which inequalities can tell the model from quantum mechanics
=============================================================

CH, CHSH and the visibility estimators, evaluated on both sides.
"""

import math

from lhvbell import FourierCurve, WrappedGaussian, DetectionParams, closed_form_curve, qm_two_channel
from lhvbell.inequalities import (
    ch_statistic,
    chsh_statistic,
    correlator_from_rates,
    discrimination_check,
    qm_curve,
    visibilities,
    visibility_ratio_test,
)

pi = math.pi

# Ideal quantum predictions break both CH and CHSH.
ideal = qm_curve(1.0, mean=0.25)
print(f"CH, ideal QM: {ch_statistic(ideal, 0.5, 0.5):.4f} (LHV limit 1)")
E = [correlator_from_rates(*qm_two_channel(1.0, 1.0, 1.0, a)) for a in (pi / 8, 3 * pi / 8)]
print(f"CHSH, ideal QM: {chsh_statistic(*E):.4f} (limit 2)")

# The Gaussian model at full efficiency stays just under the CH limit.
pred = closed_form_curve(WrappedGaussian(pi / 18), DetectionParams(pi / 4, 1.0))
curve = FourierCurve.from_prediction(pred)
print(f"CH, gaussian model: {ch_statistic(curve, pred.single_rate, pred.single_rate):.4f}")

# Its two visibility estimators disagree, something QM never does.
v = visibilities(curve)
print(f"V_A = {v.V_A:.4f}, V_B = {v.V_B:.4f}")
print(visibility_ratio_test(v.V_A, v.V_B, pred.eta).to_text())

# A photon experiment at 21.4% efficiency with S = 2.6979.
vb = 2.6979 / (2 * math.sqrt(2))
for x in (vb, 1.01 * vb):
    d = discrimination_check(x, 0.214)
    print(f"V_B={x:.4f}: {d.verdict} (bound {d.bound:.4f})")
