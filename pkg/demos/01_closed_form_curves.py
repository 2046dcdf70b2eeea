"""
Coincidence curves of the local model family
============================================

Three densities, one detection window, and how close each gets to a
quantum cosine curve.
"""

import math

import numpy as np

from lhvbell import Cosine, DetectionParams, EpsilonCosine, WrappedGaussian, closed_form_curve
from lhvbell.model import compatibility_bound

pi = math.pi

# A window of half-width gamma with beta = 1 detects a photon with
# probability 4 gamma / pi. Half the photons are seen at gamma = pi/8.
det = DetectionParams(pi / 8, 1.0)
print(f"efficiency at gamma=pi/8: {det.efficiency:.3f}")

# The plain cosine density already reproduces a quantum curve whose
# visibility stays below sinc^2(pi eta / 2).
pred = closed_form_curve(Cosine(), det)
print(f"cosine model visibility {pred.visibility:.5f}, bound {compatibility_bound(det.efficiency):.5f}")

# Adding a cos(4 delta) term lifts the first harmonic and brings a second.
phi = np.linspace(0, pi / 2, 5)
for density in (Cosine(), EpsilonCosine(0.2), WrappedGaussian(pi / 18)):
    p = closed_form_curve(density, det)
    shape = ", ".join(f"{v:.4f}" for v in p.coincidence_over_single(phi))
    print(f"{density!r:45s} c = {np.round(p.coefficients[:3], 4)}  R12/R1 = [{shape}]")

# The Gaussian density reaches unit visibility at the efficiency where
# its first coefficient, attenuated by the window, drops to one.
for eta in (0.5, 0.848, 1.0):
    p = closed_form_curve(WrappedGaussian(pi / 18), DetectionParams.from_efficiency(eta))
    print(f"gaussian sigma=pi/18, eta={eta}: c1 = {p.visibility:.4f}")
