"""
Fitting the model family to a quantum curve
===========================================

For a target efficiency and visibility, find the member closest to the
quantum curve in RMS deviation.
"""

from lhvbell import FitTarget, fit_epsilon_model, fit_fourier_model, fit_gaussian_model
from lhvbell.model import ModelFamilyError

for eta, V in ((0.2, 0.95), (0.2, 0.98), (0.848, 1.0)):
    target = FitTarget(eta, V)
    print(f"target eta={eta}, V={V}")
    for name, fit in (("epsilon", fit_epsilon_model), ("gaussian", fit_gaussian_model),
                      ("fourier", fit_fourier_model)):
        try:
            r = fit(target)
        except ModelFamilyError as exc:
            print(f"  {name:8s} unreachable: {exc}")
            continue
        print(f"  {name:8s} delta={r.delta:.6f}  constraints ok={r.ok}")
