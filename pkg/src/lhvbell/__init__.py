"""Local hidden-variables models for optical Bell tests.

Closed-form and Monte Carlo predictions of a family of local models with
angular hidden variables, the quantum-mechanical predictions they are
compared with, the Bell-type inequalities separating the two, and fits of
the model family to quantum curves.
"""

from .inequalities import (
    FourierCurve,
    InequalityReport,
    SampledCurve,
    ch_statistic,
    chsh_statistic,
    correlator_from_rates,
    delta_deviation,
    delta_lower_bound,
    discrimination_check,
    qm_curve,
    rtot_analysis,
    visibilities,
    visibility_ratio_test,
)
from .model import (
    Cosine,
    DetectionParams,
    EpsilonCosine,
    FourierSeries,
    HiddenAngles,
    ModelPrediction,
    WrappedGaussian,
    closed_form_curve,
    compatibility_bound,
    density_eval,
    density_fourier_coefficients,
    detection_prob,
    min_epsilon,
    positivity_check,
)
from .montecarlo import (
    SimulationConfig,
    generate_events,
    sample_hidden_pair,
    simulate_rates,
    simulate_two_channel,
    verify_lhv_constraints,
)
from .optimize import FitResult, FitTarget, fit_epsilon_model, fit_fourier_model, fit_gaussian_model
from .quantum import (
    CascadeConfig,
    SingleChannelConfig,
    qm_cascade,
    qm_single_channel,
    qm_two_channel,
    violation_thresholds,
)

__version__ = "0.1.0"
