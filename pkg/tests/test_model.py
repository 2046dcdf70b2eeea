import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.stats import qmc

from lhvbell.model import (
    Cosine,
    DetectionParams,
    EpsilonCosine,
    FourierSeries,
    HiddenAngles,
    ModelFamilyError,
    TailConditionError,
    WrappedGaussian,
    attenuation,
    closed_form_curve,
    compatibility_bound,
    density_eval,
    density_fourier_coefficients,
    detection_prob,
    min_epsilon,
    positivity_check,
    reduce_angle,
)

PI = math.pi

# R12/R1 at phi in {0, pi/8, pi/4, 3pi/8, pi/2}, frozen from scipy dblquad of
# rho(l1 - l2) over the two detection windows (real-space wrapped Gaussian sum)
ORACLE = {
    "cosine": (EpsilonCosine(0.0), PI / 8, 1.0, 0.25,
               [0.4526423672846756, 0.3932897920626891, 0.25, 0.10671020793731095, 0.047357632715324484]),
    "epsilon": (EpsilonCosine(0.2), PI / 8, 1.0, 0.25,
                [0.5134350774700783, 0.4219477504752269, 0.2297357632715325, 0.07805224952477317,
                 0.027093395986856936]),
    "gaussian": (WrappedGaussian(PI / 18), PI / 4, 1.0, 0.5,
                 [0.9113461599107928, 0.7490589803642744, 0.5, 0.25094101963572557, 0.08865384008920724]),
    "half_beta": (EpsilonCosine(0.2), PI / 16, 0.5, 0.0625,
                  [0.1438552086306176, 0.11286233010442155, 0.052367881635766236, 0.012137669895578447,
                   0.0014090280978500068]),
}
ANGLES = [0, PI / 8, PI / 4, 3 * PI / 8, PI / 2]


def wrapped_gaussian_real_space(delta, sigma):
    k = np.arange(-30, 31)
    d = np.asarray(delta, dtype=float)[..., None] + k * PI
    return np.exp(-d**2 / (2 * sigma**2)).sum(-1) / (math.sqrt(2 * PI) * sigma * PI)


ALL_DENSITIES = [
    Cosine(),
    EpsilonCosine(0.0),
    EpsilonCosine(0.2),
    EpsilonCosine(1 / 3),
    WrappedGaussian(PI / 18),
    WrappedGaussian(PI / 40),
    WrappedGaussian(0.3),
    FourierSeries([1.2, 0.3, -0.1]),
]


@pytest.mark.parametrize("name", list(ORACLE))
def test_closed_form_matches_double_integral(name):
    density, gamma, beta, r1, curve = ORACLE[name]
    pred = closed_form_curve(density, DetectionParams(gamma, beta))
    assert pred.single_rate == pytest.approx(r1, abs=1e-12)
    for phi, expected in zip(ANGLES, curve):
        assert pred.coincidence_over_single(phi) == pytest.approx(expected, abs=1e-9)


def test_cosine_examples():
    pred = closed_form_curve(Cosine(), DetectionParams(PI / 8, 1.0))
    assert pred.eta == pytest.approx(0.5, abs=1e-15)
    assert pred.visibility == pytest.approx(8 / PI**2, abs=1e-12)
    assert pred.coincidence_over_single(0.0) == pytest.approx(0.25 * (1 + 8 / PI**2), abs=1e-12)


def test_cosine_is_epsilon_zero():
    d = DetectionParams(0.3, 0.9)
    a = closed_form_curve(Cosine(), d)
    b = closed_form_curve(EpsilonCosine(0.0), d)
    phi = np.linspace(0, PI, 17)
    np.testing.assert_allclose(a.coincidence(phi), b.coincidence(phi), atol=1e-15)


@pytest.mark.parametrize("density", ALL_DENSITIES, ids=repr)
def test_density_normalization(density):
    # integral over [0, pi)^2 of f(l1 - l2) equals pi * integral of f over one period
    val, _ = quad(lambda d: float(density.of_difference(d)), 0, PI, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert PI * val == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("sigma", [PI / 40, PI / 18, 0.3])
def test_wrapped_gaussian_matches_real_space_sum(sigma):
    delta = np.linspace(-PI, PI, 101)
    np.testing.assert_allclose(WrappedGaussian(sigma).of_difference(delta),
                               wrapped_gaussian_real_space(delta, sigma), rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("density", ALL_DENSITIES[:7], ids=repr)
def test_positive_on_quasi_random_points(density):
    pts = qmc.Sobol(2, seed=3).random(1024) * PI
    assert np.all(density(pts[:, 0], pts[:, 1]) >= 0)


@pytest.mark.parametrize("density", ALL_DENSITIES, ids=repr)
def test_fourier_coefficients_match_numerical_projection(density):
    coeffs = density_fourier_coefficients(density, 6, check_tail=False)
    for n in range(1, 7):
        val, _ = quad(lambda d: float(density.of_difference(d)) * math.cos(2 * n * d), 0, PI,
                      epsabs=1e-13, limit=200)
        assert coeffs[n - 1] == pytest.approx(2 * PI * val, abs=1e-9)


def test_gaussian_coefficients_example():
    a = WrappedGaussian(PI / 18).coefficients(3)
    np.testing.assert_allclose(a, 2 * np.exp(-2 * np.arange(1, 4) ** 2 * (PI / 18) ** 2), rtol=1e-14)


def test_tail_condition_names_threshold():
    with pytest.raises(TailConditionError, match="sigma"):
        density_fourier_coefficients(WrappedGaussian(0.5), 4)
    assert len(density_fourier_coefficients(WrappedGaussian(0.5), 4, check_tail=False)) == 4
    assert WrappedGaussian.max_sigma() < 0.5
    density_fourier_coefficients(WrappedGaussian(PI / 18), 4)


def test_hidden_angles_reduced_mod_pi():
    h = HiddenAngles(PI + 0.25, -0.5)
    assert h.lambda1 == pytest.approx(0.25)
    assert h.lambda2 == pytest.approx(PI - 0.5)
    assert density_eval(Cosine(), h) == pytest.approx(
        (1 + math.cos(2 * (0.25 + 0.5))) / PI**2, abs=1e-14)


def test_detection_prob_window():
    d = DetectionParams(PI / 8, 0.7)
    assert detection_prob(d, 0.1, 0.0) == 0.7
    assert detection_prob(d, PI / 8 + 1e-3, 0.0) == 0.0
    # window wraps through pi
    assert detection_prob(d, PI - 0.1, 0.0) == 0.7


def test_detection_params_validation():
    with pytest.raises(ValueError):
        DetectionParams(0.0, 1.0)
    with pytest.raises(ValueError):
        DetectionParams(PI / 4 + 1e-9, 1.0)
    assert DetectionParams.from_efficiency(1.0).gamma == pytest.approx(PI / 4)
    assert not DetectionParams(0.2, 1.5).is_admissible


def test_epsilon_range_enforced():
    with pytest.raises(ValueError):
        EpsilonCosine(0.34)
    with pytest.raises(ValueError):
        EpsilonCosine(-0.01)


def test_compatibility_bound_examples():
    assert compatibility_bound(0.2) == pytest.approx(0.96753, abs=1e-5)
    assert compatibility_bound(1.0) == pytest.approx(4 / PI**2, abs=1e-12)
    with pytest.raises(ValueError):
        compatibility_bound(0.0)


def test_min_epsilon_examples():
    assert min_epsilon(0.9, 0.2) == 0.0
    b = compatibility_bound(0.5)
    assert min_epsilon(1.0, 0.5) == pytest.approx(1 / b - 1, rel=1e-12)
    with pytest.raises(ModelFamilyError):
        min_epsilon(1.0, 0.848)


@pytest.mark.parametrize("eps,expected", [(0.3, True), (1 / 3, True), (0.34, False), (0.4, False)])
def test_positivity_matches_epsilon_criterion(eps, expected):
    assert positivity_check([1 + eps, eps]).nonnegative is expected


def test_positivity_other_examples():
    assert positivity_check([1.0]).nonnegative
    r = positivity_check([2.0])
    assert not r.nonnegative
    assert r.minimum == pytest.approx(-1.0, abs=1e-9)


def test_attenuation_matches_sinc():
    s = attenuation(0.4, 3)
    for n in range(1, 4):
        x = 2 * n * 0.4
        assert s[n - 1] == pytest.approx((math.sin(x) / x) ** 2, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50))
def test_density_invariant_under_common_shift(l1, l2):
    d = EpsilonCosine(0.25)
    assert d(l1, l2) == pytest.approx(d(l1 + 1.3, l2 + 1.3), abs=1e-12)
    assert d(l1, l2) == pytest.approx(d(l1 + PI, l2), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(-100, 100))
def test_reduce_angle_range(x):
    r = reduce_angle(x)
    assert 0.0 <= r < PI
    assert math.isclose(math.cos(2 * r), math.cos(2 * x), abs_tol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, PI / 4), st.floats(0.0, 1 / 3), st.floats(0, PI))
def test_ch_never_exceeds_one_closed_form(gamma, eps, phi):
    pred = closed_form_curve(EpsilonCosine(eps), DetectionParams(gamma, 1.0))
    ch = (3 * pred.coincidence(phi) - pred.coincidence(3 * phi)) / (2 * pred.single_rate)
    assert ch <= 1 + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, PI / 4))
def test_visibility_decreases_with_window(gamma):
    v1 = closed_form_curve(Cosine(), DetectionParams(gamma, 1.0)).visibility
    v2 = closed_form_curve(Cosine(), DetectionParams(min(gamma * 1.05, PI / 4), 1.0)).visibility
    assert v2 <= v1 + 1e-15


def test_gaussian_eta_to_zero_limit():
    # narrow windows leave the density coefficients untouched
    pred = closed_form_curve(WrappedGaussian(PI / 18), DetectionParams(1e-4, 1.0))
    assert pred.visibility == pytest.approx(2 * math.exp(-2 * (PI / 18) ** 2), rel=1e-6)
