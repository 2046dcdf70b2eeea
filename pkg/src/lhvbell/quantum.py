"""Quantum-mechanical rate predictions for polarization-correlation setups."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "SingleChannelConfig",
    "CascadeConfig",
    "SingleRates",
    "TwoChannelRates",
    "ViolationFlags",
    "qm_single_channel",
    "qm_two_channel",
    "qm_cascade",
    "solid_angle",
    "aperture_factor",
    "violation_thresholds",
    "CHSH_VISIBILITY_THRESHOLD",
    "GENUINE_EFFICIENCY_THRESHOLD",
]

CHSH_VISIBILITY_THRESHOLD = math.sqrt(2.0) / 2.0
GENUINE_EFFICIENCY_THRESHOLD = 2.0 / (1.0 + math.sqrt(2.0))


def _check_unit(name, value, lower_open=False):
    ok = (0.0 < value <= 1.0) if lower_open else (0.0 <= value <= 1.0)
    if not ok:
        interval = "(0, 1]" if lower_open else "[0, 1]"
        raise ValueError(f"{name} must lie in {interval}, got {value!r}")


@dataclass(frozen=True)
class SingleChannelConfig:
    R0: float
    eta: float
    V: float
    phi: float = 0.0

    def __post_init__(self):
        if not self.R0 > 0:
            raise ValueError(f"R0 must be positive, got {self.R0!r}")
        _check_unit("eta", self.eta, lower_open=True)
        _check_unit("V", self.V)


@dataclass(frozen=True)
class CascadeConfig:
    """Atomic-cascade source seen through two equal circular apertures."""

    R0: float
    eta_prime: float
    V_prime: float
    alpha: float

    def __post_init__(self):
        if not self.R0 > 0:
            raise ValueError(f"R0 must be positive, got {self.R0!r}")
        _check_unit("eta_prime", self.eta_prime, lower_open=True)
        _check_unit("V_prime", self.V_prime)
        if not (0.0 < self.alpha <= math.pi / 2):
            raise ValueError(f"alpha must lie in (0, pi/2], got {self.alpha!r}")

    @property
    def effective_efficiency(self) -> float:
        return self.eta_prime * solid_angle(self.alpha) / (4 * math.pi)

    @property
    def effective_visibility(self) -> float:
        return self.V_prime * aperture_factor(self.alpha)


class SingleRates(NamedTuple):
    R1: float
    R2: float
    R12: float


class TwoChannelRates(NamedTuple):
    pp: float
    mm: float
    pm: float
    mp: float

    @property
    def total(self):
        return self.pp + self.mm + self.pm + self.mp


class ViolationFlags(NamedTuple):
    chsh_violated: bool
    genuine_violated: bool


def qm_single_channel(config: SingleChannelConfig, phi=None) -> SingleRates:
    """Single and coincidence rates behind one-channel polarizers.

    ``phi`` overrides ``config.phi`` and may be an array.
    """
    phi = config.phi if phi is None else phi
    r1 = 0.5 * config.eta * config.R0
    r12 = 0.25 * config.eta**2 * config.R0 * (1.0 + config.V * np.cos(2.0 * np.asarray(phi, dtype=float)))
    if np.ndim(r12) == 0:
        r12 = float(r12)
    return SingleRates(r1, r1, r12)


def qm_two_channel(R1: float, eta: float, V: float, phi) -> TwoChannelRates:
    _check_unit("eta", eta, lower_open=True)
    _check_unit("V", V)
    phi = np.asarray(phi, dtype=float)

    def same(p):
        out = 0.5 * eta * R1 * (1.0 + V * np.cos(2.0 * p))
        return float(out) if np.ndim(out) == 0 else out

    pp = same(phi)
    pm = same(phi + math.pi / 2)
    return TwoChannelRates(pp, pp, pm, pm)


def solid_angle(alpha: float) -> float:
    return 2.0 * math.pi * (1.0 - math.cos(alpha))


def aperture_factor(alpha: float) -> float:
    """Loss of polarization correlation for a 0-1-0 cascade seen through
    apertures of half-angle ``alpha``."""
    return 1.0 - (2.0 / 3.0) * (1.0 - math.cos(alpha)) ** 2


def qm_cascade(config: CascadeConfig, phi) -> SingleRates:
    # the near-unity prefactor on R12 is omitted
    frac = solid_angle(config.alpha) / (4.0 * math.pi)
    r1 = 0.5 * frac * config.eta_prime * config.R0
    mod = 1.0 + config.V_prime * aperture_factor(config.alpha) * np.cos(2.0 * np.asarray(phi, dtype=float))
    r12 = 0.25 * config.eta_prime**2 * frac**2 * config.R0 * mod
    if np.ndim(r12) == 0:
        r12 = float(r12)
    return SingleRates(r1, r1, r12)


def violation_thresholds(eta: float, V: float) -> ViolationFlags:
    """Whether QM violates the CHSH form (V > sqrt(2)/2) and the
    inhomogeneous CH form (eta (1 + sqrt(2) V) > 2)."""
    _check_unit("eta", eta, lower_open=True)
    _check_unit("V", V)
    return ViolationFlags(
        chsh_violated=V > CHSH_VISIBILITY_THRESHOLD,
        genuine_violated=eta * (1.0 + math.sqrt(2.0) * V) > 2.0,
    )
