"""Event-by-event simulation of local hidden-variables models.

Each emitted pair gets one draw of hidden angles (l1, l2). Each side then
decides its own outcome from its own angle, its own polarizer setting and
its own uniform variate, so the simulated data are local by construction.

Randomness is organised in fixed blocks of ``BLOCK_SIZE`` pairs. Every
(setting, block) cell has its own Philox stream derived from the seed, so
results do not depend on how blocks are distributed over workers.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, NamedTuple, Sequence, Tuple

import numpy as np

from .model import (
    PI,
    DetectionParams,
    HiddenAngles,
    LhvDensity,
    circular_distance,
    detection_prob,
    reduce_angle,
)

__all__ = [
    "BLOCK_SIZE",
    "CDF_POINTS",
    "SimulationConfig",
    "RateEstimate",
    "RateTriple",
    "TwoChannelEstimate",
    "Outcome",
    "DetectionEvent",
    "DifferenceSampler",
    "ConstraintReport",
    "sample_hidden_pair",
    "sample_hidden_angles",
    "simulate_rates",
    "simulate_two_channel",
    "generate_events",
    "iter_event_blocks",
    "write_events_csv",
    "verify_lhv_constraints",
    "EVENT_COLUMNS",
]

BLOCK_SIZE = 1 << 20
CDF_POINTS = 16384
EVENT_COLUMNS = ("pair_index", "side1", "side2", "phi1", "phi2")

NONE, PLUS, MINUS = 0, 1, 2


@dataclass(frozen=True)
class SimulationConfig:
    density: LhvDensity
    detection: DetectionParams
    angle_pairs: Tuple[Tuple[float, float], ...]
    n_pairs: int
    seed: int = 0

    def __post_init__(self):
        pairs = tuple((float(a), float(b)) for a, b in self.angle_pairs)
        if not pairs:
            raise ValueError("angle_pairs must not be empty")
        if int(self.n_pairs) < 1:
            raise ValueError(f"n_pairs must be >= 1, got {self.n_pairs!r}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        object.__setattr__(self, "angle_pairs", pairs)
        object.__setattr__(self, "n_pairs", int(self.n_pairs))
        object.__setattr__(self, "seed", int(self.seed))


class RateEstimate(NamedTuple):
    value: float
    std_error: float

    @classmethod
    def from_counts(cls, count: int, n: int) -> "RateEstimate":
        p = count / n
        return cls(p, math.sqrt(max(p * (1.0 - p), 0.0) / n))


class RateTriple(NamedTuple):
    R1: RateEstimate
    R2: RateEstimate
    R12: RateEstimate


class TwoChannelEstimate(NamedTuple):
    pp: RateEstimate
    mm: RateEstimate
    pm: RateEstimate
    mp: RateEstimate


class Outcome(str, Enum):
    PLUS = "plus"
    MINUS = "minus"
    DETECTED = "detected"
    NONE = "none"


@dataclass(frozen=True)
class DetectionEvent:
    pair_index: int
    side1: Outcome
    side2: Outcome
    phi1: float
    phi2: float


class DifferenceSampler:
    """Inverse-CDF sampler for the hidden-angle difference (l1 - l2) mod pi.

    The CDF is tabulated on ``points`` equal cells and inverted by linear
    interpolation; both endpoints are pinned to 0 and 1.
    """

    def __init__(self, density: LhvDensity, points: int = CDF_POINTS):
        grid = np.linspace(0.0, PI, points + 1)
        cdf = np.asarray(density.marginal_cdf(grid), dtype=float)
        cdf[0], cdf[-1] = 0.0, 1.0
        cdf = np.clip(np.maximum.accumulate(cdf), 0.0, 1.0)
        self.grid = grid
        self.cdf = cdf

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return np.interp(u, self.cdf, self.grid)


def sample_hidden_angles(density: LhvDensity, rng: np.random.Generator, size: int,
                         sampler: DifferenceSampler | None = None):
    """Vectorised draw of ``size`` hidden-angle pairs, returned as two arrays."""
    sampler = sampler or DifferenceSampler(density)
    lam1 = PI * rng.random(size)
    delta = sampler(rng.random(size))
    lam2 = np.mod(lam1 - delta, PI)
    return lam1, lam2


def sample_hidden_pair(density: LhvDensity, rng: np.random.Generator) -> HiddenAngles:
    lam1, lam2 = sample_hidden_angles(density, rng, 1)
    return HiddenAngles(lam1[0], lam2[0])


def _side_outcome(lam, phi, detection: DetectionParams, u, two_channel: bool):
    """Outcome codes for one side. Reads only this side's variables."""
    fires = u < detection.beta
    out = np.where(fires & (circular_distance(lam, phi) <= detection.gamma), PLUS, NONE)
    if two_channel:
        minus = fires & (out == NONE) & (circular_distance(lam, phi + PI / 2) <= detection.gamma)
        out = np.where(minus, MINUS, out)
    return out.astype(np.int8)


def _block_rng(seed: int, setting: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(setting, block))
    return np.random.Generator(np.random.Philox(ss))


def _blocks(n_pairs: int):
    n_blocks = -(-n_pairs // BLOCK_SIZE)
    for b in range(n_blocks):
        start = b * BLOCK_SIZE
        yield b, start, min(BLOCK_SIZE, n_pairs - start)


def _simulate_block(config, sampler, setting, block, size, two_channel):
    phi1, phi2 = config.angle_pairs[setting]
    rng = _block_rng(config.seed, setting, block)
    lam1, lam2 = sample_hidden_angles(config.density, rng, size, sampler)
    u1 = rng.random(size)
    u2 = rng.random(size)
    s1 = _side_outcome(lam1, phi1, config.detection, u1, two_channel)
    s2 = _side_outcome(lam2, phi2, config.detection, u2, two_channel)
    return s1, s2


def _count_setting(config, sampler, setting, two_channel, workers):
    def work(item):
        b, _, size = item
        s1, s2 = _simulate_block(config, sampler, setting, b, size, two_channel)
        flat = s1.astype(np.int64) * 3 + s2
        return np.bincount(flat, minlength=9).reshape(3, 3)

    items = list(_blocks(config.n_pairs))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, items))
    else:
        parts = [work(it) for it in items]
    return sum(parts)


def simulate_rates(config: SimulationConfig, workers: int | None = None) -> Dict[Tuple[float, float], RateTriple]:
    """Single and coincidence frequencies per setting, with binomial errors.

    Rates are returned as fractions of emitted pairs (R/R0).
    """
    sampler = DifferenceSampler(config.density)
    out = {}
    n = config.n_pairs
    for k, pair in enumerate(config.angle_pairs):
        counts = _count_setting(config, sampler, k, False, workers)
        n1 = int(counts[PLUS, :].sum())
        n2 = int(counts[:, PLUS].sum())
        n12 = int(counts[PLUS, PLUS])
        out[pair] = RateTriple(
            RateEstimate.from_counts(n1, n),
            RateEstimate.from_counts(n2, n),
            RateEstimate.from_counts(n12, n),
        )
    return out


def simulate_two_channel(config: SimulationConfig, workers: int | None = None) -> Dict[Tuple[float, float], TwoChannelEstimate]:
    """Coincidence frequencies in the four detector pairs of a two-channel setup."""
    sampler = DifferenceSampler(config.density)
    out = {}
    n = config.n_pairs
    for k, pair in enumerate(config.angle_pairs):
        counts = _count_setting(config, sampler, k, True, workers)
        out[pair] = TwoChannelEstimate(
            RateEstimate.from_counts(int(counts[PLUS, PLUS]), n),
            RateEstimate.from_counts(int(counts[MINUS, MINUS]), n),
            RateEstimate.from_counts(int(counts[PLUS, MINUS]), n),
            RateEstimate.from_counts(int(counts[MINUS, PLUS]), n),
        )
    return out


def iter_event_blocks(config: SimulationConfig, two_channel: bool) -> Iterator[dict]:
    """Raw outcomes block by block as arrays (codes: 0 none, 1 plus, 2 minus).

    Pair indices run over all settings: setting k covers
    ``[k * n_pairs, (k + 1) * n_pairs)``.
    """
    sampler = DifferenceSampler(config.density)
    for k, (phi1, phi2) in enumerate(config.angle_pairs):
        for b, start, size in _blocks(config.n_pairs):
            s1, s2 = _simulate_block(config, sampler, k, b, size, two_channel)
            yield {
                "pair_index": np.arange(size, dtype=np.int64) + k * config.n_pairs + start,
                "side1": s1,
                "side2": s2,
                "phi1": phi1,
                "phi2": phi2,
            }


def _labels(two_channel: bool):
    if two_channel:
        return {NONE: Outcome.NONE, PLUS: Outcome.PLUS, MINUS: Outcome.MINUS}
    return {NONE: Outcome.NONE, PLUS: Outcome.DETECTED}


def generate_events(config: SimulationConfig, two_channel: bool = True) -> Iterator[DetectionEvent]:
    """Replayable stream of raw detection events, one per emitted pair.

    Nothing is subtracted or filtered; pairs with no detection are included.
    """
    labels = _labels(two_channel)
    for blk in iter_event_blocks(config, two_channel):
        for i, a, b in zip(blk["pair_index"].tolist(), blk["side1"].tolist(), blk["side2"].tolist()):
            yield DetectionEvent(i, labels[a], labels[b], blk["phi1"], blk["phi2"])


def write_events_csv(path, config: SimulationConfig, two_channel: bool = True) -> None:
    """Export the event stream as CSV with a header line.

    Columns: pair_index, side1, side2, phi1, phi2. The file appears only
    once it is complete.
    """
    labels = _labels(two_channel)
    names = np.array([labels.get(c, Outcome.NONE).value for c in range(3)])
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(",".join(EVENT_COLUMNS) + "\n")
            for blk in iter_event_blocks(config, two_channel):
                p1 = f"{blk['phi1']:.12g}"
                p2 = f"{blk['phi2']:.12g}"
                buf = io.StringIO()
                w = csv.writer(buf, lineterminator="\n")
                w.writerows(zip(blk["pair_index"].tolist(), names[blk["side1"]], names[blk["side2"]],
                                [p1] * len(blk["side1"]), [p2] * len(blk["side1"])))
                fh.write(buf.getvalue())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class ConstraintReport:
    min_density: float
    integral: float
    max_detection: float
    homogeneous_ok: bool
    normalization_ok: bool
    inhomogeneous_ok: bool

    @property
    def ok(self) -> bool:
        return self.homogeneous_ok and self.normalization_ok and self.inhomogeneous_ok


def verify_lhv_constraints(density: LhvDensity, detection: DetectionParams,
                           grid_resolution: int = 256, tol: float = 1e-9) -> ConstraintReport:
    """Check non-negativity, normalization and P <= 1 on a grid.

    Uses the full midpoint grid over [0, pi)^2. Because the density depends
    only on (l1 - l2) mod pi, the m^2 grid values are the m values
    rho(k pi / m), each repeated m times, so only those are evaluated. The
    midpoint rule integrates trigonometric polynomials of degree below the
    grid size exactly.
    """
    m = int(grid_resolution)
    lam = (np.arange(m) + 0.5) * (PI / m)
    rho = np.asarray(density.of_difference(np.arange(m) * (PI / m)), dtype=float)
    integral = float(rho.sum() * m * (PI / m) ** 2)
    min_rho = float(rho.min())
    # P depends only on the distance between lambda and the setting
    p = detection_prob(detection, lam, lam[0])
    p_max = float(np.max(p))
    return ConstraintReport(
        min_density=min_rho,
        integral=integral,
        max_detection=p_max,
        homogeneous_ok=min_rho >= -1e-10 and float(np.min(p)) >= 0.0,
        normalization_ok=abs(integral - 1.0) <= tol,
        inhomogeneous_ok=p_max <= 1.0,
    )
