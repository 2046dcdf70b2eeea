"""Run configuration: flat ``key=value`` text with dotted section prefixes.

Example::

    mode=simulate
    geometry.kind=two-channel
    model.density=gaussian
    model.sigma=pi/18
    model.gamma=pi/4
    angles=0:pi/2:9
    n_pairs=1000000
    seed=42
    output.format=csv

Numeric values may use ``pi`` in simple arithmetic (``pi/8``, ``3*pi/8``).
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, fields
from typing import Optional, Tuple

import numpy as np

__all__ = [
    "ConfigError",
    "RunConfig",
    "MODES",
    "parse_config",
    "parse_number",
    "parse_angles",
    "load_config",
]

MODES = ("predict", "simulate", "inequalities", "optimize", "reproduce-paper")
GEOMETRIES = ("single", "two-channel", "cascade")
DENSITIES = ("cosine", "epsilon", "gaussian", "fourier")
FORMATS = ("csv", "text")
METHODS = ("epsilon", "gaussian", "fourier", "all")


class ConfigError(ValueError):
    pass


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_number(text: str) -> float:
    """Float literal or arithmetic on numbers and ``pi``."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ConfigError(f"not a number: {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


def parse_angles(spec: str) -> np.ndarray:
    """``start:stop:count`` (inclusive grid) or a comma-separated list."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"angle range must be start:stop:count, got {spec!r}")
        start, stop = parse_number(parts[0]), parse_number(parts[1])
        try:
            count = int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"angle count must be an integer, got {parts[2]!r}") from exc
        if count < 1:
            raise ConfigError("angle count must be >= 1")
        return np.linspace(start, stop, count)
    vals = [parse_number(p) for p in spec.split(",") if p.strip()]
    if not vals:
        raise ConfigError("empty angle list")
    return np.array(vals)


# key -> (field name, kind)
_KEYS = {
    "mode": ("mode", "str"),
    "geometry.kind": ("geometry_kind", "str"),
    "geometry.R0": ("R0", "num"),
    "geometry.R1": ("R1", "num"),
    "geometry.eta": ("eta", "num"),
    "geometry.V": ("V", "num"),
    "geometry.eta_prime": ("eta_prime", "num"),
    "geometry.V_prime": ("V_prime", "num"),
    "geometry.alpha": ("alpha", "num"),
    "model.density": ("density", "str"),
    "model.epsilon": ("epsilon", "num"),
    "model.sigma": ("sigma", "num"),
    "model.coefficients": ("coefficients", "nums"),
    "model.gamma": ("gamma", "num"),
    "model.beta": ("beta", "num"),
    "angles": ("angles", "str"),
    "angles.remote": ("remote_angle", "num"),
    "n_pairs": ("n_pairs", "int"),
    "seed": ("seed", "int"),
    "output.path": ("output_path", "str"),
    "output.format": ("output_format", "str"),
    "events.path": ("events_path", "str"),
    "target.eta": ("target_eta", "num"),
    "target.V": ("target_V", "num"),
    "optimize.method": ("method", "str"),
    "optimize.n_max": ("n_max", "int"),
}
_FIELD_TO_KEY = {f: k for k, (f, _) in _KEYS.items()}


@dataclass(frozen=True)
class RunConfig:
    mode: str
    geometry_kind: str = "single"
    R0: float = 1.0
    R1: float = 1.0
    eta: Optional[float] = None
    V: Optional[float] = None
    eta_prime: Optional[float] = None
    V_prime: Optional[float] = None
    alpha: Optional[float] = None
    density: Optional[str] = None
    epsilon: Optional[float] = None
    sigma: Optional[float] = None
    coefficients: Optional[Tuple[float, ...]] = None
    gamma: Optional[float] = None
    beta: float = 1.0
    angles: str = "0:pi/2:9"
    remote_angle: float = 0.0
    n_pairs: int = 100_000
    seed: Optional[int] = None
    output_path: Optional[str] = None
    output_format: str = "csv"
    events_path: Optional[str] = None
    target_eta: Optional[float] = None
    target_V: Optional[float] = None
    method: str = "all"
    n_max: int = 8

    @property
    def has_model(self) -> bool:
        return self.density is not None

    def to_text(self) -> str:
        """Serialize non-default fields; ``parse_config`` inverts this."""
        defaults = RunConfig(mode=self.mode)
        lines = [f"mode={self.mode}"]
        for f in fields(self):
            if f.name == "mode":
                continue
            value = getattr(self, f.name)
            if value == getattr(defaults, f.name):
                continue
            if isinstance(value, tuple):
                text = ",".join(repr(v) for v in value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{_FIELD_TO_KEY[f.name]}={text}")
        return "\n".join(lines) + "\n"

    def validate(self) -> None:
        """Raise ``ConfigError`` listing every missing or invalid field."""
        problems = []
        if self.mode not in MODES:
            problems.append(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.geometry_kind not in GEOMETRIES:
            problems.append(f"geometry.kind must be one of {GEOMETRIES}")
        if self.output_format not in FORMATS:
            problems.append(f"output.format must be one of {FORMATS}")
        if self.density is not None and self.density not in DENSITIES:
            problems.append(f"model.density must be one of {DENSITIES}")
        if self.method not in METHODS:
            problems.append(f"optimize.method must be one of {METHODS}")
        if self.has_model:
            if self.gamma is None:
                problems.append("model.gamma is required with model.density")
            need = {"epsilon": "epsilon", "gaussian": "sigma", "fourier": "coefficients"}.get(self.density)
            if need and getattr(self, need) is None:
                problems.append(f"model.{need} is required for density {self.density!r}")
        geometry_needed = {
            "single": ("eta", "V"),
            "two-channel": ("eta", "V"),
            "cascade": ("eta_prime", "V_prime", "alpha"),
        }.get(self.geometry_kind, ())
        if self.mode in ("predict", "inequalities") and not self.has_model:
            for name in geometry_needed:
                if getattr(self, name) is None:
                    problems.append(f"{_FIELD_TO_KEY[name]} is required for mode {self.mode!r}")
        if self.mode == "simulate":
            if not self.has_model:
                problems.append("simulate requires model.density")
            if self.seed is None:
                problems.append("simulate requires seed")
            if self.geometry_kind == "cascade":
                problems.append("simulate supports geometry.kind single or two-channel")
            if self.n_pairs < 1:
                problems.append("n_pairs must be >= 1")
        if self.mode == "optimize":
            for name in ("target_eta", "target_V"):
                if getattr(self, name) is None:
                    problems.append(f"{_FIELD_TO_KEY[name]} is required for mode 'optimize'")
        if self.mode in ("predict", "simulate"):
            try:
                parse_angles(self.angles)
            except ConfigError as exc:
                problems.append(str(exc))
        if self.seed is not None and not (0 <= self.seed < 2**64):
            problems.append("seed must be an unsigned 64-bit integer")
        if problems:
            raise ConfigError("; ".join(problems))


def parse_config(text: str, mode: Optional[str] = None) -> RunConfig:
    """Parse key=value text. Unknown keys are rejected, all listed at once."""
    values = {}
    unknown = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in _KEYS:
            unknown.append(key)
            continue
        name, kind = _KEYS[key]
        if kind == "num":
            values[name] = parse_number(value)
        elif kind == "nums":
            values[name] = tuple(parse_number(v) for v in value.split(",") if v.strip())
        elif kind == "int":
            try:
                values[name] = int(value)
            except ValueError as exc:
                raise ConfigError(f"{key} must be an integer, got {value!r}") from exc
        else:
            values[name] = value
    if unknown:
        raise ConfigError("unknown keys: " + ", ".join(unknown))
    if mode is not None:
        if "mode" in values and values["mode"] != mode:
            raise ConfigError(f"config mode {values['mode']!r} conflicts with subcommand {mode!r}")
        values["mode"] = mode
    if "mode" not in values:
        raise ConfigError("mode is required")
    return RunConfig(**values)


def load_config(path, mode: Optional[str] = None) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read(), mode)
