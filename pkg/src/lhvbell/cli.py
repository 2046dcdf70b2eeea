"""Command-line front end.

Subcommands: predict, simulate, inequalities, optimize, reproduce-paper.
Exit status is 0 on success, 1 on configuration errors and 2 on runtime or
domain errors (including failed benchmark rows in reproduce-paper).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import inequalities as ineq
from .config import MODES, ConfigError, RunConfig, load_config, parse_angles, parse_config
from .model import (
    Cosine,
    DetectionParams,
    EpsilonCosine,
    FourierSeries,
    LhvDensity,
    WrappedGaussian,
    closed_form_curve,
)
from .montecarlo import SimulationConfig, simulate_rates, simulate_two_channel, write_events_csv
from .optimize import FitTarget, fit_epsilon_model, fit_fourier_model, fit_gaussian_model
from .quantum import CascadeConfig, SingleChannelConfig, qm_cascade, qm_single_channel, qm_two_channel
from .reproduce import format_table, reproduce_benchmarks

__all__ = ["main", "run", "build_parser"]

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_to_csv(rows: List[Dict[str, object]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (_fmt(v) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()})
    return buf.getvalue()


def rows_to_text(rows: List[Dict[str, object]]) -> str:
    blocks = []
    for row in rows:
        blocks.append("\n".join(
            f"{k}={_fmt(v) if isinstance(v, (float, np.floating)) else v}" for k, v in row.items()))
    return "\n\n".join(blocks) + "\n"


def build_density(cfg: RunConfig) -> LhvDensity:
    if cfg.density == "cosine":
        return Cosine()
    if cfg.density == "epsilon":
        return EpsilonCosine(cfg.epsilon)
    if cfg.density == "gaussian":
        return WrappedGaussian(cfg.sigma)
    return FourierSeries(cfg.coefficients)


def _predict_rows(cfg: RunConfig):
    phis = parse_angles(cfg.angles)
    rows = []
    if cfg.has_model:
        pred = closed_form_curve(build_density(cfg), DetectionParams(cfg.gamma, cfg.beta))
        for p in phis:
            if cfg.geometry_kind == "two-channel":
                pp, mm, pm, mp = pred.two_channel(p)
                rows.append({"phi": p, "r_pp": pp, "r_mm": mm, "r_pm": pm, "r_mp": mp})
            else:
                r = pred.single_rate
                rows.append({"phi": p, "r1": r, "r2": r, "r12": pred.coincidence(p)})
        return rows
    for p in phis:
        if cfg.geometry_kind == "two-channel":
            rates = qm_two_channel(cfg.R1, cfg.eta, cfg.V, p)
            rows.append({"phi": p, "r_pp": rates.pp, "r_mm": rates.mm, "r_pm": rates.pm, "r_mp": rates.mp})
        elif cfg.geometry_kind == "cascade":
            r = qm_cascade(CascadeConfig(cfg.R0, cfg.eta_prime, cfg.V_prime, cfg.alpha), p)
            rows.append({"phi": p, "r1": r.R1, "r2": r.R2, "r12": r.R12})
        else:
            r = qm_single_channel(SingleChannelConfig(cfg.R0, cfg.eta, cfg.V, p))
            rows.append({"phi": p, "r1": r.R1, "r2": r.R2, "r12": r.R12})
    return rows


def _simulate_rows(cfg: RunConfig):
    phis = parse_angles(cfg.angles)
    sim = SimulationConfig(
        density=build_density(cfg),
        detection=DetectionParams(cfg.gamma, cfg.beta),
        angle_pairs=[(p + cfg.remote_angle, cfg.remote_angle) for p in phis],
        n_pairs=cfg.n_pairs,
        seed=cfg.seed,
    )
    rows = []
    if cfg.geometry_kind == "two-channel":
        res = simulate_two_channel(sim)
        for p, key in zip(phis, sim.angle_pairs):
            est = res[key]
            row = {"phi": p}
            for name in ("pp", "mm", "pm", "mp"):
                e = getattr(est, name)
                row[f"r_{name}"] = e.value
                row[f"r_{name}_se"] = e.std_error
            rows.append(row)
    else:
        res = simulate_rates(sim)
        for p, key in zip(phis, sim.angle_pairs):
            est = res[key]
            row = {"phi": p}
            for name in ("R1", "R2", "R12"):
                e = getattr(est, name)
                row[name.lower()] = e.value
                row[f"{name.lower()}_se"] = e.std_error
            rows.append(row)
    if cfg.events_path:
        write_events_csv(cfg.events_path, sim, two_channel=cfg.geometry_kind == "two-channel")
    return rows


def _inequality_reports(cfg: RunConfig) -> List[ineq.InequalityReport]:
    pi = math.pi
    if cfg.has_model:
        pred = closed_form_curve(build_density(cfg), DetectionParams(cfg.gamma, cfg.beta))
        curve = ineq.FourierCurve.from_prediction(pred)
        eta = pred.eta
        r1 = pred.single_rate
        V = pred.visibility

        def correlator(phi):
            return ineq.correlator_from_rates(*pred.two_channel(phi))
    else:
        if cfg.geometry_kind == "cascade":
            c = CascadeConfig(cfg.R0, cfg.eta_prime, cfg.V_prime, cfg.alpha)
            eta, V = c.effective_efficiency, c.effective_visibility
        else:
            eta, V = cfg.eta, cfg.V
        r1 = eta / 2.0
        curve = ineq.qm_curve(V, mean=eta**2 / 4.0)

        def correlator(phi):
            return ineq.correlator_from_rates(*qm_two_channel(r1, eta, V, phi))

    vis = ineq.visibilities(curve)
    reports = [
        ineq.ch_report(curve, r1, r1),
        ineq.chsh_report(correlator(pi / 8), correlator(3 * pi / 8)),
        ineq.genuine_inequality_report(V, eta),
        ineq.compatibility_report(V, eta),
        ineq.visibility_ratio_test(vis.V_A, vis.V_B, eta),
    ]
    if cfg.has_model:
        delta = ineq.delta_deviation(ineq.qm_curve(V), curve)
        reports.append(ineq.delta_report(delta, V, eta))
    disc = ineq.discrimination_check(vis.V_B, eta)
    reports.append(ineq.InequalityReport(
        "discrimination", vis.V_B, disc.bound, "<=", {"V_B": vis.V_B, "eta": eta},
        note=f"{disc.verdict}; required_epsilon={disc.required_epsilon!r}"))
    return reports


def _optimize(cfg: RunConfig):
    target = FitTarget(cfg.target_eta, cfg.target_V)
    fits = {
        "epsilon": lambda: fit_epsilon_model(target),
        "gaussian": lambda: fit_gaussian_model(target),
        "fourier": lambda: fit_fourier_model(target, n_max=cfg.n_max),
    }
    methods = list(fits) if cfg.method == "all" else [cfg.method]
    results, errors = [], []
    for m in methods:
        try:
            results.append(fits[m]())
        except ValueError as exc:
            if cfg.method != "all":
                raise
            errors.append(f"method={m}\nerror={exc}\n")
    return results, errors


def run(cfg: RunConfig, out=None) -> int:
    """Execute one validated configuration; returns the exit status."""
    out = out or sys.stdout
    cfg.validate()
    status = EXIT_OK
    if cfg.mode == "predict":
        rows = _predict_rows(cfg)
        text = rows_to_csv(rows) if cfg.output_format == "csv" else rows_to_text(rows)
    elif cfg.mode == "simulate":
        rows = _simulate_rows(cfg)
        text = rows_to_csv(rows) if cfg.output_format == "csv" else rows_to_text(rows)
    elif cfg.mode == "inequalities":
        reports = _inequality_reports(cfg)
        if cfg.output_format == "text":
            text = ineq.reports_to_text(reports)
        else:
            text = rows_to_csv([{"name": r.name, "statistic": r.statistic, "std_error": r.std_error,
                                 "bound": r.bound, "sense": r.sense, "margin": r.margin,
                                 "verdict": r.verdict, "note": r.note} for r in reports])
    elif cfg.mode == "optimize":
        results, errors = _optimize(cfg)
        if cfg.output_format == "text" or not results:
            text = "\n".join([r.to_text() for r in results] + errors)
        else:
            keys = sorted({k for r in results for k in r.parameters()})
            text = rows_to_csv([{"method": r.method, "delta": r.delta,
                                 **{k: r.parameters().get(k, "") for k in keys},
                                 "constraints_ok": str(r.ok).lower()} for r in results])
    else:
        rows = reproduce_benchmarks()
        if cfg.output_format == "csv":
            text = rows_to_csv([{"benchmark": r.name, "computed": r.computed, "expected": r.expected,
                                 "tolerance": r.tolerance, "result": "PASS" if r.passed else "FAIL"}
                                for r in rows])
        else:
            text = format_table(rows)
        failed = [r.name for r in rows if not r.passed]
        if failed:
            print("failing rows: " + "; ".join(failed), file=sys.stderr)
            status = EXIT_RUNTIME
    if cfg.output_path:
        write_atomic(cfg.output_path, text)
    else:
        out.write(text)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lhvbell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--seed", type=int, help="overrides seed from the config")
        p.add_argument("--output", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "text"), help="output format")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.mode) if args.config else parse_config("", args.mode)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.output is not None:
            overrides["output_path"] = args.output
        if args.format is not None:
            overrides["output_format"] = args.format
        if overrides:
            from dataclasses import replace
            cfg = replace(cfg, **overrides)
        cfg.validate()
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except (ValueError, ZeroDivisionError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
