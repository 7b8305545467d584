"""Command-line interface: run, certify, bounds, gen, audit.

Artifacts are written with stable formatting (shortest-roundtrip floats,
sorted JSON keys, fixed column orders), so identical configuration and seed
reproduce byte-identical outputs.  Exit codes: 0 success, 2 configuration
error, 3 overflow detected, 4 certificate violated.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (DecayEnvelope, StepCertifier, convolution_bound_check,
                     elliptic_sum_constant, zero_mode_increment_bound)
from .config import ConfigError, Scenario, build_initial_data, load_scenario
from .integrators import CertificateViolated, OverflowDetected, run
from .lattice import (ModeField, hermitian_defect, max_divergence, save_field,
                      decay_envelope_ratio)
from .scaling import scaled_coefficients

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OVERFLOW = 3
EXIT_CERTIFICATE = 4

DIAGNOSTIC_COLUMNS = ("step", "t", "envelope_ratio", "energy", "max_div", "h_m_norm")
CONTROL_COLUMNS = ("step", "component", "increment", "cumulative")
INEQUALITY_COLUMNS = ("alpha_abs", "lhs", "fitted_c", "fitted_c_relaxed", "ratio_vs_theorem")


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _json_ready(obj):
    if isinstance(obj, float) and math.isinf(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    return obj


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(_json_ready(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _snapshot_name(step: int, fmt: str) -> str:
    suffix = ".modes" if fmt == "binary" else ".modes.txt"
    return f"state_{step:08d}{suffix}"


def run_scenario(sc: Scenario, outdir: Path, force_certify: bool = False,
                 write_inequality: bool = False) -> int:
    """Execute a scenario and write its artifacts; returns the exit code."""
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = sc.cfg
    f0 = build_initial_data(sc)

    env = sc.env
    if env is None and force_certify:
        env = DecayEnvelope(C=sc.data_params["C"], s=sc.data_params["s"], n=cfg.n)
    certifier = StepCertifier(env, cfg, K_sum=sc.certify_K_sum) if env is not None else None

    snapshot_hook = None
    if sc.snapshot_stride > 0:
        def snapshot_hook(step: int, f: ModeField, _sc=sc, _out=outdir):
            if step % _sc.snapshot_stride == 0:
                save_field(_out / _snapshot_name(step, _sc.snapshot_format), f,
                           _sc.cfg.l, fmt=_sc.snapshot_format)

    code = EXIT_OK
    try:
        result = run(f0, cfg, sc.horizon, stepper=sc.stepper, certifier=certifier,
                     controlled=sc.controlled, env=env, stride=sc.stride,
                     report_m=sc.report_m, strict_certify=sc.strict_certify,
                     keep_certificates=certifier is not None,
                     snapshot_hook=snapshot_hook)
    except OverflowDetected as exc:
        print(f"torusns: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except CertificateViolated as exc:
        print(f"torusns: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE

    rows = [(r.step, r.t, r.ratio_after, r.energy, r.max_div, r.h_norm)
            for r in result.reports]
    _write_csv(outdir / "diagnostics.csv", DIAGNOSTIC_COLUMNS, rows)

    if result.control_log is not None:
        ledger = []
        totals = np.zeros(f0.ncomp, dtype=np.complex128)
        for step, inc in enumerate(result.control_log, start=1):
            totals = totals + inc
            for i in range(f0.ncomp):
                ledger.append((step, i, float(inc[i].real), float(totals[i].real)))
        _write_csv(outdir / "control.csv", CONTROL_COLUMNS, ledger)

    save_field(outdir / ("final.modes" if sc.snapshot_format == "binary" else "final.modes.txt"),
               result.field, cfg.l, fmt=sc.snapshot_format)

    if certifier is not None:
        payload = _certificate_payload(sc, env, certifier, result)
        _write_json(outdir / "certificate.json", payload)
        if write_inequality:
            report = convolution_bound_check(env.C, env.s, env.n, sc.certify_K_sum,
                                             alpha_range=min(cfg.K, 16))
            _write_csv(outdir / "inequality.csv", INEQUALITY_COLUMNS,
                       [(r.alpha_abs, r.lhs, r.fitted_c, r.fitted_c_relaxed,
                         r.ratio_vs_theorem) for r in report.rows])
    return code


def _certificate_payload(sc: Scenario, env: DecayEnvelope, certifier: StepCertifier,
                         result) -> dict:
    certs = result.certificates or []
    worst = max(certs, key=lambda cr: cr.worst_ratio, default=None)
    tail = elliptic_sum_constant(env.n, env.s, sc.certify_K_sum)[1]
    constants = {
        "c_theorem": certifier.c,
        "c_theorem_tail": tail,
        "K_sum": sc.certify_K_sum,
        "envelope_C": env.C,
        "envelope_s": env.s,
        "dimension": env.n,
    }
    if sc.cfg.scaling is not None:
        visc, nonlin = scaled_coefficients(sc.cfg.scaling)
        budget = zero_mode_increment_bound(env, certifier.c, nonlin)
        constants.update({
            "visc_factor": visc,
            "nonlin_factor": nonlin,
            "zero_mode_rate_bound": budget.rate_bound,
            "zero_mode_crude_bound": budget.crude_bound,
            "linear_slope_R": budget.R,
            "linear_bound_C_plus": budget.C_plus,
        })
    max_increment = 0.0
    if result.control_log:
        max_increment = max(float(np.abs(inc).max()) for inc in result.control_log)
    return {
        "schema": "torusns-certificate-1",
        "scenario": sc.name,
        "steps": result.steps,
        "passed": bool(all(cr.passed for cr in certs)) if certs else True,
        "constants": constants,
        "worst_ratio": worst.worst_ratio if worst else 0.0,
        "worst_mode": list(worst.worst_mode) if worst else None,
        "worst_component": worst.worst_component if worst else None,
        "case_b_steps": sum(1 for cr in certs if cr.case_b),
        "min_damping_margin": min((cr.damping_margin for cr in certs), default=math.inf),
        "max_control_increment": max_increment,
    }


def _cmd_run(args, force_certify: bool = False) -> int:
    try:
        sc = _scenario_from_args(args)
    except ConfigError as exc:
        print(f"torusns: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_scenario(sc, Path(args.out), force_certify=force_certify,
                        write_inequality=force_certify)


def _scenario_from_args(args) -> Scenario:
    sc = load_scenario(args.config)
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "stride", None) is not None:
        updates["stride"] = args.stride
    if getattr(args, "strict_certify", False):
        updates["strict_certify"] = True
    if updates:
        from dataclasses import replace
        sc = replace(sc, **updates)
    return sc


def _cmd_certify(args) -> int:
    return _cmd_run(args, force_certify=True)


def _cmd_bounds(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    report = convolution_bound_check(args.C, args.s, args.n, args.ksum, args.range)
    _write_csv(outdir / "inequality.csv", INEQUALITY_COLUMNS,
               [(r.alpha_abs, r.lhs, r.fitted_c, r.fitted_c_relaxed, r.ratio_vs_theorem)
                for r in report.rows])
    payload = {
        "schema": "torusns-bounds-1",
        "n": report.n, "s": report.s, "C": report.C,
        "K_sum": report.K_sum, "alpha_range": report.alpha_range,
        "c_theorem": report.c_theorem,
        "c_theorem_tail": report.c_theorem_tail,
        "c_empirical_contraction": report.c_empirical,
        "c_empirical_relaxed": report.c_empirical_relaxed,
        "contraction_exponent": report.n + 2.0 * report.s - 1.0,
        "relaxed_exponent": report.n + 2.0 * report.s - 2.0,
        "flagged_shells": report.flagged,
    }
    _write_json(outdir / "bounds.json", payload)
    print(f"c_theorem={report.c_theorem!r} (tail<={report.c_theorem_tail!r}) "
          f"c_empirical={report.c_empirical!r} flagged={len(report.flagged)}")
    return EXIT_OK


def _cmd_gen(args) -> int:
    try:
        sc = _scenario_from_args(args)
        field = build_initial_data(sc)
    except ConfigError as exc:
        print(f"torusns: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fmt = sc.snapshot_format
    save_field(out, field, sc.cfg.l, fmt=fmt)
    env = DecayEnvelope(C=sc.data_params["C"], s=sc.data_params["s"], n=sc.cfg.n)
    print(f"wrote {out} (format={fmt})")
    print(f"envelope_ratio={decay_envelope_ratio(field, env)!r} "
          f"max_div={max_divergence(field, sc.cfg.l)!r} "
          f"hermitian_defect={hermitian_defect(field)!r}")
    return EXIT_OK


def _cmd_audit(args) -> int:
    from dataclasses import replace
    try:
        sc = _scenario_from_args(args)
    except ConfigError as exc:
        print(f"torusns: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    f0 = build_initial_data(sc)
    halved = replace(sc.cfg, dt=sc.cfg.dt / 2.0)
    try:
        coarse = run(f0, sc.cfg, sc.horizon, stepper=sc.stepper, controlled=sc.controlled,
                     stride=max(1, sc.stride))
        fine = run(f0, halved, sc.horizon, stepper=sc.stepper, controlled=sc.controlled,
                   stride=max(1, sc.stride))
    except OverflowDetected as exc:
        print(f"torusns: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    delta = float(np.abs(coarse.field.coeffs - fine.field.coeffs).max())
    scale = max(float(np.abs(coarse.field.coeffs).max()), 1e-300)
    rel = delta / scale
    flagged = rel > sc.audit_tol
    payload = {
        "schema": "torusns-audit-1",
        "scenario": sc.name,
        "dt": sc.cfg.dt,
        "dt_halved": halved.dt,
        "steps": coarse.steps,
        "max_abs_delta": delta,
        "rel_delta": rel,
        "tolerance": sc.audit_tol,
        "flagged": bool(flagged),
    }
    _write_json(outdir / "audit.json", payload)
    print(f"audit: rel_delta={rel!r} tol={sc.audit_tol!r} flagged={flagged}")
    if flagged:
        print("torusns: step-halving deviation exceeds tolerance", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torusns",
                                     description="Spectral Galerkin runs and decay-envelope "
                                                 "certificates on the torus")
    parser.add_argument("--version", action="version", version=f"torusns {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", required=True, help="scenario config file")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override run.seed")
        p.add_argument("--stride", type=int, default=None, help="override run.stride")
        p.add_argument("--strict-certify", action="store_true",
                       help="abort on the first failed certificate")

    p_run = sub.add_parser("run", help="run a scenario and write diagnostics")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_cert = sub.add_parser("certify", help="run with per-step certification and "
                                            "write the certificate report")
    common(p_cert)
    p_cert.set_defaults(func=_cmd_certify)

    p_bounds = sub.add_parser("bounds", help="tabulate the convolution inequality")
    p_bounds.add_argument("--n", type=int, default=2)
    p_bounds.add_argument("--s", type=float, default=1.5)
    p_bounds.add_argument("--C", type=float, default=1.0)
    p_bounds.add_argument("--ksum", type=int, default=64)
    p_bounds.add_argument("--range", type=int, default=16)
    p_bounds.add_argument("--out", required=True)
    p_bounds.set_defaults(func=_cmd_bounds)

    p_gen = sub.add_parser("gen", help="generate initial data and write a snapshot")
    p_gen.add_argument("--config", required=True)
    p_gen.add_argument("--out", required=True, help="snapshot file path")
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.set_defaults(func=_cmd_gen)

    p_audit = sub.add_parser("audit", help="re-run at half the step and compare")
    common(p_audit)
    p_audit.set_defaults(func=_cmd_audit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
