"""Flat key-value scenario configuration.

Files hold one ``key = value`` pair per line with dotted section prefixes
(``sim.nu = 0.1``); ``#`` starts a comment.  Every key can be overridden by
an environment variable named TORUSNS_<KEY> with dots replaced by double
underscores (``TORUSNS_SIM__NU=0.5``).  The full schema lives in
docs/config.md; unknown keys are rejected with the offending line.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Any

from .bounds import DecayEnvelope
from .lattice import DilatationParams, ModeField, SimConfig, load_field
from .scaling import ScalingParams

ENV_PREFIX = "TORUSNS_"

_REQUIRED = object()


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


# key -> (parser, default); _REQUIRED defaults must be present in the file.
SCHEMA: dict[str, tuple[Any, Any]] = {
    "scenario.name": (str, "scenario"),
    "sim.n": (int, 2),
    "sim.l": (float, 1.0),
    "sim.nu": (float, 1.0),
    "sim.K": (int, 8),
    "sim.dt": (float, 1e-3),
    "sim.lambda_prime": (float, 1.0),
    "scaling.enabled": (_bool, False),
    "scaling.r": (float, 2.0),
    "scaling.lambda": (float, 0.0),
    "scaling.rho": (float, 0.0),
    "scaling.mu": (float, 0.0),
    "scaling.auto_mu": (_bool, False),
    "dilatation.enabled": (_bool, False),
    "dilatation.theta": (float, 1.0),
    "dilatation.t0": (float, 0.0),
    "dilatation.delta": (float, 0.5),
    "dilatation.variant": (str, "local"),
    "run.horizon": (float, _REQUIRED),
    "run.stepper": (str, "trotter"),
    "run.controlled": (_bool, True),
    "run.seed": (int, 0),
    "run.stride": (int, 1),
    "run.report_m": (float, 1.0),
    "run.snapshot_stride": (int, 0),
    "run.snapshot_format": (str, "binary"),
    "run.viscosity_first": (_bool, False),
    "data.kind": (str, "envelope"),
    "data.C": (float, 1.0),
    "data.s": (float, 1.5),
    "data.mode": (str, "random-phase"),
    "data.amplitude": (float, 1.0),
    "data.decay": (float, float("nan")),
    "data.path": (str, ""),
    "certify.enabled": (_bool, False),
    "certify.C": (float, float("nan")),
    "certify.s": (float, float("nan")),
    "certify.K_sum": (int, 32),
    "certify.strict": (_bool, True),
    "audit.tol": (float, 1e-3),
}


class ConfigError(ValueError):
    """Malformed or unknown configuration input, with position information."""


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        parser, _ = SCHEMA[key]
        try:
            values[key] = parser(val)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
    return values


def _apply_env(values: dict[str, Any], environ=os.environ) -> None:
    for key, (parser, _) in SCHEMA.items():
        name = ENV_PREFIX + key.upper().replace(".", "__")
        if name in environ:
            try:
                values[key] = parser(environ[name])
            except ValueError as exc:
                raise ConfigError(f"environment {name}: {exc}") from None


def load_config(path, environ=os.environ) -> dict[str, Any]:
    """Parse a config file, apply env overrides and fill defaults."""
    try:
        with open(path, "r") as fh:
            values = parse_config_text(fh.read(), source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    _apply_env(values, environ)
    for key, (_, default) in SCHEMA.items():
        if key in values:
            continue
        if default is _REQUIRED:
            raise ConfigError(f"{path}: missing required key {key!r}")
        values[key] = default
    return values


@dataclass(frozen=True)
class Scenario:
    """A fully resolved run description."""

    name: str
    cfg: SimConfig
    horizon: float
    stepper: str
    controlled: bool
    seed: int
    stride: int
    report_m: float
    snapshot_stride: int
    snapshot_format: str
    data_kind: str
    data_params: dict[str, Any]
    env: DecayEnvelope | None
    certify_K_sum: int
    strict_certify: bool
    audit_tol: float


def scenario_from_values(values: dict[str, Any]) -> Scenario:
    scaling = None
    if values["scaling.enabled"]:
        mu = values["scaling.mu"]
        if values["scaling.auto_mu"]:
            # pick mu so r^mu is the certified damping-dominance multiplier
            from .bounds import elliptic_sum_constant
            from .scaling import choose_r_mu
            amp = values["certify.C"]
            amp = values["data.C"] if math.isnan(amp) else amp
            exc = values["certify.s"]
            exc = values["data.s"] if math.isnan(exc) else exc
            c = elliptic_sum_constant(values["sim.n"], exc, values["certify.K_sum"])[0]
            r_mu = choose_r_mu(values["sim.nu"], amp, c, values["sim.n"])
            mu = math.log(r_mu) / math.log(values["scaling.r"])
        scaling = ScalingParams(r=values["scaling.r"], lam=values["scaling.lambda"],
                                rho=values["scaling.rho"], mu=mu)
    dilatation = None
    if values["dilatation.enabled"]:
        dilatation = DilatationParams(theta=values["dilatation.theta"],
                                      t0=values["dilatation.t0"],
                                      delta=values["dilatation.delta"],
                                      variant=values["dilatation.variant"])
    cfg = SimConfig(n=values["sim.n"], l=values["sim.l"], nu=values["sim.nu"],
                    K=values["sim.K"], dt=values["sim.dt"],
                    lambda_prime=values["sim.lambda_prime"], scaling=scaling,
                    dilatation=dilatation,
                    trotter_viscosity_first=values["run.viscosity_first"])
    env = None
    if values["certify.enabled"]:
        # certify.C / certify.s default (NaN sentinel) to the data envelope
        cert_C = values["certify.C"]
        cert_s = values["certify.s"]
        env = DecayEnvelope(C=values["data.C"] if math.isnan(cert_C) else cert_C,
                            s=values["data.s"] if math.isnan(cert_s) else cert_s,
                            n=cfg.n)
    data_params = {
        "C": values["data.C"], "s": values["data.s"], "mode": values["data.mode"],
        "amplitude": values["data.amplitude"], "path": values["data.path"],
    }
    decay = values["data.decay"]
    data_params["decay"] = None if math.isnan(decay) else decay
    if values["run.stepper"] not in ("euler", "trotter"):
        raise ConfigError(f"run.stepper must be 'euler' or 'trotter', got {values['run.stepper']!r}")
    if values["run.snapshot_format"] not in ("binary", "text"):
        raise ConfigError("run.snapshot_format must be 'binary' or 'text'")
    if values["data.kind"] not in ("envelope", "even_zero", "taylor_green", "snapshot", "zero"):
        raise ConfigError(f"unknown data.kind {values['data.kind']!r}")
    return Scenario(
        name=values["scenario.name"], cfg=cfg, horizon=values["run.horizon"],
        stepper=values["run.stepper"], controlled=values["run.controlled"],
        seed=values["run.seed"], stride=values["run.stride"],
        report_m=values["run.report_m"], snapshot_stride=values["run.snapshot_stride"],
        snapshot_format=values["run.snapshot_format"], data_kind=values["data.kind"],
        data_params=data_params, env=env, certify_K_sum=values["certify.K_sum"],
        strict_certify=values["certify.strict"], audit_tol=values["audit.tol"])


def load_scenario(path, environ=os.environ) -> Scenario:
    return scenario_from_values(load_config(path, environ))


def build_initial_data(sc: Scenario) -> ModeField:
    """Instantiate the scenario's generator (seeded, reproducible)."""
    from . import generators

    cfg = sc.cfg
    kind = sc.data_kind
    if kind == "zero":
        return ModeField.zeros(cfg.n, cfg.K)
    if kind == "envelope":
        env = DecayEnvelope(C=sc.data_params["C"], s=sc.data_params["s"], n=cfg.n)
        return generators.make_envelope_data(env, seed=sc.seed, K=cfg.K,
                                             mode=sc.data_params["mode"])
    if kind == "even_zero":
        return generators.make_even_zero_data(cfg.K, cfg.n, sc.data_params["amplitude"],
                                              decay=sc.data_params["decay"])
    if kind == "taylor_green":
        return generators.make_taylor_green(sc.data_params["amplitude"], cfg.K, n=cfg.n)
    if kind == "snapshot":
        field, _ = load_field(sc.data_params["path"])
        if field.n != cfg.n or field.K != cfg.K:
            raise ConfigError(f"snapshot {sc.data_params['path']} has (n={field.n}, K={field.K}), "
                              f"scenario wants (n={cfg.n}, K={cfg.K})")
        return field
    raise ConfigError(f"unknown data kind {kind!r}")
