"""Time steppers: forward Euler and the split (Trotter-factored) step.

The split step applies the first-order quadratic-term factor (1 + E dt) and
then the exact per-mode viscosity exponential; the two steppers agree to
O(dt^2).  With the quadratic terms structurally absent the split step
reproduces the heat semigroup per mode to machine precision per factor.

The alpha = 0 row is held fixed by every stepper: the zero mode receives no
viscosity or projection update, and its transport increment is tracked
exclusively by the control bookkeeping (see :mod:`torusns.control`).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .lattice import (FOUR_PI_SQ, ModeField, MultiIndex, SimConfig,
                      decay_envelope_ratio, energy, max_divergence,
                      sobolev_norm, squared_modulus_grid)
from .nonlinear import euler_term_fields, ode_multipliers, viscosity_rates


class OverflowDetected(ArithmeticError):
    """A coefficient became non-finite: blow-up or a too-large time step."""

    def __init__(self, step: int):
        super().__init__(f"non-finite coefficient after step {step}")
        self.step = step


class CertificateViolated(RuntimeError):
    """A per-step certificate check failed during a strict run."""

    def __init__(self, step: int, mode: MultiIndex, ratio: float):
        super().__init__(f"certificate failed at step {step}: mode {mode} ratio {ratio:.6g}")
        self.step = step
        self.mode = mode
        self.ratio = ratio


@dataclass(frozen=True)
class StepReport:
    """Per-step diagnostics emitted by :func:`run`."""

    step: int
    t: float
    ratio_before: float
    ratio_after: float
    max_delta: float
    max_div: float
    energy: float
    h_norm: float


@dataclass
class RunResult:
    field: ModeField
    reports: list[StepReport]
    steps: int
    control: object | None = None
    control_log: list[np.ndarray] | None = None
    certificates: list | None = field(default=None)


def _zero_row(n: int, K: int):
    return (slice(None),) + (K,) * n


def _check_finite(arr: np.ndarray, step: int) -> None:
    if not np.isfinite(arr.view(np.float64)).all():
        raise OverflowDetected(step)


def _resolve_nu_tilde(cfg: SimConfig, nu_tilde) -> np.ndarray | float:
    """Validate an attenuated viscosity 0 <= nu~ <= nu (scalar or per-mode)."""
    if nu_tilde is None:
        return cfg.nu
    arr = np.asarray(nu_tilde, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > cfg.nu):
        raise ValueError(f"attenuated viscosity must lie in [0, {cfg.nu}]")
    return nu_tilde if arr.ndim else float(arr)


def damped_viscosity_factor(alpha: MultiIndex, nu_tilde: float, dt: float,
                            l: float = 1.0, nu: float | None = None) -> float:
    """Per-mode damping factor exp(-nu~ 4 pi^2 |a|^2 dt / l^2), nu~ in [0, nu]."""
    if nu_tilde < 0.0 or (nu is not None and nu_tilde > nu):
        raise ValueError(f"attenuated viscosity {nu_tilde} outside [0, {nu}]")
    ssq = float(sum(a * a for a in alpha))
    return math.exp(-nu_tilde * FOUR_PI_SQ * ssq * dt / (l * l))


def _check_geometry(f: ModeField, cfg: SimConfig) -> None:
    if f.n != cfg.n or f.K != cfg.K:
        raise ValueError(f"field geometry (n={f.n}, K={f.K}) does not match "
                         f"configuration (n={cfg.n}, K={cfg.K})")


def euler_step(f: ModeField, cfg: SimConfig) -> ModeField:
    """One forward-Euler step on every stored mode (zero row held fixed)."""
    _check_geometry(f, cfg)
    _, q = ode_multipliers(cfg)
    rates = viscosity_rates(cfg)
    out = f.coeffs + cfg.dt * (-rates * f.coeffs + euler_term_fields(f, cfg.l, q))
    out[_zero_row(f.n, f.K)] = f.coeffs[_zero_row(f.n, f.K)]
    _check_finite(out, 0)
    return ModeField(out)


def trotter_step(f: ModeField, cfg: SimConfig, nu_tilde=None) -> ModeField:
    """One split step: quadratic-term factor then exact viscosity exponential.

    nu_tilde optionally attenuates the diagonal damping (scalar or per-mode
    array over the box, clipped to [0, nu] by validation).  Setting
    cfg.trotter_viscosity_first reverses the factor order.
    """
    _check_geometry(f, cfg)
    visc, q = ode_multipliers(cfg)
    if nu_tilde is None:
        rates = viscosity_rates(cfg)
    else:
        nu_eff = _resolve_nu_tilde(cfg, nu_tilde)
        rates = (visc * np.asarray(nu_eff) / (cfg.l * cfg.l)) \
            * (FOUR_PI_SQ * squared_modulus_grid(cfg.K, cfg.n))
    factor = np.exp(-rates * cfg.dt)
    zr = _zero_row(f.n, f.K)
    if cfg.trotter_viscosity_first:
        damped = ModeField(f.coeffs * factor)
        out = damped.coeffs + cfg.dt * euler_term_fields(damped, cfg.l, q)
    else:
        w = f.coeffs + cfg.dt * euler_term_fields(f, cfg.l, q)
        w[zr] = f.coeffs[zr]
        out = w * factor
    out[zr] = f.coeffs[zr]
    _check_finite(out, 0)
    return ModeField(out)


STEPPERS: dict[str, Callable[[ModeField, SimConfig], ModeField]] = {
    "euler": euler_step,
    "trotter": trotter_step,
}


def resolve_stepper(stepper) -> Callable[[ModeField, SimConfig], ModeField]:
    if callable(stepper):
        return stepper
    try:
        return STEPPERS[stepper]
    except KeyError:
        raise ValueError(f"unknown stepper {stepper!r}; expected one of {sorted(STEPPERS)}")


def step_count(horizon: float, dt: float) -> int:
    """Number of steps for T = N dt, requiring divisibility within ~1 ulp per step."""
    if horizon < 0.0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    n = int(round(horizon / dt))
    if abs(n * dt - horizon) > max(n, 1) * math.ulp(max(horizon, dt)):
        raise ValueError(f"horizon {horizon} is not an integer multiple of dt {dt}")
    return n


def run(f0: ModeField, cfg: SimConfig, horizon: float, stepper="trotter",
        certifier: Optional[Callable] = None, controlled: bool = False,
        env=None, stride: int = 1, report_m: float = 1.0,
        strict_certify: bool = True, keep_certificates: bool = False,
        snapshot_hook: Optional[Callable[[int, ModeField], None]] = None) -> RunResult:
    """Advance f0 over T = N dt steps, emitting StepReport rows.

    certifier, when given, is called as certifier(before, after) after every
    step and must return an object with attributes (passed, worst_mode,
    worst_ratio); a failure aborts with CertificateViolated when
    strict_certify is set.  controlled routes every step through the
    zero-mode control bookkeeping.  env (a decay envelope) enables the
    envelope-ratio diagnostics; report_m picks the norm order of the h_norm
    column.  Reports are emitted every ``stride`` steps (and always for the
    final step).
    """
    from .control import ControlState, controlled_step  # deferred: control imports steppers' helpers

    step_fn = resolve_stepper(stepper)
    n_steps = step_count(horizon, cfg.dt)
    visc, _ = ode_multipliers(cfg)
    stiffness = visc * cfg.nu * FOUR_PI_SQ * cfg.n * cfg.K * cfg.K * cfg.dt / (cfg.l * cfg.l)
    if stiffness > 1.0:
        warnings.warn(f"explicit damping linearization is negative at the cutoff "
                      f"(nu 4pi^2 n K^2 dt / l^2 = {stiffness:.3g} > 1); the exponential "
                      f"factor remains valid but Euler comparisons degrade", stacklevel=2)

    state = ControlState.initial(f0.ncomp) if controlled else None
    control_log: list[np.ndarray] | None = [] if controlled else None
    certificates: list | None = [] if (certifier is not None and keep_certificates) else None
    reports: list[StepReport] = []
    f = f0
    for m in range(1, n_steps + 1):
        before = f
        try:
            if controlled:
                f, state = controlled_step(f, state, cfg, step_fn)
                control_log.append(state.last_increment)
            else:
                f = step_fn(f, cfg)
        except OverflowDetected:
            raise OverflowDetected(m) from None
        if certifier is not None:
            cert = certifier(before, f)
            if certificates is not None:
                certificates.append(cert)
            if strict_certify and not cert.passed:
                raise CertificateViolated(m, cert.worst_mode, cert.worst_ratio)
        if m % stride == 0 or m == n_steps:
            delta = float(np.abs(f.coeffs - before.coeffs).max())
            ratio_b = decay_envelope_ratio(before, env) if env is not None else float("nan")
            ratio_a = decay_envelope_ratio(f, env) if env is not None else float("nan")
            reports.append(StepReport(step=m, t=m * cfg.dt, ratio_before=ratio_b,
                                      ratio_after=ratio_a, max_delta=delta,
                                      max_div=max_divergence(f, cfg.l), energy=energy(f),
                                      h_norm=sobolev_norm(f, report_m)))
        if snapshot_hook is not None:
            snapshot_hook(m, f)
    return RunResult(field=f, reports=reports, steps=n_steps, control=state,
                     control_log=control_log, certificates=certificates)
