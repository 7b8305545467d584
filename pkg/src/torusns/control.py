"""Zero-mode control and the time-dilatation auto-control scheme.

The zero modes feel only the transport term, so a purely time-dependent
control can hold them at zero; the would-be increments are accumulated in a
ControlState ledger, from which the free-running zero modes are recoverable.
A time-independent bound on the controlled field then gives a bound on the
free solution that grows at most linearly in time.

The auto-control alternative substitutes s = (t - t0)/sqrt(1 - (t - t0)^2)
and compares against u with v(t) = lambda' (1 + theta * clock) u(s).  The
Jacobian dt/ds = (1 - (t - t0)^2)^(3/2) multiplies the viscosity, the
prefactor joins the quadratic terms, and an extra diagonal damping with
coefficient theta * jacobian / (1 + theta * clock) appears; 'clock' is t - t0
for the local variant and absolute t for the global one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lattice import FOUR_PI_SQ, ModeField, SimConfig, squared_modulus_grid
from .nonlinear import burgers_mode, euler_term_fields, ode_multipliers


@dataclass(frozen=True)
class ControlState:
    """Accumulated zero-mode control values and the last per-step increment."""

    r_zero: np.ndarray
    last_increment: np.ndarray

    @classmethod
    def initial(cls, ncomp: int) -> "ControlState":
        return cls(np.zeros(ncomp, dtype=np.complex128),
                   np.zeros(ncomp, dtype=np.complex128))

    def advanced(self, increment: np.ndarray) -> "ControlState":
        return ControlState(self.r_zero + increment, np.array(increment))


@dataclass(frozen=True)
class DilatationCoeffs:
    """Per-time coefficients of the dilated scheme.

    visc multiplies the viscosity term, nonlin the quadratic terms, damping
    is the diagonal potential-damping rate.
    """

    visc: float
    nonlin: float
    damping: float


def control_increment(f: ModeField, l: float = 1.0, dt: float = 1.0) -> np.ndarray:
    """Per-component zero-mode increment dt * transport term at alpha = 0.

    Cancels the would-be growth of the zero modes over one step; real-valued
    (up to roundoff) for Hermitian-symmetric fields.
    """
    zero = (0,) * f.n
    return np.array([dt * burgers_mode(f, i, zero, l) for i in range(f.ncomp)],
                    dtype=np.complex128)


def controlled_step(f: ModeField, state: ControlState, cfg: SimConfig,
                    stepper: Callable[[ModeField, SimConfig], ModeField]) -> tuple[ModeField, ControlState]:
    """Advance with the given stepper, ledger the increment, zero the zero modes.

    The recorded increment carries the same quadratic-term multiplier as the
    stepper, so the ledger matches the scheme actually run.  The uncontrolled
    zero modes are recoverable as the running sum in the returned state.
    """
    _, q = ode_multipliers(cfg)
    increment = q * control_increment(f, cfg.l, cfg.dt)
    out = stepper(f, cfg)
    zero_row = (slice(None),) + (out.K,) * out.n
    if np.any(out.coeffs[zero_row] != 0.0):
        coeffs = out.mutable_coeffs()
        coeffs[zero_row] = 0.0
        out = ModeField(coeffs)
    return out, state.advanced(increment)


def dilatation_coefficients(t: float, t0: float, theta: float,
                            variant: str = "local") -> DilatationCoeffs:
    """Coefficients (visc, nonlin, damping) of the dilated scheme at time t.

    Requires 0 <= t - t0 < 1 (the dilatation map diverges at 1).  At t = t0
    the local variant degenerates to (1, 1, theta).
    """
    tau = t - t0
    if not 0.0 <= tau < 1.0:
        raise ValueError(f"t - t0 must lie in [0, 1), got {tau}")
    jac = math.sqrt(1.0 - tau * tau) ** 3
    if variant == "local":
        base = 1.0 + theta * tau
    elif variant == "global":
        base = 1.0 + theta * t
    else:
        raise ValueError(f"variant must be 'local' or 'global', got {variant!r}")
    return DilatationCoeffs(visc=jac, nonlin=jac * base, damping=theta * jac / base)


def dilate_time(t: float, t0: float) -> float:
    """Map original time to dilated time s = (t - t0)/sqrt(1 - (t - t0)^2)."""
    tau = t - t0
    if not 0.0 <= tau < 1.0:
        raise ValueError(f"t - t0 must lie in [0, 1), got {tau}")
    return tau / math.sqrt(1.0 - tau * tau)


def undilate_time(s: float, t0: float) -> float:
    """Inverse of dilate_time: t = t0 + s/sqrt(1 + s^2)."""
    if s < 0.0:
        raise ValueError(f"dilated time must be >= 0, got {s}")
    return t0 + s / math.sqrt(1.0 + s * s)


def sigma_step(cfg: SimConfig) -> float:
    """Dilated-time step matching cfg.dt under the equidistant map over the window."""
    if cfg.dilatation is None:
        raise ValueError("configuration has no dilatation parameters")
    d = cfg.dilatation.delta
    return cfg.dt / math.sqrt(1.0 - d * d)


def autocontrol_step(u: ModeField, cfg: SimConfig, t0: float, step_index: int,
                     stepper: str = "trotter") -> ModeField:
    """One step of the dilated scheme in s-time.

    Coefficients are evaluated at the original-time image of the current
    s-grid point; the step size is sigma_step(cfg).  The split variant applies
    the quadratic-term-plus-damping factor first and the viscosity exponential
    second; 'euler' folds everything into one forward increment.  Raises when
    the step would leave the window [t0, t0 + delta].
    """
    dil = cfg.dilatation
    if dil is None:
        raise ValueError("configuration has no dilatation parameters")
    ds = sigma_step(cfg)
    t_now = undilate_time(step_index * ds, t0)
    t_next = undilate_time((step_index + 1) * ds, t0)
    if t_next - t0 > dil.delta * (1.0 + 1e-12):
        raise ValueError(f"step leaves the dilatation window: t - t0 = {t_next - t0:.6g} "
                         f"> delta = {dil.delta}")
    co = dilatation_coefficients(t_now, t0, dil.theta, dil.variant)
    visc, q = ode_multipliers(cfg)
    q_eff = q * co.nonlin
    rates = (co.visc * visc * cfg.nu / (cfg.l * cfg.l)) \
        * (FOUR_PI_SQ * squared_modulus_grid(cfg.K, cfg.n))
    zero_row = (slice(None),) + (u.K,) * u.n
    if stepper == "trotter":
        w = u.coeffs + ds * euler_term_fields(u, cfg.l, q_eff)
        if co.damping != 0.0:
            w = w - (ds * co.damping) * u.coeffs
        w[zero_row] = u.coeffs[zero_row]
        out = w * np.exp(-rates * ds)
    elif stepper == "euler":
        out = u.coeffs + ds * (-rates * u.coeffs + euler_term_fields(u, cfg.l, q_eff))
        if co.damping != 0.0:
            out = out - (ds * co.damping) * u.coeffs
    else:
        raise ValueError(f"unknown stepper {stepper!r}")
    out[zero_row] = u.coeffs[zero_row]
    if not np.isfinite(out.view(np.float64)).all():
        from .integrators import OverflowDetected
        raise OverflowDetected(step_index)
    return ModeField(out)


def pullback(u: ModeField, t: float, t0: float, theta: float,
             lambda_prime: float = 1.0, variant: str = "local") -> ModeField:
    """Recover the comparison value v(t) = lambda' (1 + theta * clock) u(s)."""
    tau = t - t0
    if not 0.0 <= tau < 1.0:
        raise ValueError(f"t - t0 must lie in [0, 1), got {tau}")
    if variant == "local":
        factor = lambda_prime * (1.0 + theta * tau)
    elif variant == "global":
        factor = lambda_prime * (1.0 + theta * t)
    else:
        raise ValueError(f"variant must be 'local' or 'global', got {variant!r}")
    return ModeField(u.coeffs * factor)
