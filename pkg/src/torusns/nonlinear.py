"""Quadratic terms of the mode ODE: transport, pressure and their assembly.

For each component i and mode alpha the ODE reads

    d v_{i,a} / dt = -visc * nu * 4 pi^2 |a|^2 / l^2 * v_{i,a}
                     + q * burgers_mode(v, i, a)
                     + q * leray_mode(v, i, a)

where (visc, q) collect the transform multipliers and the scalar prefactor of
the quadratic terms.  Triads are truncated sharply: gamma and alpha - gamma
must both lie in the box, everything else is dropped.

The pressure numerator pairs each derivative index with the other factor's
component index (the trace of the velocity-gradient square); this is the form
under which the projection term cancels the divergence produced by the
transport term, which is the operative correctness check here.  The 4 pi^2
factors shared by the numerator and the denominator cancel and are not
materialized.
"""
from __future__ import annotations

import numpy as np

from . import _kernels
from .lattice import (FOUR_PI_SQ, TWO_PI, ModeField, MultiIndex, SimConfig,
                      box_index, index_grids, squared_modulus_grid)
from .scaling import scaled_coefficients


def ode_multipliers(cfg: SimConfig) -> tuple[float, float]:
    """(viscosity multiplier, quadratic-term multiplier) for a configuration."""
    visc, nonlin = scaled_coefficients(cfg.scaling)
    return visc, cfg.lambda_prime * nonlin


def _triad_window(f: ModeField, alpha: MultiIndex):
    """Views of v over {g : g and alpha-g in box}.

    Returns (vg, vd, gamma_grids) where vg[j] is v_j(g), vd[j] is v_j(alpha-g)
    aligned with vg, and gamma_grids[d] broadcasts g_d over the window.
    """
    K, n = f.K, f.n
    gamma_sl, delta_sl, grids = [], [], []
    for d in range(n):
        lo = max(-K, alpha[d] - K)
        hi = min(K, alpha[d] + K)
        gamma_sl.append(slice(lo + K, hi + K + 1))
        # alpha_d - g_d runs from alpha_d - lo down to alpha_d - hi: reversed view
        delta_sl.append(slice(alpha[d] - hi + K, alpha[d] - lo + K + 1))
        shape = [1] * n
        shape[d] = hi - lo + 1
        grids.append(np.arange(lo, hi + 1, dtype=np.float64).reshape(shape))
    rev = tuple(slice(None, None, -1) for _ in range(n))
    vg = [f.coeffs[(j,) + tuple(gamma_sl)] for j in range(f.ncomp)]
    vd = [f.coeffs[(j,) + tuple(delta_sl)][rev] for j in range(f.ncomp)]
    return vg, vd, grids


def burgers_mode(f: ModeField, i: int, alpha: MultiIndex, l: float = 1.0) -> complex:
    """Truncated transport sum -(2 pi 1j / l) sum_j sum_g g_j v_{j,a-g} v_{i,g}."""
    box_index(alpha, f.K)
    vg, vd, grids = _triad_window(f, alpha)
    inner = np.zeros(vg[0].shape, dtype=np.complex128)
    for j in range(f.ncomp):
        inner += grids[j] * vd[j]
    return complex(-TWO_PI * 1j / l * np.sum(inner * vg[i]))


def _projection_numerator(f: ModeField, alpha: MultiIndex) -> complex:
    """sum_{j,k} sum_g g_k (a_j - g_j) v_{j,g} v_{k,a-g} (4 pi^2 cancelled)."""
    vg, vd, grids = _triad_window(f, alpha)
    lhs = np.zeros(vg[0].shape, dtype=np.complex128)
    rhs = np.zeros_like(lhs)
    for j in range(f.ncomp):
        lhs += (alpha[j] - grids[j]) * vg[j]
        rhs += grids[j] * vd[j]
    return complex(np.sum(lhs * rhs))


def pressure_mode(f: ModeField, alpha: MultiIndex) -> complex:
    """Pressure coefficient from the mode-space Poisson quotient; zero at alpha = 0."""
    box_index(alpha, f.K)
    ssq = float(sum(a * a for a in alpha))
    if ssq == 0.0:
        return 0.0 + 0.0j
    return complex(-_projection_numerator(f, alpha) / ssq)


def leray_mode(f: ModeField, i: int, alpha: MultiIndex, l: float = 1.0) -> complex:
    """Projection term (2 pi 1j a_i / l) * numerator / |a|^2; zero at alpha = 0.

    Equal to -(2 pi 1j a_i / l) * pressure_mode, the sign entering the ODE
    with a plus.
    """
    box_index(alpha, f.K)
    ssq = float(sum(a * a for a in alpha))
    if ssq == 0.0:
        return 0.0 + 0.0j
    return complex(TWO_PI * 1j * alpha[i] / l * _projection_numerator(f, alpha) / ssq)


def euler_matrix_entry(f: ModeField, i: int, j: int, alpha: MultiIndex,
                       gamma: MultiIndex, l: float = 1.0) -> complex:
    """Coefficient of v_{j,gamma} in the quadratic terms at (i, alpha).

    Contracting the matrix against the field reproduces
    burgers_mode + leray_mode exactly under the shared box truncation.
    """
    box_index(alpha, f.K)
    box_index(gamma, f.K)
    delta = tuple(a - g for a, g in zip(alpha, gamma))
    if any(abs(d) > f.K for d in delta):
        return 0.0 + 0.0j
    aj_gj = alpha[j] - gamma[j]
    entry = -TWO_PI * 1j * aj_gj / l * f.mode(i, delta)
    ssq = float(sum(a * a for a in alpha))
    if ssq > 0.0:
        num = sum(gamma[k] * f.mode(k, delta) for k in range(f.ncomp))
        entry += TWO_PI * 1j * alpha[i] / l * aj_gj * num / ssq
    return complex(entry)


def rhs_mode(f: ModeField, i: int, alpha: MultiIndex, cfg: SimConfig) -> complex:
    """Full time derivative of one mode under truncation."""
    visc, q = ode_multipliers(cfg)
    ssq = float(sum(a * a for a in alpha))
    lap = -(visc * cfg.nu / (cfg.l * cfg.l)) * (FOUR_PI_SQ * ssq)
    return complex(lap * f.mode(i, alpha)
                   + q * (burgers_mode(f, i, alpha, cfg.l) + leray_mode(f, i, alpha, cfg.l)))


# ---------------------------------------------------------------------------
# Field-level assembly on top of the kernel backend.
# ---------------------------------------------------------------------------

def _inverse_modulus_grid(K: int, n: int) -> np.ndarray:
    ssq = squared_modulus_grid(K, n)
    inv = np.zeros_like(ssq)
    nz = ssq > 0
    inv[nz] = 1.0 / ssq[nz]
    return inv


def burgers_field(f: ModeField, l: float = 1.0, q: float = 1.0) -> np.ndarray:
    """Transport term at every mode, coefficient layout."""
    braw, _ = _kernels.euler_terms(f.coeffs)
    return (-1j * (TWO_PI * q / l)) * braw


def leray_field(f: ModeField, l: float = 1.0, q: float = 1.0) -> np.ndarray:
    """Projection term at every mode, coefficient layout."""
    _, nraw = _kernels.euler_terms(f.coeffs)
    inv = _inverse_modulus_grid(f.K, f.n)
    grids = index_grids(f.K, f.n)
    out = np.empty_like(f.coeffs)
    coef = 1j * (TWO_PI * q / l)
    for i in range(f.ncomp):
        out[i] = coef * grids[i] * nraw * inv
    return out


def euler_term_fields(f: ModeField, l: float = 1.0, q: float = 1.0) -> np.ndarray:
    """Transport + projection at every mode in one kernel pass."""
    braw, nraw = _kernels.euler_terms(f.coeffs)
    inv = _inverse_modulus_grid(f.K, f.n)
    grids = index_grids(f.K, f.n)
    coef = TWO_PI * q / l
    out = np.empty_like(f.coeffs)
    for i in range(f.ncomp):
        out[i] = (-1j * coef) * braw[i] + (1j * coef) * grids[i] * nraw * inv
    return out


def viscosity_rates(cfg: SimConfig) -> np.ndarray:
    """Per-mode decay rate of the heat part: visc * nu * 4 pi^2 |a|^2 / l^2."""
    visc, _ = ode_multipliers(cfg)
    return (visc * cfg.nu / (cfg.l * cfg.l)) * (FOUR_PI_SQ * squared_modulus_grid(cfg.K, cfg.n))


def rhs_field(f: ModeField, cfg: SimConfig) -> np.ndarray:
    """Full right-hand side at every mode, coefficient layout."""
    _, q = ode_multipliers(cfg)
    rates = viscosity_rates(cfg)
    return -rates * f.coeffs + euler_term_fields(f, cfg.l, q)
