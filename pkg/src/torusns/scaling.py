"""Variable-transform calculus v(t,x) = r^lambda v*(r^rho t, r^mu x).

The transform never touches stored coefficients: it only induces two scalar
multipliers on the mode ODE (one on the viscosity term, one on the quadratic
terms), plus a rescaling of the time horizon.  Running the scaled system at
period l is the same as running the unscaled system at period l / r^mu.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ScalingParams:
    """Exponents of the linear change of variables.

    r is the scale base (> 1 when the transform is active); lam rescales the
    amplitude, rho the time axis and mu the space axis.  All exponents are
    dimensionless.
    """

    r: float = 2.0
    lam: float = 0.0
    rho: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        if not self.r > 1.0:
            raise ValueError(f"scale base r must be > 1, got {self.r}")


def scaled_coefficients(params: ScalingParams | None) -> tuple[float, float]:
    """Multipliers (viscosity, quadratic terms) induced on the mode ODE.

    The viscosity term picks up r^(2*mu - rho) and the transport/projection
    terms pick up r^(lam + mu - rho).  ``None`` means transform inactive,
    i.e. (1, 1).
    """
    if params is None:
        return 1.0, 1.0
    visc = params.r ** (2.0 * params.mu - params.rho)
    nonlin = params.r ** (params.lam + params.mu - params.rho)
    return visc, nonlin


def choose_r_mu(nu: float, c_star: float, c: float, n: int) -> float:
    """Space-scale multiplier r^mu making viscosity dominate envelope growth.

    Returns 2*pi*(n+n^2) * c * c_star^2 / min(nu, 1), the smallest multiplier
    for which the per-step damping at half-envelope amplitude offsets the
    lattice-sum bound on the quadratic terms.  c is the elliptic lattice-sum
    constant (see :func:`torusns.bounds.elliptic_sum_constant`) and c_star the
    envelope amplitude.  The damping-dominance analysis takes c_star >= 1
    without loss of generality (a bound with smaller amplitude is also a bound
    with amplitude 1); smaller values are accepted as-is.
    """
    if nu <= 0.0:
        raise ValueError(f"viscosity must be positive, got {nu}")
    if c <= 0.0:
        raise ValueError(f"lattice-sum constant must be positive, got {c}")
    return TWO_PI * (n + n * n) * c * c_star * c_star / min(nu, 1.0)


def time_scale_map(params: ScalingParams, horizon: float) -> float:
    """Scaled horizon T_rho = r^rho * T."""
    return params.r ** params.rho * horizon
