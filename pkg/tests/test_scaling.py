import math

import numpy as np
import pytest

from conftest import smooth_field

from torusns.bounds import elliptic_sum_constant
from torusns.integrators import run
from torusns.lattice import SimConfig, decay_envelope_ratio
from torusns.scaling import (ScalingParams, choose_r_mu, scaled_coefficients,
                             time_scale_map)
from conftest import envelope


def test_scaled_coefficients_inactive():
    assert scaled_coefficients(None) == (1.0, 1.0)
    assert scaled_coefficients(ScalingParams(r=7.3)) == (1.0, 1.0)


def test_scaled_coefficients_pure_space():
    assert scaled_coefficients(ScalingParams(r=2.0, mu=1.0)) == (4.0, 2.0)


def test_scaled_coefficients_mixed_exponents():
    visc, nonlin = scaled_coefficients(ScalingParams(r=2.0, mu=2.0, rho=3.0))
    assert visc == pytest.approx(2.0)
    assert nonlin == pytest.approx(0.5)


def test_scaling_params_reject_base():
    with pytest.raises(ValueError):
        ScalingParams(r=1.0)


def test_choose_r_mu_reference_value():
    assert choose_r_mu(1.0, 1.0, 1.0, 2) == pytest.approx(12 * math.pi, rel=1e-15)


def test_choose_r_mu_viscosity_homogeneity():
    assert choose_r_mu(0.5, 1.0, 1.0, 2) == pytest.approx(2 * choose_r_mu(1.0, 1.0, 1.0, 2))
    # viscosity above one saturates through min(nu, 1)
    assert choose_r_mu(5.0, 1.0, 1.0, 2) == choose_r_mu(1.0, 1.0, 1.0, 2)


def test_choose_r_mu_with_lattice_constant():
    c = elliptic_sum_constant(2, 1.5, 32)[0]
    got = choose_r_mu(1.0, 1.0, c, 2)
    assert got == pytest.approx(2 * math.pi * 6 * c, rel=1e-14)


def test_choose_r_mu_rejects_nonpositive_viscosity():
    with pytest.raises(ValueError):
        choose_r_mu(0.0, 1.0, 1.0, 2)


def test_time_scale_map():
    assert time_scale_map(ScalingParams(r=2.0, rho=0.0), 3.0) == 3.0
    assert time_scale_map(ScalingParams(r=2.0, rho=1.0), 3.0) == 6.0
    assert time_scale_map(ScalingParams(r=2.0, rho=-1.0), 3.0) == 1.5


@pytest.mark.parametrize("stepper", ["euler", "trotter"])
def test_period_equivalence_bit_exact(stepper):
    # scaled run at period l == unscaled run at period l / r^mu, bit for bit
    f = smooth_field(2, 5, seed=12, s=2.0, C=0.4)
    scaled = SimConfig(n=2, l=1.0, nu=0.7, K=5, dt=1e-4,
                       scaling=ScalingParams(r=2.0, mu=1.0))
    unscaled = SimConfig(n=2, l=0.5, nu=0.7, K=5, dt=1e-4)
    ra = run(f, scaled, 30e-4, stepper=stepper)
    rb = run(f, unscaled, 30e-4, stepper=stepper)
    assert np.array_equal(ra.field.coeffs, rb.field.coeffs)


def test_envelope_bound_transfers_under_spatial_scaling():
    # identical mode arrays => identical envelope ratios (transfer holds with equality)
    f = smooth_field(2, 4, seed=13, s=1.5, C=0.3)
    env = envelope(0.3, 1.5, 2)
    scaled = SimConfig(n=2, l=1.0, nu=1.0, K=4, dt=1e-4,
                       scaling=ScalingParams(r=4.0, mu=0.5))
    unscaled = SimConfig(n=2, l=0.5, nu=1.0, K=4, dt=1e-4)
    ra = run(f, scaled, 20e-4, stepper="trotter")
    rb = run(f, unscaled, 20e-4, stepper="trotter")
    assert np.array_equal(ra.field.coeffs, rb.field.coeffs)
    assert decay_envelope_ratio(ra.field, env) >= decay_envelope_ratio(rb.field, env)
