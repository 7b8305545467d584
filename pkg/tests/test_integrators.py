import math
import warnings

import numpy as np
import pytest

from conftest import envelope, random_divfree_field, smooth_field
from oracles import lattice, oracle_rhs

from torusns.integrators import (OverflowDetected, damped_viscosity_factor,
                                 euler_step, run, step_count, trotter_step)
from torusns.lattice import ModeField, SimConfig, hermitian_defect


def heat_pair(K=4, c=0.3 + 0.1j):
    return ModeField.from_modes(2, K, {(0, (0, 1)): c, (0, (0, -1)): np.conj(c)})


CFG = SimConfig(n=2, l=1.0, nu=1.0, K=4, dt=1e-4)


def test_euler_zero_fixed_point():
    f = ModeField.zeros(2, 4)
    assert np.array_equal(euler_step(f, CFG).coeffs, f.coeffs)


def test_euler_heat_pair_closed_form():
    c = 0.3 + 0.1j
    g = euler_step(heat_pair(c=c), CFG)
    assert g.mode(0, (0, 1)) == pytest.approx(c * (1 - 4 * math.pi**2 * CFG.dt), rel=1e-14)


@pytest.mark.parametrize("seed", range(2))
def test_euler_matches_rhs_oracle(seed):
    cfg = SimConfig(n=2, l=1.4, nu=0.3, K=2, dt=2e-3)
    f = random_divfree_field(2, 2, seed=seed, scale=0.5)
    g = euler_step(f, cfg)
    for alpha in lattice(2, 2):
        if alpha == (0, 0):
            continue
        for i in range(2):
            want = f.mode(i, alpha) + cfg.dt * oracle_rhs(f, i, alpha, cfg.nu, cfg.l)
            assert g.mode(i, alpha) == pytest.approx(want, rel=1e-12, abs=1e-14)


def test_trotter_zero_fixed_point():
    f = ModeField.zeros(2, 4)
    assert np.array_equal(trotter_step(f, CFG).coeffs, f.coeffs)


def test_trotter_heat_pair_exact_exponential():
    c = 0.3 + 0.1j
    g = trotter_step(heat_pair(c=c), CFG)
    assert g.mode(0, (0, 1)) == c * math.exp(-4 * math.pi**2 * CFG.dt)


def test_trotter_euler_richardson_quotient():
    f = smooth_field(2, 8, seed=3, s=2.0)
    base = SimConfig(n=2, l=1.0, nu=1.0, K=8, dt=2e-5)
    half = SimConfig(n=2, l=1.0, nu=1.0, K=8, dt=1e-5)
    d1 = np.abs(trotter_step(f, base).coeffs - euler_step(f, base).coeffs).max()
    d2 = np.abs(trotter_step(f, half).coeffs - euler_step(f, half).coeffs).max()
    assert 3.5 <= d1 / d2 <= 4.5


def test_trotter_factor_order_flag_changes_result_second_order():
    f = smooth_field(2, 6, seed=4, s=2.0)
    diffs = []
    for dt in (2e-5, 1e-5):
        a = SimConfig(n=2, nu=1.0, K=6, dt=dt)
        b = SimConfig(n=2, nu=1.0, K=6, dt=dt, trotter_viscosity_first=True)
        diffs.append(np.abs(trotter_step(f, a).coeffs - trotter_step(f, b).coeffs).max())
    assert diffs[0] > 0
    assert 3.0 <= diffs[0] / diffs[1] <= 5.0


def test_damped_viscosity_factor_values():
    assert damped_viscosity_factor((0, 0), 0.7, 0.01, 1.0, nu=1.0) == 1.0
    assert damped_viscosity_factor((2, 1), 0.0, 0.01, 1.0, nu=1.0) == 1.0
    got = damped_viscosity_factor((1, 0), 1.0, 0.01, 1.0, nu=1.0)
    assert got == pytest.approx(math.exp(-0.04 * math.pi**2), rel=1e-15)


def test_damped_viscosity_factor_rejects_out_of_range():
    with pytest.raises(ValueError):
        damped_viscosity_factor((1, 0), -0.1, 0.01)
    with pytest.raises(ValueError):
        damped_viscosity_factor((1, 0), 2.0, 0.01, 1.0, nu=1.0)


def test_trotter_attenuated_damping():
    f = heat_pair()
    g_full = trotter_step(f, CFG)
    g_off = trotter_step(f, CFG, nu_tilde=0.0)
    # nu~ = 0 disables the diagonal damping entirely
    assert g_off.mode(0, (0, 1)) == f.mode(0, (0, 1))
    half = trotter_step(f, CFG, nu_tilde=0.5)
    assert abs(g_full.mode(0, (0, 1))) < abs(half.mode(0, (0, 1))) < abs(f.mode(0, (0, 1)))
    with pytest.raises(ValueError):
        trotter_step(f, CFG, nu_tilde=1.5)


def test_zero_row_held_fixed_even_when_nonzero():
    arr = np.zeros((2, 9, 9), dtype=complex)
    arr[0, 4, 4] = 0.8 - 0.2j  # nonzero mean
    arr[0, 5, 4] = 0.1
    arr[0, 3, 4] = 0.1
    f = ModeField(arr)
    for step in (euler_step, trotter_step):
        g = step(f, CFG)
        assert g.mode(0, (0, 0)) == f.mode(0, (0, 0))
        assert g.mode(1, (0, 0)) == 0.0


def test_steppers_preserve_hermitian_symmetry():
    f = smooth_field(2, 6, seed=6, s=2.0)
    cfg = SimConfig(n=2, nu=1.0, K=6, dt=1e-4)
    g = f
    for _ in range(20):
        g = trotter_step(g, cfg)
    assert hermitian_defect(g) < 1e-12


def test_run_zero_steps_identity():
    f = smooth_field(2, 4, seed=8)
    res = run(f, CFG, 0.0)
    assert res.steps == 0
    assert np.array_equal(res.field.coeffs, f.coeffs)


def test_run_heat_product_and_reports():
    c = 0.25 + 0.05j
    f = heat_pair(c=c)
    env = envelope(1.0, 1.5, 2)
    res = run(f, CFG, 50 * CFG.dt, stepper="trotter", env=env, stride=10)
    want = c * math.exp(-4 * math.pi**2 * CFG.dt) ** 50
    assert res.field.mode(0, (0, 1)) == pytest.approx(want, rel=1e-13)
    assert [r.step for r in res.reports] == [10, 20, 30, 40, 50]
    r = res.reports[-1]
    assert r.t == pytest.approx(50 * CFG.dt)
    assert np.isfinite([r.ratio_after, r.energy, r.max_div, r.h_norm, r.max_delta]).all()


def test_run_semigroup_bit_exact():
    f = smooth_field(2, 5, seed=9)
    cfg = SimConfig(n=2, nu=0.8, K=5, dt=1e-4)
    two = run(f, cfg, 2 * cfg.dt, stepper="trotter").field
    one_one = run(run(f, cfg, cfg.dt, stepper="trotter").field, cfg, cfg.dt,
                  stepper="trotter").field
    assert np.array_equal(two.coeffs, one_one.coeffs)


def test_run_overflow_detected():
    f = ModeField(40.0 * random_divfree_field(2, 4, seed=10).coeffs)
    cfg = SimConfig(n=2, nu=0.0, K=4, dt=50.0)
    with pytest.raises(OverflowDetected):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            run(f, cfg, 200 * cfg.dt, stepper="euler")


def test_step_count_divisibility():
    assert step_count(0.5, 1e-4) == 5000
    assert step_count(0.0, 1e-3) == 0
    with pytest.raises(ValueError):
        step_count(0.00055, 1e-4)


def test_run_warns_on_stiff_step():
    f = heat_pair(K=8)
    cfg = SimConfig(n=2, nu=1.0, K=8, dt=1e-2)
    with pytest.warns(UserWarning):
        run(f, cfg, cfg.dt, stepper="trotter")
