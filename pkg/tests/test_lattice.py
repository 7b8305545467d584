import math

import numpy as np
import pytest

from conftest import envelope, random_field
from oracles import oracle_envelope_ratio, oracle_sobolev

from torusns.lattice import (ModeField, decay_envelope_ratio, divergence_mode,
                             hermitian_defect, hermitian_symmetrize,
                             iter_lattice, load_field, save_field,
                             sobolev_norm)


def test_iter_lattice_origin_only():
    assert list(iter_lattice(0, 2)) == [(0, 0)]


def test_iter_lattice_1d():
    assert list(iter_lattice(1, 1)) == [(-1,), (0,), (1,)]


def test_iter_lattice_2d_lexicographic():
    pts = list(iter_lattice(1, 2))
    assert len(pts) == 9
    assert pts == sorted(pts)


@pytest.mark.parametrize("K,n", [(0, 1), (3, 1), (2, 2), (5, 2), (2, 3)])
def test_iter_lattice_count_and_uniqueness(K, n):
    pts = list(iter_lattice(K, n))
    assert len(pts) == (2 * K + 1) ** n
    assert len(set(pts)) == len(pts)
    assert all(max(abs(a) for a in p) <= K for p in pts)


def test_iter_lattice_rejects_negative_cutoff():
    with pytest.raises(ValueError):
        iter_lattice(-1, 2)


def test_symmetrize_zero_field():
    f = ModeField.zeros(2, 3)
    g = hermitian_symmetrize(f)
    assert np.array_equal(g.coeffs, f.coeffs)


def test_symmetrize_fixes_broken_pair():
    f = ModeField.from_modes(2, 2, {(0, (1, 0)): 1 + 2j, (0, (-1, 0)): 0.0})
    g = hermitian_symmetrize(f)
    assert g.mode(0, (1, 0)) == pytest.approx(0.5 + 1j)
    assert g.mode(0, (-1, 0)) == pytest.approx(0.5 - 1j)


def test_symmetrize_idempotent_and_symmetric_fixed_point():
    f = random_field(2, 4, seed=7)
    g = hermitian_symmetrize(f)
    assert hermitian_defect(g) < 1e-14
    h = hermitian_symmetrize(g)
    assert np.array_equal(h.coeffs, g.coeffs)


def test_symmetrize_commutes_with_real_scaling():
    f = random_field(2, 3, seed=8)
    a = hermitian_symmetrize(ModeField(2.5 * f.coeffs))
    b = ModeField(2.5 * hermitian_symmetrize(f).coeffs)
    assert np.allclose(a.coeffs, b.coeffs, rtol=1e-14, atol=1e-13)
    # power-of-two scalars commute exactly
    c = hermitian_symmetrize(ModeField(2.0 * f.coeffs))
    d = ModeField(2.0 * hermitian_symmetrize(f).coeffs)
    assert np.array_equal(c.coeffs, d.coeffs)


def test_sobolev_zero_field():
    assert sobolev_norm(ModeField.zeros(2, 3), 1.5) == 0.0


def test_sobolev_single_mode_and_pair():
    single = ModeField.from_modes(2, 2, {(0, (1, 0)): 1.0})
    assert sobolev_norm(single, 0.0) == pytest.approx(1.0)
    pair = ModeField.from_modes(2, 2, {(0, (1, 0)): 1.0, (0, (-1, 0)): 1.0})
    assert sobolev_norm(pair, 0.0) == pytest.approx(math.sqrt(2.0))


@pytest.mark.parametrize("seed", range(4))
def test_sobolev_matches_direct_sum(seed):
    f = random_field(2, 3, seed=seed)
    for m in (0.0, 1.0, 2.5):
        assert sobolev_norm(f, m) == pytest.approx(oracle_sobolev(f, m), rel=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_sobolev_monotone_in_order(seed):
    f = random_field(2, 4, seed=seed)
    norms = [sobolev_norm(f, m) for m in (0.0, 0.5, 1.0, 2.0, 3.0)]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


def test_sobolev_rejects_negative_order():
    with pytest.raises(ValueError):
        sobolev_norm(ModeField.zeros(2, 2), -1.0)


def test_envelope_ratio_equality_case():
    env = envelope(0.7, 1.5, 2)
    K = 4
    arr = np.zeros((2, 9, 9), dtype=complex)
    for a in range(-K, K + 1):
        for b in range(-K, K + 1):
            absa = math.hypot(a, b)
            arr[:, a + K, b + K] = env.C / (1.0 + absa ** env.exponent)
    assert decay_envelope_ratio(ModeField(arr), env) == pytest.approx(1.0, rel=1e-14)


def test_envelope_ratio_zero_field():
    assert decay_envelope_ratio(ModeField.zeros(2, 3), envelope(1.0, 1.5, 2)) == 0.0


def test_envelope_ratio_single_mode_value():
    f = ModeField.from_modes(2, 3, {(0, (2, 0)): 0.1})
    got = decay_envelope_ratio(f, envelope(1.0, 1.5, 2))
    assert got == pytest.approx(0.1 * (1 + 2 ** 3.5), rel=1e-13)
    assert got == pytest.approx(oracle_envelope_ratio(f, 1.0, 1.5), rel=1e-12)


@pytest.mark.parametrize("c", [0.25, 3.0])
def test_envelope_ratio_homogeneous(c):
    f = random_field(2, 3, seed=11)
    env = envelope(1.3, 1.5, 2)
    assert decay_envelope_ratio(ModeField(c * f.coeffs), env) == pytest.approx(
        c * decay_envelope_ratio(f, env), rel=1e-12)


def test_divergence_mode_cases():
    assert divergence_mode(ModeField.zeros(2, 2), (1, 0)) == 0.0
    f = ModeField.from_modes(2, 2, {(0, (0, 1)): 0.3 + 0.1j})
    assert divergence_mode(f, (0, 1)) == 0.0
    g = ModeField.from_modes(2, 2, {(0, (1, 1)): 1.0, (1, (1, 1)): 1.0})
    got = divergence_mode(g, (1, 1), l=2.0)
    assert got == pytest.approx(2.0 * math.pi * 1j / 2.0 * 2.0)


def test_field_rejects_nonfinite():
    arr = np.zeros((2, 5, 5), dtype=complex)
    arr[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        ModeField(arr)


def test_field_is_frozen():
    f = ModeField.zeros(2, 2)
    with pytest.raises(ValueError):
        f.coeffs[0, 0, 0] = 1.0


@pytest.mark.parametrize("fmt", ["binary", "text"])
def test_snapshot_roundtrip(tmp_path, fmt):
    f = random_field(2, 3, seed=21)
    path = tmp_path / f"f.{fmt}"
    save_field(path, f, 2.5, fmt=fmt)
    g, l = load_field(path)
    assert l == 2.5
    assert np.array_equal(g.coeffs, f.coeffs)


def test_snapshot_formats_cross_load(tmp_path):
    f = random_field(1, 5, seed=3)
    save_field(tmp_path / "a", f, 1.0, fmt="binary")
    save_field(tmp_path / "b", f, 1.0, fmt="text")
    ga, _ = load_field(tmp_path / "a")
    gb, _ = load_field(tmp_path / "b")
    assert np.array_equal(ga.coeffs, gb.coeffs)
