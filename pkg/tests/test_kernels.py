import numpy as np
import pytest

from conftest import random_field
from oracles import lattice, oracle_burgers, oracle_projection_numerator

from torusns import _kernels

HAS_COMPILED = _kernels.BACKEND == "compiled"


@pytest.mark.parametrize("n,K", [(1, 6), (2, 4), (3, 2)])
def test_reference_matches_bruteforce(n, K):
    f = random_field(n, K, seed=n * 10 + K)
    braw, nraw = _kernels.euler_terms_with("reference", f.coeffs)
    scale = max(float(np.abs(braw).max()), 1.0)
    for alpha in lattice(K, n)[:: max(1, (2 * K + 1) ** n // 25)]:
        idx = tuple(a + K for a in alpha)
        want_n = oracle_projection_numerator(f, alpha)
        assert abs(nraw[idx] - want_n) < 1e-10 * max(abs(want_n), scale)
        for i in range(n):
            # oracle_burgers carries the -(2 pi i / l) prefactor; strip it
            want_b = oracle_burgers(f, i, alpha) / (-2j * np.pi)
            assert abs(braw[i][idx] - want_b) < 1e-10 * max(abs(want_b), scale)


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled kernels not built")
@pytest.mark.parametrize("n,K", [(1, 9), (2, 5), (3, 2)])
def test_backends_agree(n, K):
    f = random_field(n, K, seed=n + K)
    b1, n1 = _kernels.euler_terms_with("reference", f.coeffs)
    b2, n2 = _kernels.euler_terms_with("compiled", f.coeffs)
    scale = max(float(np.abs(b1).max()), float(np.abs(n1).max()), 1e-30)
    assert float(np.abs(b1 - b2).max()) < 1e-10 * scale
    assert float(np.abs(n1 - n2).max()) < 1e-10 * scale


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled kernels not built")
def test_backends_agree_on_partially_supported_field():
    # support within 2K/3: the fast path must agree without any dealiasing rule
    K = 9
    f = random_field(2, K, seed=77)
    arr = f.mutable_coeffs()
    for a in range(-K, K + 1):
        for b in range(-K, K + 1):
            if max(abs(a), abs(b)) > 2 * K // 3:
                arr[:, a + K, b + K] = 0.0
    b1, n1 = _kernels.euler_terms_with("reference", arr)
    b2, n2 = _kernels.euler_terms_with("compiled", arr)
    scale = max(float(np.abs(b1).max()), float(np.abs(n1).max()))
    assert float(np.abs(b1 - b2).max()) < 1e-10 * scale
    assert float(np.abs(n1 - n2).max()) < 1e-10 * scale


def test_kernel_rejects_component_mismatch():
    with pytest.raises(ValueError):
        _kernels.euler_terms(np.zeros((3, 5, 5), dtype=complex))


def test_dispatch_is_deterministic():
    f = random_field(2, 4, seed=5)
    a1, a2 = _kernels.euler_terms(f.coeffs)
    b1, b2 = _kernels.euler_terms(f.coeffs)
    assert np.array_equal(a1, b1) and np.array_equal(a2, b2)
