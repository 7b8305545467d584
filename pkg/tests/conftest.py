import warnings

import numpy as np
import pytest

from torusns.bounds import DecayEnvelope
from torusns.lattice import ModeField, hermitian_symmetrize, leray_project, zero_mean


def random_field(n, K, seed, scale=1.0):
    """Unstructured random field (no symmetry, no projection)."""
    rng = np.random.default_rng(seed)
    shape = (n,) + (2 * K + 1,) * n
    return ModeField(scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape)))


def random_divfree_field(n, K, seed, scale=1.0):
    """Hermitian-symmetric, divergence-free, zero-mean random field."""
    return zero_mean(leray_project(hermitian_symmetrize(random_field(n, K, seed, scale))))


def smooth_field(n, K, seed, s=2.0, C=1.0):
    """Envelope-bounded divergence-free data (smooth in the decay sense)."""
    from torusns.generators import make_envelope_data
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        env = DecayEnvelope(C=C, s=s, n=n)
    return make_envelope_data(env, seed=seed, K=K, mode="random-phase")


def envelope(C, s, n):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return DecayEnvelope(C=C, s=s, n=n)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
