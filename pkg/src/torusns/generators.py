"""Initial-data generators.

All generators return Hermitian-symmetric, divergence-free fields with zero
mean.  Construction places a component vector of Euclidean length equal to
the target amplitude on each mode pair and then removes the lattice-parallel
part; the projection cannot enlarge the Euclidean length, so per-component
amplitudes never exceed their targets and envelope ratios stay at or below
one by construction.
"""
from __future__ import annotations

import math

import numpy as np

from .bounds import DecayEnvelope
from .lattice import (ModeField, MultiIndex, box_index, decay_envelope_ratio,
                      iter_lattice, leray_project)


def _half_lattice(K: int, n: int):
    """Multi-indices with positive leading nonzero entry (one per mode pair)."""
    for alpha in iter_lattice(K, n):
        lead = next((a for a in alpha if a != 0), 0)
        if lead > 0:
            yield alpha


def _component_choice(alpha: MultiIndex) -> int:
    """Axis most transverse to alpha (smallest |alpha_d|, lowest index on ties)."""
    best = 0
    for d, a in enumerate(alpha):
        if abs(a) < abs(alpha[best]):
            best = d
    return best


def _paired_field(n: int, K: int, amplitude_of, vector_of) -> ModeField:
    """Assemble Hermitian pairs from per-mode unit component vectors, project."""
    arr = np.zeros((n,) + (2 * K + 1,) * n, dtype=np.complex128)
    for alpha in _half_lattice(K, n):
        amp = amplitude_of(alpha)
        if amp == 0.0:
            continue
        vec = amp * vector_of(alpha)
        neg = tuple(-a for a in alpha)
        pos_idx, neg_idx = box_index(alpha, K), box_index(neg, K)
        for i in range(n):
            arr[(i,) + pos_idx] = vec[i]
            arr[(i,) + neg_idx] = np.conj(vec[i])
    return leray_project(ModeField(arr))


def _axis_vector(alpha: MultiIndex, n: int) -> np.ndarray:
    vec = np.zeros(n, dtype=np.complex128)
    vec[_component_choice(alpha)] = 1.0
    return vec


def make_envelope_data(env: DecayEnvelope, seed: int, K: int,
                       mode: str = "random-phase") -> ModeField:
    """Field with |v_{i,a}| <= C/(1+|a|^(n+s)) on every mode, zero mean.

    'deterministic' places real amplitudes on the axis most transverse to each
    mode; 'random-phase' draws a full complex unit component vector per mode
    pair from a seeded generator (bit-reproducible for a fixed seed).
    """
    if mode not in ("deterministic", "random-phase"):
        raise ValueError(f"mode must be 'deterministic' or 'random-phase', got {mode!r}")
    rng = np.random.default_rng(seed)

    def amplitude(alpha: MultiIndex) -> float:
        return env.bound(math.sqrt(sum(a * a for a in alpha)))

    def random_unit(alpha: MultiIndex) -> np.ndarray:
        vec = rng.normal(size=env.n) + 1j * rng.normal(size=env.n)
        return vec / np.linalg.norm(vec)

    if mode == "deterministic":
        f = _paired_field(env.n, K, amplitude, lambda a: _axis_vector(a, env.n))
    else:
        f = _paired_field(env.n, K, amplitude, random_unit)
    if env.C == 0.0 or not np.any(f.coeffs):
        return f
    # the construction bounds every amplitude by its target in exact
    # arithmetic; absorb projection roundoff so the postcondition is exact
    ratio = decay_envelope_ratio(f, env)
    if ratio > 1.0:
        f = ModeField(f.coeffs * ((1.0 - 1e-14) / ratio))
    return f


def make_even_zero_data(K: int, n: int, amplitude: float,
                        decay: float | None = None) -> ModeField:
    """Exploration data vanishing on the even sublattice {a : |a|^2 even}.

    The surviving odd-parity modes carry amplitude/(1+|a|^decay) with decay
    defaulting to n/2 + 1, the borderline of square-summability against the
    first-order weight.  No singularity claim is attached to these data.
    """
    q = (0.5 * n + 1.0) if decay is None else decay

    def amp(alpha: MultiIndex) -> float:
        if sum(a * a for a in alpha) % 2 == 0:
            return 0.0
        return amplitude / (1.0 + math.sqrt(sum(a * a for a in alpha)) ** q)

    return _paired_field(n, K, amp, lambda a: _axis_vector(a, n))


def make_taylor_green(amplitude: float, K: int, n: int = 2) -> ModeField:
    """Modes of the planar vortex (-A cos x sin y, A sin x cos y).

    Defined for n = 2 only; intended for period 2 pi, where the field is an
    exact solution decaying as exp(-2 nu t) with the quadratic terms cancelled
    identically by the pressure projection.
    """
    if n != 2:
        raise ValueError(f"the analytic vortex datum is two-dimensional, got n = {n}")
    if K < 1:
        raise ValueError(f"cutoff must be >= 1, got {K}")
    arr = np.zeros((2, 2 * K + 1, 2 * K + 1), dtype=np.complex128)
    for a in (-1, 1):
        for b in (-1, 1):
            idx = box_index((a, b), K)
            arr[(0,) + idx] = 0.25j * amplitude * b
            arr[(1,) + idx] = -0.25j * amplitude * a
    return ModeField(arr)
