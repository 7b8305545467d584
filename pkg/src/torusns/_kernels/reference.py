"""Pure numpy/scipy kernel backend.

Computes the raw triad sums of the quadratic terms by full linear convolution
(zero-padded FFT), which reproduces the sharp box truncation exactly: every
product of two in-box modes lands in the padded array, and cropping back to
the box discards exactly the triads that leave it.  No dealiasing rule is
needed because nothing aliases.

Kernel contract (shared with the compiled backend), for v of shape
(ncomp, 2K+1, ..., 2K+1):

    braw[i, a] = sum_j sum_g g_j * v[j, a-g] * v[i, g]
    nraw[a]    = sum_{j,k} sum_g g_k * (a_j - g_j) * v[j, g] * v[k, a-g]

with g and a-g both restricted to the box.  Period factors, 2*pi*i weights
and the projection denominator are applied by the caller.
"""
from __future__ import annotations

import numpy as np
from scipy import fft as _fft


def _axis_grid(K: int, n: int, d: int) -> np.ndarray:
    shape = [1] * n
    shape[d] = 2 * K + 1
    return np.arange(-K, K + 1, dtype=np.float64).reshape(shape)


def euler_terms(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw transport and projection-numerator sums for all modes."""
    ncomp = v.shape[0]
    n = v.ndim - 1
    L = v.shape[1]
    K = (L - 1) // 2
    pad = tuple(_fft.next_fast_len(2 * L - 1) for _ in range(n))
    crop = (slice(K, 3 * K + 1),) * n

    grids = [_axis_grid(K, n, d) for d in range(n)]
    fv = [_fft.fftn(v[i], s=pad) for i in range(ncomp)]
    # w[i][d] holds the d-weighted component i: (g_d * v_i)(g)
    fw = [[_fft.fftn(grids[d] * v[i], s=pad) for d in range(n)] for i in range(ncomp)]

    braw = np.empty_like(v)
    for i in range(ncomp):
        acc = np.zeros(pad, dtype=np.complex128)
        for j in range(ncomp):
            acc += fw[i][j] * fv[j]
        braw[i] = _fft.ifftn(acc)[crop]

    acc = np.zeros(pad, dtype=np.complex128)
    for j in range(ncomp):
        for k in range(ncomp):
            acc += fw[j][k] * fw[k][j]
    nraw = _fft.ifftn(acc)[crop]
    return braw, nraw
