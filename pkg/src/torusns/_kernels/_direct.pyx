# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend: direct triad loops over the box.

Same contract as the reference backend: for each alpha, sum over gamma with
alpha - gamma also in the box,

    braw[i, a] = sum_j sum_g g_j v[j, a-g] v[i, g]
    nraw[a]    = sum_{j,k} sum_g g_k (a_j - g_j) v[j, g] v[k, a-g]

The inner products factorize per (gamma, alpha-gamma) pair: with
bv = sum_j g_j v[j, a-g] and ad = sum_j (a_j - g_j) v[j, g] one has
nraw += ad * bv and braw[i] += bv * v[i, g].
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef double complex cplx


def euler_terms(cnp.ndarray v):
    n = v.ndim - 1
    if n == 1:
        return _euler_terms_1d(v)
    if n == 2:
        return _euler_terms_2d(v)
    if n == 3:
        return _euler_terms_3d(v)
    raise ValueError(f"unsupported dimension {n}")


def _euler_terms_1d(const cplx[:, ::1] v):
    cdef Py_ssize_t L = v.shape[1]
    cdef Py_ssize_t K = (L - 1) // 2
    cdef cnp.ndarray braw_arr = np.zeros((1, L), dtype=np.complex128)
    cdef cnp.ndarray nraw_arr = np.zeros((L,), dtype=np.complex128)
    cdef cplx[:, ::1] braw = braw_arr
    cdef cplx[::1] nraw = nraw_arr
    cdef Py_ssize_t a, g, lo, hi
    cdef cplx bv, ad, vg, acc_n, acc_b
    for a in range(-K, K + 1):
        lo = -K if a - K < -K else a - K
        hi = K if a + K > K else a + K
        acc_n = 0
        acc_b = 0
        for g in range(lo, hi + 1):
            vg = v[0, g + K]
            bv = g * v[0, a - g + K]
            ad = (a - g) * vg
            acc_n = acc_n + ad * bv
            acc_b = acc_b + bv * vg
        nraw[a + K] = acc_n
        braw[0, a + K] = acc_b
    return braw_arr, nraw_arr


def _euler_terms_2d(const cplx[:, :, ::1] v):
    cdef Py_ssize_t L = v.shape[1]
    cdef Py_ssize_t K = (L - 1) // 2
    cdef cnp.ndarray braw_arr = np.zeros((2, L, L), dtype=np.complex128)
    cdef cnp.ndarray nraw_arr = np.zeros((L, L), dtype=np.complex128)
    cdef cplx[:, :, ::1] braw = braw_arr
    cdef cplx[:, ::1] nraw = nraw_arr
    cdef Py_ssize_t a0, a1, g0, g1, lo0, hi0, lo1, hi1, d0, d1
    cdef cplx bv, ad, vg0, vg1, acc_n, acc_b0, acc_b1
    for a0 in range(-K, K + 1):
        lo0 = -K if a0 - K < -K else a0 - K
        hi0 = K if a0 + K > K else a0 + K
        for a1 in range(-K, K + 1):
            lo1 = -K if a1 - K < -K else a1 - K
            hi1 = K if a1 + K > K else a1 + K
            acc_n = 0
            acc_b0 = 0
            acc_b1 = 0
            for g0 in range(lo0, hi0 + 1):
                d0 = a0 - g0
                for g1 in range(lo1, hi1 + 1):
                    d1 = a1 - g1
                    vg0 = v[0, g0 + K, g1 + K]
                    vg1 = v[1, g0 + K, g1 + K]
                    bv = g0 * v[0, d0 + K, d1 + K] + g1 * v[1, d0 + K, d1 + K]
                    ad = d0 * vg0 + d1 * vg1
                    acc_n = acc_n + ad * bv
                    acc_b0 = acc_b0 + bv * vg0
                    acc_b1 = acc_b1 + bv * vg1
            nraw[a0 + K, a1 + K] = acc_n
            braw[0, a0 + K, a1 + K] = acc_b0
            braw[1, a0 + K, a1 + K] = acc_b1
    return braw_arr, nraw_arr


def _euler_terms_3d(const cplx[:, :, :, ::1] v):
    cdef Py_ssize_t L = v.shape[1]
    cdef Py_ssize_t K = (L - 1) // 2
    cdef cnp.ndarray braw_arr = np.zeros((3, L, L, L), dtype=np.complex128)
    cdef cnp.ndarray nraw_arr = np.zeros((L, L, L), dtype=np.complex128)
    cdef cplx[:, :, :, ::1] braw = braw_arr
    cdef cplx[:, :, ::1] nraw = nraw_arr
    cdef Py_ssize_t a0, a1, a2, g0, g1, g2, d0, d1, d2
    cdef Py_ssize_t lo0, hi0, lo1, hi1, lo2, hi2
    cdef cplx bv, ad, vg0, vg1, vg2, acc_n, acc_b0, acc_b1, acc_b2
    for a0 in range(-K, K + 1):
        lo0 = -K if a0 - K < -K else a0 - K
        hi0 = K if a0 + K > K else a0 + K
        for a1 in range(-K, K + 1):
            lo1 = -K if a1 - K < -K else a1 - K
            hi1 = K if a1 + K > K else a1 + K
            for a2 in range(-K, K + 1):
                lo2 = -K if a2 - K < -K else a2 - K
                hi2 = K if a2 + K > K else a2 + K
                acc_n = 0
                acc_b0 = 0
                acc_b1 = 0
                acc_b2 = 0
                for g0 in range(lo0, hi0 + 1):
                    d0 = a0 - g0
                    for g1 in range(lo1, hi1 + 1):
                        d1 = a1 - g1
                        for g2 in range(lo2, hi2 + 1):
                            d2 = a2 - g2
                            vg0 = v[0, g0 + K, g1 + K, g2 + K]
                            vg1 = v[1, g0 + K, g1 + K, g2 + K]
                            vg2 = v[2, g0 + K, g1 + K, g2 + K]
                            bv = (g0 * v[0, d0 + K, d1 + K, d2 + K]
                                  + g1 * v[1, d0 + K, d1 + K, d2 + K]
                                  + g2 * v[2, d0 + K, d1 + K, d2 + K])
                            ad = d0 * vg0 + d1 * vg1 + d2 * vg2
                            acc_n = acc_n + ad * bv
                            acc_b0 = acc_b0 + bv * vg0
                            acc_b1 = acc_b1 + bv * vg1
                            acc_b2 = acc_b2 + bv * vg2
                nraw[a0 + K, a1 + K, a2 + K] = acc_n
                braw[0, a0 + K, a1 + K, a2 + K] = acc_b0
                braw[1, a0 + K, a1 + K, a2 + K] = acc_b1
                braw[2, a0 + K, a1 + K, a2 + K] = acc_b2
    return braw_arr, nraw_arr
