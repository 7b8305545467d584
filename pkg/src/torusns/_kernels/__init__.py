"""Backend selection for the convolution kernels.

Two interchangeable implementations of the same triad-sum contract (see
``reference.euler_terms``): compiled direct O(K^{2n}) loops (Cython) and a
numpy/scipy path built on exact zero-padded FFT convolution.  Availability is
decided at import; per call, the direct loops are used for small boxes (where
they beat the FFT fixed costs) and the FFT path above ``DIRECT_POINT_LIMIT``
lattice points, the measured crossover region.  Environment overrides:

    TORUSNS_KERNELS=reference   force the pure numpy/scipy path
    TORUSNS_KERNELS=compiled    force the extension, fail if it is missing
    TORUSNS_DIRECT_LIMIT=N      move the dispatch threshold (box points)

Within a run the box size is fixed, so dispatch is deterministic.
"""
from __future__ import annotations

import importlib
import os

import numpy as np

from . import reference

_requested = os.environ.get("TORUSNS_KERNELS", "").strip().lower()
DIRECT_POINT_LIMIT = int(os.environ.get("TORUSNS_DIRECT_LIMIT", "300"))

_direct = None
if _requested not in ("reference", "python"):
    try:
        _direct = importlib.import_module(__name__ + "._direct")
    except ImportError:
        _direct = None
if _requested == "compiled" and _direct is None:
    raise ImportError("TORUSNS_KERNELS=compiled requested but torusns._kernels._direct is not built")

BACKEND = "compiled" if _direct is not None else "reference"


def _check(v: np.ndarray) -> np.ndarray:
    v = np.ascontiguousarray(v, dtype=np.complex128)
    if v.shape[0] != v.ndim - 1:
        raise ValueError(f"expected one component per lattice axis, got shape {v.shape}")
    return v


def euler_terms(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw triad sums (braw, nraw) of the quadratic terms; see reference module."""
    v = _check(v)
    if _direct is not None and (_requested == "compiled" or v[0].size <= DIRECT_POINT_LIMIT):
        return _direct.euler_terms(v)
    return reference.euler_terms(v)


def euler_terms_with(backend: str, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run a specific backend ('compiled' or 'reference'); used by benchmarks/tests."""
    v = _check(v)
    if backend == "reference":
        return reference.euler_terms(v)
    if backend == "compiled":
        if _direct is None:
            raise ImportError("compiled kernel backend is not built")
        return _direct.euler_terms(v)
    raise ValueError(f"unknown backend {backend!r}")
