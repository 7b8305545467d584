"""Frequency-lattice arithmetic, mode-field storage, norms and diagnostics.

A velocity state is stored densely over the box |alpha|_inf <= K of the
integer frequency lattice Z^n, one complex coefficient per component and
lattice point.  Multi-indices are plain tuples of ints; the array axis for
direction d is indexed by alpha_d + K.  Fields are immutable once built
(the coefficient array is write-protected), so read access is safe to share.
"""
from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass, field
from typing import IO, Iterator, TYPE_CHECKING

import numpy as np

from .scaling import ScalingParams

if TYPE_CHECKING:  # pragma: no cover
    from .bounds import DecayEnvelope

MultiIndex = tuple[int, ...]

TWO_PI = 2.0 * math.pi
FOUR_PI_SQ = 4.0 * math.pi * math.pi

_SNAPSHOT_MAGIC = b"TNSMODES"
_SNAPSHOT_VERSION = 1
_TEXT_HEADER = "torusns-modes"


@dataclass(frozen=True)
class DilatationParams:
    """Knobs of the time-dilatation comparison scheme.

    theta scales the artificial potential damping, t0 anchors the window,
    delta in (0,1) is the window length in original time, and variant selects
    how the (1 + theta * time) prefactor reads its clock: 'local' uses t - t0,
    'global' uses absolute t.
    """

    theta: float = 1.0
    t0: float = 0.0
    delta: float = 0.5
    variant: str = "local"

    def __post_init__(self):
        if self.theta < 0.0:
            raise ValueError(f"theta must be >= 0, got {self.theta}")
        if self.t0 < 0.0:
            raise ValueError(f"t0 must be >= 0, got {self.t0}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0,1), got {self.delta}")
        if self.variant not in ("local", "global"):
            raise ValueError(f"variant must be 'local' or 'global', got {self.variant!r}")


@dataclass(frozen=True)
class SimConfig:
    """Physical and numerical parameters of a run.

    n is the spatial dimension, l the period, nu the viscosity, K the lattice
    cutoff and dt the time step.  lambda_prime is the scalar prefactor of the
    quadratic terms.  scaling / dilatation are None when the corresponding
    transform is inactive.  trotter_viscosity_first flips the factor order of
    the split step (for splitting-order experiments).
    """

    n: int = 2
    l: float = 1.0
    nu: float = 1.0
    K: int = 8
    dt: float = 1e-3
    lambda_prime: float = 1.0
    scaling: ScalingParams | None = None
    dilatation: DilatationParams | None = None
    trotter_viscosity_first: bool = False

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.n}")
        if self.l <= 0.0:
            raise ValueError(f"period must be positive, got {self.l}")
        if self.nu < 0.0:
            raise ValueError(f"viscosity must be >= 0, got {self.nu}")
        if self.K < 1:
            raise ValueError(f"cutoff must be >= 1, got {self.K}")
        if self.dt <= 0.0:
            raise ValueError(f"time step must be positive, got {self.dt}")


@dataclass(frozen=True)
class ModeField:
    """Dense complex coefficients v_{i,alpha} over the box |alpha|_inf <= K.

    coeffs has shape (ncomp, 2K+1, ..., 2K+1) with one lattice axis per
    spatial direction.  The array is frozen at construction; derive modified
    fields through the module-level operations or ``replace_coeffs``.
    """

    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        if arr.ndim < 2 or arr.ndim > 4:
            raise ValueError("coefficient array must have 1, 2 or 3 lattice axes")
        extents = arr.shape[1:]
        if len(set(extents)) != 1 or extents[0] % 2 == 0 or extents[0] < 3:
            raise ValueError(f"lattice axes must share an odd extent >= 3, got {extents}")
        if not np.isfinite(arr.view(np.float64)).all():
            raise ValueError("coefficients must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def K(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    @classmethod
    def zeros(cls, n: int, K: int, ncomp: int | None = None) -> "ModeField":
        ncomp = n if ncomp is None else ncomp
        return cls(np.zeros((ncomp,) + (2 * K + 1,) * n, dtype=np.complex128))

    @classmethod
    def from_modes(cls, n: int, K: int, entries: dict[tuple[int, MultiIndex], complex],
                   ncomp: int | None = None) -> "ModeField":
        """Build a field from sparse (component, multi-index) -> value pairs."""
        ncomp = n if ncomp is None else ncomp
        arr = np.zeros((ncomp,) + (2 * K + 1,) * n, dtype=np.complex128)
        for (i, alpha), val in entries.items():
            arr[(i,) + box_index(alpha, K)] = val
        return cls(arr)

    def mode(self, i: int, alpha: MultiIndex) -> complex:
        return complex(self.coeffs[(i,) + box_index(alpha, self.K)])

    def replace_coeffs(self, coeffs: np.ndarray) -> "ModeField":
        return ModeField(coeffs)

    def mutable_coeffs(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=np.complex128)


def box_index(alpha: MultiIndex, K: int) -> tuple[int, ...]:
    """Array index of a multi-index; raises if outside the box."""
    idx = tuple(a + K for a in alpha)
    if any(i < 0 or i > 2 * K for i in idx):
        raise IndexError(f"multi-index {alpha} outside box with cutoff {K}")
    return idx


def iter_lattice(K: int, n: int) -> Iterator[MultiIndex]:
    """Yield every alpha with |alpha|_inf <= K exactly once, lexicographically.

    The order (last axis fastest, -K before K) is the canonical coefficient
    order of the snapshot formats.
    """
    if K < 0:
        raise ValueError(f"cutoff must be >= 0, got {K}")
    return itertools.product(range(-K, K + 1), repeat=n)


def index_grids(K: int, n: int) -> list[np.ndarray]:
    """Per-direction frequency grids, broadcastable over the box."""
    base = np.arange(-K, K + 1, dtype=np.float64)
    grids = []
    for d in range(n):
        shape = [1] * n
        shape[d] = 2 * K + 1
        grids.append(base.reshape(shape))
    return grids


def squared_modulus_grid(K: int, n: int) -> np.ndarray:
    """|alpha|^2 over the box, shape (2K+1,)*n."""
    out = np.zeros((2 * K + 1,) * n)
    for g in index_grids(K, n):
        out = out + g * g
    return out


def hermitian_symmetrize(f: ModeField) -> ModeField:
    """Project onto Hermitian-symmetric fields: v_{i,-a} = conj(v_{i,a}).

    Averages each coefficient with the conjugate of its mirror mode; the map
    is idempotent and leaves symmetric fields untouched.
    """
    rev = (slice(None),) + (slice(None, None, -1),) * f.n
    sym = 0.5 * (f.coeffs + np.conj(f.coeffs[rev]))
    return ModeField(sym)


def hermitian_defect(f: ModeField) -> float:
    """Largest |v_{i,a} - conj(v_{i,-a})| over the box."""
    rev = (slice(None),) + (slice(None, None, -1),) * f.n
    return float(np.abs(f.coeffs - np.conj(f.coeffs[rev])).max())


def sobolev_norm(f: ModeField, m: float) -> float:
    """Weighted l2 norm sqrt(sum |v_{i,a}|^2 (1+|a|^2)^m), max over components."""
    if m < 0.0:
        raise ValueError(f"order must be >= 0, got {m}")
    w = (1.0 + squared_modulus_grid(f.K, f.n)) ** m
    per_comp = np.sqrt(np.sum((f.coeffs.real**2 + f.coeffs.imag**2) * w,
                              axis=tuple(range(1, f.n + 1))))
    return float(per_comp.max())


def energy(f: ModeField) -> float:
    """Total squared coefficient mass sum_{i,a} |v_{i,a}|^2."""
    return float(np.sum(f.coeffs.real**2 + f.coeffs.imag**2))


def decay_envelope_ratio(f: ModeField, env: "DecayEnvelope") -> float:
    """Worst |v_{i,a}| (1+|a|^(n+s)) / C over nonzero modes; <= 1 means certified.

    Positively homogeneous in the field; the zero mode is excluded (it is
    owned by the control bookkeeping).  Requires a nondegenerate envelope.
    """
    if env.C <= 0.0:
        raise ValueError("envelope ratio needs a positive envelope amplitude")
    weight = 1.0 + squared_modulus_grid(f.K, f.n) ** (0.5 * env.exponent)
    ratios = np.abs(f.coeffs) * weight / env.C
    ratios[(slice(None),) + (f.K,) * f.n] = 0.0
    return float(ratios.max())


def envelope_worst_mode(f: ModeField, env: "DecayEnvelope") -> tuple[int, MultiIndex, float]:
    """(component, alpha, ratio) of the worst nonzero-mode envelope ratio."""
    weight = 1.0 + squared_modulus_grid(f.K, f.n) ** (0.5 * env.exponent)
    ratios = np.abs(f.coeffs) * weight / env.C
    ratios[(slice(None),) + (f.K,) * f.n] = 0.0
    flat = int(np.argmax(ratios))
    idx = np.unravel_index(flat, ratios.shape)
    alpha = tuple(int(j) - f.K for j in idx[1:])
    return int(idx[0]), alpha, float(ratios[idx])


def divergence_mode(f: ModeField, alpha: MultiIndex, l: float = 1.0) -> complex:
    """Mode-space divergence sum_i (2*pi*1j*alpha_i/l) v_{i,alpha}."""
    idx = box_index(alpha, f.K)
    acc = 0.0 + 0.0j
    for i in range(f.ncomp):
        acc += alpha[i] * f.coeffs[(i,) + idx]
    return complex(TWO_PI * 1j / l * acc)


def divergence_field(f: ModeField, l: float = 1.0) -> np.ndarray:
    """Divergence at every lattice point, shape (2K+1,)*n."""
    acc = np.zeros(f.coeffs.shape[1:], dtype=np.complex128)
    for i, g in enumerate(index_grids(f.K, f.n)):
        acc += g * f.coeffs[i]
    return TWO_PI * 1j / l * acc


def max_divergence(f: ModeField, l: float = 1.0) -> float:
    return float(np.abs(divergence_field(f, l)).max())


def leray_project(f: ModeField) -> ModeField:
    """Remove the lattice-parallel part of each nonzero mode.

    Maps v_a to v_a - alpha (alpha . v_a)/|alpha|^2, which zeroes
    divergence_mode on every nonzero mode; the zero mode is untouched.
    """
    grids = index_grids(f.K, f.n)
    ssq = squared_modulus_grid(f.K, f.n)
    inv = np.zeros_like(ssq)
    nz = ssq > 0
    inv[nz] = 1.0 / ssq[nz]
    dot = np.zeros(f.coeffs.shape[1:], dtype=np.complex128)
    for i in range(f.ncomp):
        dot += grids[i] * f.coeffs[i]
    out = f.mutable_coeffs()
    for i in range(f.ncomp):
        out[i] -= grids[i] * dot * inv
    return ModeField(out)


def zero_mean(f: ModeField) -> ModeField:
    """Zero the alpha = 0 coefficient of every component."""
    out = f.mutable_coeffs()
    out[(slice(None),) + (f.K,) * f.n] = 0.0
    return ModeField(out)


# ---------------------------------------------------------------------------
# Snapshot persistence.  Binary layout (little endian):
#   magic "TNSMODES" | uint32 version | uint32 n | uint32 ncomp | uint32 K
#   | float64 l | ncomp * (2K+1)^n coefficient pairs (float64 re, float64 im)
# component-major, lattice points in iter_lattice order.  The text variant
# carries the same header as "key value" lines followed by one "re im" line
# per coefficient in identical order.
# ---------------------------------------------------------------------------

def save_field(path, f: ModeField, l: float, fmt: str = "binary") -> None:
    """Write a field snapshot; fmt is 'binary' or 'text'."""
    if fmt == "binary":
        with open(path, "wb") as fh:
            _write_binary(fh, f, l)
    elif fmt == "text":
        with open(path, "w", newline="\n") as fh:
            _write_text(fh, f, l)
    else:
        raise ValueError(f"unknown snapshot format {fmt!r}")


def load_field(path) -> tuple[ModeField, float]:
    """Read a snapshot written by save_field; returns (field, period)."""
    with open(path, "rb") as fh:
        head = fh.read(len(_SNAPSHOT_MAGIC))
        fh.seek(0)
        if head == _SNAPSHOT_MAGIC:
            return _read_binary(fh)
    with open(path, "r") as fh:
        return _read_text(fh)


def _write_binary(fh: IO[bytes], f: ModeField, l: float) -> None:
    fh.write(_SNAPSHOT_MAGIC)
    fh.write(struct.pack("<IIIId", _SNAPSHOT_VERSION, f.n, f.ncomp, f.K, l))
    flat = np.ascontiguousarray(f.coeffs).view(np.float64)
    fh.write(flat.tobytes())


def _read_binary(fh: IO[bytes]) -> tuple[ModeField, float]:
    magic = fh.read(len(_SNAPSHOT_MAGIC))
    if magic != _SNAPSHOT_MAGIC:
        raise ValueError("not a torusns binary snapshot")
    version, n, ncomp, K, l = struct.unpack("<IIIId", fh.read(24))
    if version != _SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    count = ncomp * (2 * K + 1) ** n
    data = np.frombuffer(fh.read(16 * count), dtype=np.float64)
    if data.size != 2 * count:
        raise ValueError("truncated snapshot")
    arr = data.view(np.complex128).reshape((ncomp,) + (2 * K + 1,) * n)
    return ModeField(arr), float(l)


def _write_text(fh: IO[str], f: ModeField, l: float) -> None:
    fh.write(f"{_TEXT_HEADER} {_SNAPSHOT_VERSION}\n")
    fh.write(f"n {f.n}\n")
    fh.write(f"ncomp {f.ncomp}\n")
    fh.write(f"K {f.K}\n")
    fh.write(f"l {float(l)!r}\n")
    for i in range(f.ncomp):
        for alpha in iter_lattice(f.K, f.n):
            z = f.coeffs[(i,) + box_index(alpha, f.K)]
            fh.write(f"{float(z.real)!r} {float(z.imag)!r}\n")


def _read_text(fh: IO[str]) -> tuple[ModeField, float]:
    first = fh.readline().split()
    if len(first) != 2 or first[0] != _TEXT_HEADER:
        raise ValueError("not a torusns text snapshot")
    if int(first[1]) != _SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {first[1]}")
    header: dict[str, str] = {}
    for _ in range(4):
        key, val = fh.readline().split()
        header[key] = val
    n, ncomp, K = int(header["n"]), int(header["ncomp"]), int(header["K"])
    l = float(header["l"])
    arr = np.zeros((ncomp,) + (2 * K + 1,) * n, dtype=np.complex128)
    for i in range(ncomp):
        for alpha in iter_lattice(K, n):
            re, im = fh.readline().split()
            arr[(i,) + box_index(alpha, K)] = complex(float(re), float(im))
    return ModeField(arr), l
