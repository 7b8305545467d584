"""Spectral Galerkin simulation and decay-envelope certification on the torus."""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend  # noqa: F401
from .bounds import CertReport, DecayEnvelope  # noqa: F401
from .control import ControlState, DilatationCoeffs  # noqa: F401
from .integrators import (CertificateViolated, OverflowDetected, RunResult,  # noqa: F401
                          StepReport, euler_step, run, trotter_step)
from .lattice import (DilatationParams, ModeField, SimConfig, iter_lattice,  # noqa: F401
                      load_field, save_field)
from .scaling import ScalingParams  # noqa: F401
