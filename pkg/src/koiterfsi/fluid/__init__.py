"""Mixed finite elements for the fluid on the moving domain."""
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from .boundary import BoundaryData, Waveform, inlet_pressure_pulse, load_waveform, MMHG
from .mesh import Mesh, build_mesh, check_mesh, signed_areas


@dataclass(frozen=True)
class FluidParams:
    """Fluid density (g/cm^3) and dynamic viscosity (poise)."""

    rho_f: float
    mu: float

    def __post_init__(self):
        for name in ("rho_f", "mu"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be a positive finite number, got {value!r}")


@dataclass
class FluidState:
    """Velocity on the fine nodes (shape ``(n, 2)``, columns z, r) and
    pressure on the coarse nodes."""

    u: np.ndarray
    p: np.ndarray

    @classmethod
    def zeros(cls, mesh):
        return cls(np.zeros((mesh.n_nodes, 2)), np.zeros(mesh.n_coarse))

    def copy(self):
        return FluidState(self.u.copy(), self.p.copy())


from .stokes import step1_stokes, StokesOperators, assemble_stokes, discrete_divergence  # noqa: E402
from .advection import step2_advect  # noqa: E402

__all__ = [
    "BoundaryData", "FluidParams", "FluidState", "Mesh", "MMHG", "StokesOperators",
    "Waveform", "assemble_stokes", "build_mesh", "check_mesh", "discrete_divergence",
    "inlet_pressure_pulse", "load_waveform", "signed_areas", "step1_stokes",
    "step2_advect",
]
