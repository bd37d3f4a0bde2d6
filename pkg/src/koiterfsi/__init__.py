"""Fluid-structure interaction of an incompressible viscous fluid in a 2D
channel with a linearly viscoelastic cylindrical Koiter shell wall, solved
with the kinematically coupled beta-scheme."""
from .errors import (ConfigError, DataError, FSIError, MeshError, ParameterError,
                     SolverError, StepError)

__version__ = "0.1.0"

__all__ = ["ConfigError", "DataError", "FSIError", "MeshError", "ParameterError",
           "SolverError", "StepError", "__version__"]
