"""Cross-section observables on the current (deformed) mesh."""
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

SERIES_FIELDS = ("t", "diameter", "flowrate", "mean_pressure", "eta_z_mid", "eta_r_mid")


def _section_column(mesh, z):
    if not (0.0 <= z <= mesh.L):
        raise ParameterError(f"section z={z} lies outside the domain [0, {mesh.L}]")
    dz = mesh.L / (mesh.nz_fine - 1)
    return mesh.column(int(round(z / dz)))


def _trapezoid(values, r):
    return float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(r)))


def flowrate(state, mesh, z, points=None):
    """Flow rate ``int_0^g u_z dr`` through the grid line closest to ``z``.

    Parameters
    ----------
    state : FluidState
    mesh : Mesh or MovingMesh
    z : float
        Reference axial position of the section.
    points : ndarray, optional
        Current node positions; defaults to the moving mesh positions, or
        the reference positions for a plain mesh.
    """
    ref = getattr(mesh, "reference", mesh)
    if points is None:
        points = mesh.points
    col = _section_column(ref, z)
    return _trapezoid(state.u[col, 0], points[col, 1])


def mean_pressure(state, mesh, z, points=None):
    """Section average ``(1/g) int_0^g p dr`` of the pressure."""
    ref = getattr(mesh, "reference", mesh)
    if points is None:
        points = mesh.points
    col = _section_column(ref, z)
    p_fine = ref.prolongation[col] @ state.p
    r = points[col, 1]
    height = r[-1] - r[0]
    return _trapezoid(p_fine, r) / height


@dataclass
class ObservableSeries:
    """Time series of the benchmark observables at the tube midpoint."""

    t: list = field(default_factory=list)
    diameter: list = field(default_factory=list)
    flowrate: list = field(default_factory=list)
    mean_pressure: list = field(default_factory=list)
    eta_z_mid: list = field(default_factory=list)
    eta_r_mid: list = field(default_factory=list)

    def __len__(self):
        return len(self.t)

    def append(self, **values):
        for name in SERIES_FIELDS:
            getattr(self, name).append(float(values[name]))

    def validate(self):
        lengths = {len(getattr(self, name)) for name in SERIES_FIELDS}
        if len(lengths) > 1:
            raise ParameterError("observable columns have different lengths")
        if np.any(np.diff(self.t) <= 0):
            raise ParameterError("observable time samples must increase")

    def as_array(self):
        return np.column_stack([np.asarray(getattr(self, n), dtype=float)
                                for n in SERIES_FIELDS]) if len(self) else np.zeros((0, 6))
