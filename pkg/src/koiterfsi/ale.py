"""Arbitrary Lagrangian-Eulerian mesh motion and interface geometry.

The mesh displacement is the discrete harmonic extension, on the reference
domain, of the wall displacement; it vanishes on the inlet, outlet and
symmetry boundaries.  The P1 Laplacian is factorized once.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .errors import MeshError, ParameterError
from .fluid.mesh import check_mesh
from .fluid.stokes import p1_gradients


@dataclass(frozen=True)
class InterfaceGeometry:
    """Nodal Jacobian ``J`` and unit outward normal ``normal`` (shape (n, 2))
    of the deformed wall."""

    J: np.ndarray
    normal: np.ndarray


def interface_geometry(eta, wall_grid):
    """Jacobian and normal of the wall ``z -> (z + eta_z, R + eta_r)``.

    Derivatives use second-order centred differences inside and one-sided
    second-order differences at the end nodes.

    Parameters
    ----------
    eta : ShellState or tuple of ndarray
        Wall displacement; a ``(eta_z, eta_r)`` pair is accepted too.
    wall_grid : array_like
        Reference z coordinates of the wall nodes.
    """
    if hasattr(eta, "eta_z"):
        ez, er = eta.eta_z, eta.eta_r
    else:
        ez, er = eta
    z = np.asarray(wall_grid, dtype=float)
    if len(z) < 3:
        dz = np.diff(z)
        dez = np.full(len(z), (ez[-1] - ez[0]) / dz.sum())
        der = np.full(len(z), (er[-1] - er[0]) / dz.sum())
    else:
        dez = np.gradient(np.asarray(ez, dtype=float), z, edge_order=2)
        der = np.gradient(np.asarray(er, dtype=float), z, edge_order=2)
    tz = 1.0 + dez
    J = np.sqrt(tz * tz + der * der)
    normal = np.column_stack([-der, tz]) / J[:, None]
    return InterfaceGeometry(J=J, normal=normal)


def laplacian(points, tris):
    """P1 stiffness matrix of the scalar Laplacian."""
    area, gz, gr = p1_gradients(points, tris)
    vals = np.abs(area)[:, None, None] * (gz[:, :, None] * gz[:, None, :]
                                          + gr[:, :, None] * gr[:, None, :])
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    n = len(points)
    return sparse.csr_matrix((vals.ravel(), (rows, cols)), shape=(n, n))


class HarmonicExtender:
    """Factorized Dirichlet Laplacian on the reference fine mesh."""

    def __init__(self, mesh):
        self.mesh = mesh
        boundary = np.zeros(mesh.n_nodes, dtype=bool)
        for edges in mesh.boundary_edges.values():
            boundary[edges.ravel()] = True
        self.boundary = np.flatnonzero(boundary)
        self.interior = np.flatnonzero(~boundary)
        K = laplacian(mesh.points, mesh.tris).tocsr()
        self._K_ib = K[self.interior][:, self.boundary]
        K_ii = K[self.interior][:, self.interior].tocsc()
        self._lu = None
        if len(self.interior):
            try:
                self._lu = spla.splu(K_ii)
            except RuntimeError as exc:
                raise MeshError(f"singular mesh Laplacian: {exc}") from exc

    def extend(self, boundary_values):
        """Harmonic extension of nodal values given on every boundary node.

        ``boundary_values`` has shape ``(n_nodes,)`` or ``(n_nodes, k)``;
        entries at interior nodes are ignored.
        """
        g = np.asarray(boundary_values, dtype=float)
        if not np.all(np.isfinite(g[self.boundary])):
            raise MeshError("non-finite boundary displacement")
        out = np.zeros_like(g)
        out[self.boundary] = g[self.boundary]
        if self._lu is not None:
            out[self.interior] = self._lu.solve(-(self._K_ib @ g[self.boundary]))
        return out

    def extend_wall(self, wall_values):
        """Extension of a field given on the wall (shape ``(n_wall, k)``),
        zero on the rest of the boundary."""
        wall_values = np.asarray(wall_values, dtype=float)
        g = np.zeros((self.mesh.n_nodes,) + wall_values.shape[1:])
        g[self.mesh.interface_nodes] = wall_values
        return self.extend(g)


def harmonic_extension(boundary_displacement, mesh, extender=None):
    """Interior displacement field from wall data.

    Parameters
    ----------
    boundary_displacement : ndarray, shape (n_wall, 2)
        ``(eta_z, eta_r)`` on the interface nodes, ordered by z.
    mesh : Mesh
        Reference mesh.
    extender : HarmonicExtender, optional
        Reuse an existing factorization.
    """
    ext = extender if extender is not None else HarmonicExtender(mesh)
    return ext.extend_wall(boundary_displacement)


def domain_velocity(d_new, d_old, dt):
    """First-order domain velocity ``(d_new - d_old) / dt``."""
    if not (dt > 0 and math.isfinite(dt)):
        raise ParameterError(f"time step must be positive, got {dt}")
    return (np.asarray(d_new) - np.asarray(d_old)) / dt


@dataclass
class MovingMesh:
    """Reference mesh with its current displacement, positions and domain
    velocity."""

    reference: object
    displacement: np.ndarray
    w: np.ndarray

    @classmethod
    def at_rest(cls, mesh):
        z = np.zeros((mesh.n_nodes, 2))
        return cls(mesh, z, z.copy())

    @property
    def points(self):
        return self.reference.points + self.displacement

    def copy(self):
        return MovingMesh(self.reference, self.displacement.copy(), self.w.copy())

    def moved(self, displacement, dt):
        """New mesh with ``displacement``; validates element orientation."""
        w = domain_velocity(displacement, self.displacement, dt)
        new = MovingMesh(self.reference, displacement, w)
        check_mesh(new.points, self.reference.tris)
        return new
