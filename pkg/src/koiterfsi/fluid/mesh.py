"""Nested structured triangulations for the P1-iso-P2 (Bercovier-Pironneau) pair.

The pressure lives on a coarse ``n_z x n_r`` grid of the rectangle
``(0, L) x (0, R)``; velocity lives on the grid obtained by splitting every
coarse triangle into four.  Fine node ``(i, j)`` (``i`` along z, ``j``
along r) has index ``j * nz_fine + i`` and coarse node ``(I, J)`` coincides
with fine node ``(2I, 2J)``.

Cell diagonals are mirrored about ``z = L/2`` so that the triangulation is
symmetric under ``z -> L - z``.
"""
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import MeshError

INLET = "inlet"
OUTLET = "outlet"
AXIS = "axis"
INTERFACE = "interface"


@dataclass
class Mesh:
    """Reference (undeformed) nested mesh pair and boundary bookkeeping."""

    L: float
    R: float
    n_z: int
    n_r: int
    coarse_points: np.ndarray
    coarse_tris: np.ndarray
    points: np.ndarray
    tris: np.ndarray
    parent: np.ndarray
    prolongation: sparse.csr_matrix
    boundary_edges: dict
    interface_nodes: np.ndarray
    coarse_interface_nodes: np.ndarray
    axis_nodes: np.ndarray
    inlet_nodes: np.ndarray
    outlet_nodes: np.ndarray

    @property
    def nz_fine(self):
        return 2 * self.n_z - 1

    @property
    def nr_fine(self):
        return 2 * self.n_r - 1

    @property
    def n_nodes(self):
        return len(self.points)

    @property
    def n_coarse(self):
        return len(self.coarse_points)

    @property
    def wall_grid(self):
        """Reference z coordinates of the interface (wall) nodes."""
        return self.points[self.interface_nodes, 0].copy()

    def fine_index(self, i, j):
        return j * self.nz_fine + i

    def column(self, i):
        """Fine node indices of the vertical grid line ``i``, bottom to top."""
        return self.fine_index(i, np.arange(self.nr_fine))

    def coarse_column(self, I):
        return np.arange(self.n_r) * self.n_z + I


def _coarse_triangles(n_z, n_r):
    tris = []
    half = (n_z - 1) // 2
    for J in range(n_r - 1):
        for I in range(n_z - 1):
            a = J * n_z + I
            b = a + 1
            c = a + n_z
            d = c + 1
            if I < half:
                # diagonal a-d
                tris.append((a, b, d))
                tris.append((a, d, c))
            else:
                # diagonal b-c
                tris.append((a, b, c))
                tris.append((b, d, c))
    return np.array(tris, dtype=np.int64)


def build_mesh(n_z, n_r, L, R):
    """Structured coarse/fine mesh pair on ``(0, L) x (0, R)``.

    Raises
    ------
    MeshError
        If fewer than two nodes are requested in either direction or the
        rectangle is degenerate.
    """
    if int(n_z) != n_z or int(n_r) != n_r or n_z < 2 or n_r < 2:
        raise MeshError(f"need n_z, n_r >= 2, got ({n_z}, {n_r})")
    if not (L > 0 and R > 0):
        raise MeshError(f"domain must have positive size, got L={L}, R={R}")
    n_z, n_r = int(n_z), int(n_r)
    zc = np.linspace(0.0, L, n_z)
    rc = np.linspace(0.0, R, n_r)
    ZC, RC = np.meshgrid(zc, rc)
    coarse_points = np.column_stack([ZC.ravel(), RC.ravel()])
    coarse_tris = _coarse_triangles(n_z, n_r)

    nzf, nrf = 2 * n_z - 1, 2 * n_r - 1
    zf = np.linspace(0.0, L, nzf)
    rf = np.linspace(0.0, R, nrf)
    ZF, RF = np.meshgrid(zf, rf)
    points = np.column_stack([ZF.ravel(), RF.ravel()])

    # coarse node (I, J) -> index-space (2I, 2J); midpoints sum the pairs
    cI = coarse_tris % n_z
    cJ = coarse_tris // n_z

    def fine(iz, jr):
        return jr * nzf + iz

    v = [fine(2 * cI[:, k], 2 * cJ[:, k]) for k in range(3)]
    m01 = fine(cI[:, 0] + cI[:, 1], cJ[:, 0] + cJ[:, 1])
    m12 = fine(cI[:, 1] + cI[:, 2], cJ[:, 1] + cJ[:, 2])
    m20 = fine(cI[:, 2] + cI[:, 0], cJ[:, 2] + cJ[:, 0])
    tris = np.stack([
        np.column_stack([v[0], m01, m20]),
        np.column_stack([m01, v[1], m12]),
        np.column_stack([m20, m12, v[2]]),
        np.column_stack([m01, m12, m20]),
    ], axis=1).reshape(-1, 3)
    parent = np.repeat(np.arange(len(coarse_tris)), 4)

    prolongation = _prolongation(coarse_tris, v, (m01, m12, m20), len(points),
                                 len(coarse_points))

    interface_nodes = fine(np.arange(nzf), nrf - 1)
    axis_nodes = fine(np.arange(nzf), 0)
    inner_j = np.arange(1, nrf - 1)
    inlet_nodes = fine(0, inner_j)
    outlet_nodes = fine(nzf - 1, inner_j)
    coarse_interface_nodes = (n_r - 1) * n_z + np.arange(n_z)

    boundary_edges = {
        AXIS: np.column_stack([axis_nodes[:-1], axis_nodes[1:]]),
        OUTLET: np.column_stack([fine(nzf - 1, np.arange(nrf - 1)),
                                 fine(nzf - 1, np.arange(1, nrf))]),
        INTERFACE: np.column_stack([interface_nodes[1:], interface_nodes[:-1]]),
        INLET: np.column_stack([fine(0, np.arange(1, nrf)),
                                fine(0, np.arange(nrf - 1))]),
    }
    mesh = Mesh(L=float(L), R=float(R), n_z=n_z, n_r=n_r,
                coarse_points=coarse_points, coarse_tris=coarse_tris,
                points=points, tris=tris, parent=parent,
                prolongation=prolongation, boundary_edges=boundary_edges,
                interface_nodes=interface_nodes,
                coarse_interface_nodes=coarse_interface_nodes,
                axis_nodes=axis_nodes, inlet_nodes=inlet_nodes,
                outlet_nodes=outlet_nodes)
    areas = signed_areas(points, tris)
    if np.any(areas <= 0):
        raise MeshError("reference triangulation is not positively oriented")
    return mesh


def _prolongation(coarse_tris, verts, mids, n_fine, n_coarse):
    """Interpolation of coarse P1 nodal values onto the fine nodes."""
    rows, cols, vals = [], [], []
    for k in range(3):
        rows.append(verts[k])
        cols.append(coarse_tris[:, k])
        vals.append(np.ones(len(coarse_tris)))
    pairs = ((0, 1), (1, 2), (2, 0))
    for m, (a, b) in zip(mids, pairs):
        for k in (a, b):
            rows.append(m)
            cols.append(coarse_tris[:, k])
            vals.append(0.5 * np.ones(len(coarse_tris)))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    # shared nodes were visited several times; keep one copy of each entry
    key = rows * n_coarse + cols
    _, first = np.unique(key, return_index=True)
    P = sparse.csr_matrix((vals[first], (rows[first], cols[first])),
                          shape=(n_fine, n_coarse))
    return P


def signed_areas(points, tris):
    p0 = points[tris[:, 0]]
    e1 = points[tris[:, 1]] - p0
    e2 = points[tris[:, 2]] - p0
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def check_mesh(points, tris):
    """Raise :class:`MeshError` if any element is inverted or degenerate."""
    areas = signed_areas(points, tris)
    if not np.all(np.isfinite(areas)) or np.any(areas <= 0):
        bad = int(np.sum(~(areas > 0)))
        raise MeshError(f"{bad} tangled or degenerate element(s) in deformed mesh")
    return areas
