"""Step 2: ALE advection by the method of characteristics.

Each velocity node is traced back along ``a = u - w`` and the old field is
interpolated linearly at the foot of the characteristic.  Linear
interpolation is a convex combination of nodal values, so the update obeys
a discrete maximum principle and reproduces constant and linear fields.
"""
import math

import numpy as np
from scipy.spatial import cKDTree

from ..errors import StepError

MAX_SUBSTEPS = 200
CFL = 0.5
N_CANDIDATES = 12


class PointLocator:
    """Barycentric point location on a fixed triangulation."""

    def __init__(self, points, tris):
        self.points = points
        self.tris = tris
        v = points[tris]
        self._p0 = v[:, 0]
        e1 = v[:, 1] - v[:, 0]
        e2 = v[:, 2] - v[:, 0]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        # inverse of [e1 e2] per triangle
        self._inv = np.stack([np.stack([e2[:, 1], -e2[:, 0]], -1),
                              np.stack([-e1[:, 1], e1[:, 0]], -1)], 1) / det[:, None, None]
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        self._scale = 1.0 / np.maximum(hi - lo, 1e-300) * np.sqrt(len(tris))
        self._tree = cKDTree(v.mean(axis=1) * self._scale)
        self._k = min(N_CANDIDATES, len(tris))

    def _bary(self, x, cand):
        d = x[:, None, :] - self._p0[cand]
        lam12 = np.einsum("nkij,nkj->nki", self._inv[cand], d)
        lam0 = 1.0 - lam12.sum(axis=-1)
        return np.concatenate([lam0[..., None], lam12], axis=-1)

    def locate(self, x):
        """Containing triangle and barycentric weights for each point.

        Points outside the triangulation are projected onto the closest
        candidate by clipping the barycentric weights, which keeps the
        weights a convex combination.
        """
        _, cand = self._tree.query(x * self._scale, k=self._k)
        if cand.ndim == 1:
            cand = cand[:, None]
        lam = self._bary(x, cand)
        worst = lam.min(axis=-1)
        best = np.argmax(worst, axis=1)
        rows = np.arange(len(x))
        tri = cand[rows, best]
        w = lam[rows, best]
        outside = worst[rows, best] < -1e-12
        if np.any(outside):
            w[outside] = np.clip(w[outside], 0.0, None)
            w[outside] /= w[outside].sum(axis=1, keepdims=True)
        return tri, w

    def interpolate(self, field, x):
        tri, w = self.locate(x)
        nodes = self.tris[tri]
        if field.ndim == 1:
            return np.einsum("nk,nk->n", field[nodes], w)
        return np.einsum("nkc,nk->nc", field[nodes], w)


def _outward_normals(mesh, points):
    """Area-weighted outward normals at boundary nodes (zero elsewhere)."""
    normals = np.zeros_like(points)
    for edges in mesh.boundary_edges.values():
        d = points[edges[:, 1]] - points[edges[:, 0]]
        nl = np.column_stack([d[:, 1], -d[:, 0]])
        for end in (0, 1):
            np.add.at(normals, edges[:, end], 0.5 * nl)
    return normals


def step2_advect(state, w, mesh, dt, fixed_nodes=None, max_substeps=MAX_SUBSTEPS):
    """Transport ``state.u`` along ``u - w`` for one step on the frozen domain.

    Parameters
    ----------
    state : FluidState
        Output of the Stokes step; its velocity is both the transported
        field and the transporting velocity.
    w : ndarray, shape (n_nodes, 2)
        Domain velocity at the fine nodes.
    mesh : MovingMesh
        Domain frozen at ``t^n``.
    dt : float
    fixed_nodes : array_like of int, optional
        Nodes whose velocity must not change (e.g. the interface).

    Returns
    -------
    FluidState
        Same pressure, advected velocity.  Inflow boundary nodes keep their
        values; the symmetry condition ``u_r = 0`` on the axis is preserved.
    """
    from . import FluidState

    if not (dt > 0 and math.isfinite(dt)):
        raise StepError(f"time step must be positive, got {dt}")
    ref = mesh.reference
    points = mesh.points
    u = state.u
    a = u - w
    speed = np.max(np.abs(a)) if a.size else 0.0
    if speed == 0.0:
        return FluidState(u.copy(), state.p.copy())

    edge = points[ref.tris[:, [1, 2, 0]]] - points[ref.tris]
    h_min = np.sqrt((edge ** 2).sum(-1)).min()
    n_sub = max(1, math.ceil(speed * dt / (CFL * h_min)))
    if n_sub > max_substeps:
        raise StepError(f"advection needs {n_sub} sub-steps (cap {max_substeps}); "
                        f"|u - w| = {speed:.3g} cm/s is too large for dt = {dt:.3g} s")

    keep = np.zeros(len(points), dtype=bool)
    keep[ref.interface_nodes] = True
    if fixed_nodes is not None:
        keep[np.asarray(fixed_nodes)] = True
    normals = _outward_normals(ref, points)
    inflow = np.einsum("ij,ij->i", a, normals) < 0.0
    keep |= inflow
    moving = np.flatnonzero(~keep & (np.abs(a).sum(axis=1) > 0.0))

    locator = PointLocator(points, ref.tris)
    x = points[moving].copy()
    tau = dt / n_sub
    for step in range(n_sub):
        vel = a[moving] if step == 0 else locator.interpolate(a, x)
        x = x - tau * vel
    new_u = u.copy()
    new_u[moving] = locator.interpolate(u, x)
    new_u[ref.axis_nodes, 1] = 0.0
    return FluidState(new_u, state.p.copy())
