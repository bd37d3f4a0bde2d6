"""Step 1: backward-Euler Stokes solve with the wall viscosity and inertia on
the interface (Robin-type coupling).

Unknowns are ordered ``[u_z (fine nodes), u_r (fine nodes), p (coarse nodes)]``.
Interface velocity DOFs are the wall velocity DOFs, so the wall mass and
viscous operators are added directly onto them.
"""
import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from ..errors import SolverError
from .mesh import INLET, OUTLET


def p1_gradients(points, tris):
    """Areas and constant basis gradients ``(gz, gr)`` of every triangle."""
    x = points[tris, 0]
    y = points[tris, 1]
    area2 = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    gz = np.empty_like(x)
    gr = np.empty_like(x)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        gz[:, i] = (y[:, j] - y[:, k]) / area2
        gr[:, i] = (x[:, k] - x[:, j]) / area2
    return 0.5 * area2, gz, gr


def mass_matrix(points, tris, n=None):
    """Consistent scalar P1 mass matrix."""
    n = len(points) if n is None else n
    area = np.abs(p1_gradients(points, tris)[0])
    local = (np.ones((3, 3)) + np.eye(3)) / 12.0
    vals = area[:, None, None] * local[None]
    rows = np.repeat(tris, 3, axis=1)
    cols = np.tile(tris, (1, 3))
    return sparse.csr_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=(n, n))


def _parent_weights(mesh):
    """Mean of each coarse basis function of the parent triangle over every
    fine triangle (constant in time: the prolongation is topological)."""
    P = mesh.prolongation.tocsr()
    verts = mesh.coarse_tris[mesh.parent]  # (nT, 3)
    W = np.zeros(verts.shape)
    for kk in range(3):
        for m in range(3):
            W[:, kk] += np.asarray(P[mesh.tris[:, m], verts[:, kk]]).ravel()
    return verts, W / 3.0


class StokesOperators:
    """Reduced sparsity pattern and constant blocks of the Step-1 system.

    Parameters
    ----------
    mesh : Mesh
        Reference mesh pair (topology only is used here).
    shell_ops : ShellOperators
        Wall operators; their fixed DOFs become zero velocity Dirichlet DOFs.
    """

    def __init__(self, mesh, shell_ops):
        self.mesh = mesh
        self.shell_ops = shell_ops
        nf = mesh.n_nodes
        self.n_vel = 2 * nf
        self.n_dof = 2 * nf + mesh.n_coarse
        iface = mesh.interface_nodes
        if len(iface) != shell_ops.n:
            raise SolverError("wall grid does not match the interface nodes")
        # wall dof (c, i) -> fluid dof c*nf + iface[i]
        self.wall_dofs = np.concatenate([iface, nf + iface])

        fixed = np.zeros(self.n_dof, dtype=bool)
        fixed[nf + mesh.axis_nodes] = True
        fixed[self.wall_dofs[~shell_ops.free]] = True
        self.fixed = fixed
        self.free_dofs = np.flatnonzero(~fixed)
        self.reduce = -np.ones(self.n_dof, dtype=np.int64)
        self.reduce[self.free_dofs] = np.arange(len(self.free_dofs))

        tris = mesh.tris
        self._vv_rows = np.repeat(tris, 3, axis=1).ravel()
        self._vv_cols = np.tile(tris, (1, 3)).ravel()
        self._pverts, self._pweights = _parent_weights(mesh)

        # wall blocks in fluid numbering (geometry independent)
        Ms = shell_ops.M_s.tocoo()
        Kv = shell_ops.K_v.tocoo()
        self._ms = (self.wall_dofs[Ms.row], self.wall_dofs[Ms.col], Ms.data)
        self._kv = (self.wall_dofs[Kv.row], self.wall_dofs[Kv.col], Kv.data)

        self._build_pattern()

    def _raw_entries(self, points, rho_f, mu, dt):
        """COO triplets of the full (unreduced) symmetric saddle matrix."""
        mesh = self.mesh
        nf = mesh.n_nodes
        area, gz, gr = p1_gradients(points, mesh.tris)
        a = area[:, None, None]
        local_m = (np.ones((3, 3)) + np.eye(3)) / 12.0
        m = (rho_f / dt) * a * local_m[None]
        gzi, gzj = gz[:, :, None], gz[:, None, :]
        gri, grj = gr[:, :, None], gr[:, None, :]
        kzz = m + mu * a * (2.0 * gzi * gzj + gri * grj)
        krr = m + mu * a * (2.0 * gri * grj + gzi * gzj)
        kzr = mu * a * gri * gzj  # test v_z, trial u_r
        krz = mu * a * gzi * grj  # test v_r, trial u_z
        R, C = self._vv_rows, self._vv_cols
        rows = [R, R, R + nf, R + nf]
        cols = [C, C + nf, C, C + nf]
        vals = [kzz.ravel(), kzr.ravel(), krz.ravel(), krr.ravel()]

        # -int q div v and its transpose; div is constant on a fine triangle
        pv = 2 * nf + self._pverts  # (nT, 3) coarse dofs
        bw = self._pweights * area[:, None]  # int_T q_k
        for comp, g in ((0, gz), (1, gr)):
            blk = -bw[:, :, None] * g[:, None, :]  # (nT, 3 coarse, 3 fine)
            prow = np.repeat(pv, 3, axis=1).ravel()
            vcol = np.tile(mesh.tris + comp * nf, (1, 3)).ravel()
            rows += [prow, vcol]
            cols += [vcol, prow]
            vals += [blk.ravel(), blk.ravel()]

        r, c, v = self._ms
        rows.append(r)
        cols.append(c)
        vals.append(v / dt)
        r, c, v = self._kv
        rows.append(r)
        cols.append(c)
        vals.append(v)
        return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)

    def _build_pattern(self):
        pts = self.mesh.points
        rows, cols, _ = self._raw_entries(pts, 1.0, 1.0, 1.0)
        rr = self.reduce[rows]
        cc = self.reduce[cols]
        keep = (rr >= 0) & (cc >= 0)
        n = len(self.free_dofs)
        key = cc[keep] * n + rr[keep]
        uniq, inverse = np.unique(key, return_inverse=True)
        self._keep = keep
        self._slot = inverse
        self._nnz = len(uniq)
        self._indices = (uniq % n).astype(np.int32)
        counts = np.bincount(uniq // n, minlength=n)
        self._indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)
        self._n_red = n

    def matrix(self, points, rho_f, mu, dt):
        """Reduced saddle-point matrix (CSC) on the node positions ``points``."""
        _, _, vals = self._raw_entries(points, rho_f, mu, dt)
        data = np.bincount(self._slot, weights=vals[self._keep], minlength=self._nnz)
        return sparse.csc_matrix((data, self._indices, self._indptr),
                                 shape=(self._n_red, self._n_red))

    def load(self, points, u_old, zeta_old, rho_f, dt, p_in, p_out, p_trace,
             geom, beta):
        """Full right-hand side vector."""
        mesh = self.mesh
        nf = mesh.n_nodes
        b = np.zeros(self.n_dof)
        M = mass_matrix(points, mesh.tris, nf)
        b[:nf] = (rho_f / dt) * (M @ u_old[:, 0])
        b[nf:2 * nf] = (rho_f / dt) * (M @ u_old[:, 1])
        b[self.wall_dofs] += (self.shell_ops.M_s @ zeta_old) / dt

        for tag, p in ((INLET, p_in), (OUTLET, p_out)):
            if p == 0.0:
                continue
            e = mesh.boundary_edges[tag]
            d = points[e[:, 1]] - points[e[:, 0]]
            # outward normal times length for counter-clockwise edges
            nl = np.column_stack([d[:, 1], -d[:, 0]])
            for end in (0, 1):
                np.add.at(b, e[:, end], -0.5 * p * nl[:, 0])
                np.add.at(b, nf + e[:, end], -0.5 * p * nl[:, 1])

        if beta != 0.0:
            M1 = self.shell_ops.M1
            pj = np.asarray(p_trace, dtype=float) * geom.J
            load = np.concatenate([M1 @ (pj * geom.normal[:, 0]),
                                   M1 @ (pj * geom.normal[:, 1])])
            b[self.wall_dofs] -= beta * load
        return b

    def divergence_matrix(self, points):
        """``B[k, dof] = int q_k div(phi_dof)`` (coarse pressure rows)."""
        mesh = self.mesh
        nf = mesh.n_nodes
        area, gz, gr = p1_gradients(points, mesh.tris)
        bw = self._pweights * area[:, None]
        rows, cols, vals = [], [], []
        for comp, g in ((0, gz), (1, gr)):
            blk = bw[:, :, None] * g[:, None, :]
            rows.append(np.repeat(self._pverts, 3, axis=1).ravel())
            cols.append(np.tile(mesh.tris + comp * nf, (1, 3)).ravel())
            vals.append(blk.ravel())
        return sparse.csr_matrix((np.concatenate(vals),
                                  (np.concatenate(rows), np.concatenate(cols))),
                                 shape=(mesh.n_coarse, 2 * nf))


def assemble_stokes(mesh, shell_ops):
    return StokesOperators(mesh, shell_ops)


def discrete_divergence(ops, points, u):
    """Discrete divergence of ``u`` per coarse node (``B u`` over the lumped
    pressure mass)."""
    B = ops.divergence_matrix(points)
    flat = np.concatenate([u[:, 0], u[:, 1]])
    # lumped coarse mass: int q_k over the current fine triangles
    area = np.abs(p1_gradients(points, ops.mesh.tris)[0])
    mass = np.bincount(ops._pverts.ravel(),
                       weights=(ops._pweights * area[:, None]).ravel(),
                       minlength=ops.mesh.n_coarse)
    return (B @ flat) / mass


def step1_stokes(state, mesh, shell_ops, geom, p_trace, bd, beta, dt, fp, t_new,
                 operators=None, zeta_old=None):
    """One backward-Euler step of the coupled Stokes / wall-viscosity problem.

    Parameters
    ----------
    state : FluidState
        Velocity ``u^n`` (and unused ``p^n``).
    mesh : MovingMesh
        Domain frozen at ``t^n`` (reference mesh plus current positions).
    shell_ops : ShellOperators
    geom : InterfaceGeometry
        Jacobian and normal at ``t^n`` for the explicit pressure load.
    p_trace : ndarray
        Pressure on the wall nodes from the previous step.
    bd : BoundaryData
        Inlet/outlet normal stress, evaluated at ``t_new``.
    beta : float
        Fraction of the pressure moved to the elastodynamic step.
    zeta_old : ndarray, optional
        Wall velocity ``zeta^n`` (both components stacked); defaults to the
        interface trace of ``state.u``.

    Returns
    -------
    FluidState, ndarray
        New fluid state and the interface velocity ``(zeta_z, zeta_r)``
        stacked as one vector of length ``2 n_wall``.
    """
    from . import FluidState

    ops = operators if operators is not None else StokesOperators(mesh.reference, shell_ops)
    points = mesh.points
    mesh = ops.mesh
    nf = mesh.n_nodes
    if zeta_old is None:
        zeta_old = np.concatenate([state.u[mesh.interface_nodes, 0],
                                   state.u[mesh.interface_nodes, 1]])
    A = ops.matrix(points, fp.rho_f, fp.mu, dt)
    b = ops.load(points, state.u, zeta_old, fp.rho_f, dt, bd.p_in(t_new),
                 bd.p_out(t_new), p_trace, geom, beta)
    try:
        lu = spla.splu(A, permc_spec="COLAMD", diag_pivot_thresh=0.01,
                       options={"SymmetricMode": True})
        x_red = lu.solve(b[ops.free_dofs])
    except RuntimeError as exc:
        raise SolverError(f"saddle-point factorization failed ({A.shape[0]} unknowns, "
                          f"{A.nnz} nonzeros): {exc}") from exc
    if not np.all(np.isfinite(x_red)):
        raise SolverError("saddle-point solve produced non-finite values")
    x = np.zeros(ops.n_dof)
    x[ops.free_dofs] = x_red
    u = np.column_stack([x[:nf], x[nf:2 * nf]])
    p = x[2 * nf:].copy()
    zeta = np.concatenate([u[mesh.interface_nodes, 0], u[mesh.interface_nodes, 1]])
    return FluidState(u, p), zeta

