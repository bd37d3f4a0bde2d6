"""Linearly viscoelastic cylindrical Koiter shell (axially symmetric).

The wall carries a longitudinal displacement ``eta_z`` and a radial
displacement ``eta_r`` on a 1D grid in the reference coordinate z.  The
differential operators are discretised with continuous P1 elements; all
1D integrals are exact for the polynomial degrees involved.

Unknowns are ordered ``[eta_z(0..n-1), eta_r(0..n-1)]`` in every block
matrix of this module.
"""
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .errors import MeshError, ParameterError, StepError

CLAMPED = "clamped"
ABSORBING = "absorbing"
BC_KINDS = (CLAMPED, ABSORBING)


@dataclass(frozen=True)
class WallParams:
    """Material and geometric wall parameters, CGS units."""

    E: float
    sigma: float
    C_v: float
    D_v: float
    rho_s: float
    h: float
    R: float

    def __post_init__(self):
        for name in ("E", "rho_s", "h", "R"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be positive, got {value}")
        if not (0.0 <= self.sigma < 1.0):
            raise ParameterError(f"sigma must lie in [0, 1), got {self.sigma}")
        for name in ("C_v", "D_v"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ParameterError(f"{name} must be non-negative, got {value}")
        if self.h / self.R >= 1.0:
            raise ParameterError("thin-shell assumption violated: h/R >= 1")

    @property
    def shear_modulus(self):
        return self.E / (2.0 * (1.0 + self.sigma))


@dataclass(frozen=True)
class FormaggiaParams:
    """Reduced string model: Timoshenko factor, shear modulus, viscosity."""

    k: float
    G: float
    gamma: float

    def __post_init__(self):
        if not self.k > 0:
            raise ParameterError(f"k must be positive, got {self.k}")
        if not self.G > 0:
            raise ParameterError(f"G must be positive, got {self.G}")
        if not self.gamma >= 0:
            raise ParameterError(f"gamma must be non-negative, got {self.gamma}")

    @classmethod
    def from_wall(cls, wall, k=1.0, gamma=0.0):
        return cls(k=k, G=wall.shear_modulus, gamma=gamma)


@dataclass(frozen=True)
class KoiterCoefficients:
    """Elastic (C0..C4) and viscous (D0..D4) shell coefficients."""

    C0: float
    C1: float
    C2: float
    C3: float
    C4: float
    D0: float
    D1: float
    D2: float
    D3: float
    D4: float

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def assembled(self):
        """Coefficients actually discretised: the 4th/5th order terms dropped."""
        return replace(self, C4=0.0, D4=0.0)

    def with_C0(self, C0):
        return replace(self, C0=float(C0))


def koiter_coefficients(w):
    """Closed-form Koiter shell coefficients for the wall ``w``."""
    if not isinstance(w, WallParams):
        raise ParameterError("koiter_coefficients expects WallParams")
    E, s, h, R = w.E, w.sigma, w.h, w.R
    plate = E / (1.0 - s * s)
    thick = 1.0 + h * h / (12.0 * R * R)
    return KoiterCoefficients(
        C0=h * plate / R**2 * thick,
        C1=h**3 / 6.0 * plate * s / R**2,
        C2=h / R * plate * s,
        C3=h * plate,
        C4=h**3 / 12.0 * plate,
        D0=h / R**2 * w.C_v * thick,
        D1=h**3 / 6.0 * w.D_v / R**2,
        D2=h * w.D_v / R,
        D3=h * w.C_v,
        D4=h**3 / 12.0 * w.C_v,
    )


def formaggia_coefficients(f, w):
    """Koiter coefficients reproducing the radial string benchmark model."""
    return KoiterCoefficients(
        C0=w.E * w.h / (w.R**2 * (1.0 - w.sigma**2)),
        C1=f.k * f.G * w.h,
        C2=0.0,
        C3=0.0,
        C4=0.0,
        D0=0.0,
        D1=f.gamma,
        D2=0.0,
        D3=0.0,
        D4=0.0,
    )


@dataclass
class ShellState:
    """Nodal wall displacement and velocity on the wall grid."""

    eta_z: np.ndarray
    eta_r: np.ndarray
    zeta_z: np.ndarray
    zeta_r: np.ndarray

    @classmethod
    def at_rest(cls, n):
        return cls(*(np.zeros(n) for _ in range(4)))

    @property
    def n(self):
        return len(self.eta_z)

    @property
    def eta(self):
        return np.concatenate([self.eta_z, self.eta_r])

    @property
    def zeta(self):
        return np.concatenate([self.zeta_z, self.zeta_r])

    @classmethod
    def from_vectors(cls, eta, zeta):
        n = len(eta) // 2
        return cls(eta[:n].copy(), eta[n:].copy(), zeta[:n].copy(), zeta[n:].copy())

    def copy(self):
        return ShellState(self.eta_z.copy(), self.eta_r.copy(),
                          self.zeta_z.copy(), self.zeta_r.copy())


def p1_matrices(grid):
    """1D P1 mass, stiffness and first-derivative matrices.

    Returns ``(M, S, G)`` with ``M[i,j] = int phi_i phi_j``,
    ``S[i,j] = int phi_i' phi_j'`` and ``G[i,j] = int phi_i phi_j'``.
    """
    grid = np.asarray(grid, dtype=float)
    n = len(grid)
    if n < 2:
        raise MeshError("wall grid needs at least two nodes")
    he = np.diff(grid)
    if np.any(he <= 0):
        raise MeshError("wall grid must be strictly increasing")
    a = np.arange(n - 1)
    b = a + 1
    rows = np.concatenate([a, a, b, b])
    cols = np.concatenate([a, b, a, b])
    m = np.concatenate([he / 3, he / 6, he / 6, he / 3])
    s = np.concatenate([1 / he, -1 / he, -1 / he, 1 / he])
    # int phi_i phi_j' = +-1/2 on each element
    g = np.concatenate([-0.5 * np.ones_like(he), 0.5 * np.ones_like(he),
                        -0.5 * np.ones_like(he), 0.5 * np.ones_like(he)])
    shape = (n, n)
    M = sparse.csr_matrix((m, (rows, cols)), shape=shape)
    S = sparse.csr_matrix((s, (rows, cols)), shape=shape)
    G = sparse.csr_matrix((g, (rows, cols)), shape=shape)
    return M, S, G


def weighted_derivative_matrix(grid, weight):
    """``Gw[i,j] = int w phi_i phi_j'`` with ``w`` the P1 interpolant of nodal values."""
    grid = np.asarray(grid, dtype=float)
    weight = np.asarray(weight, dtype=float)
    n = len(grid)
    he = np.diff(grid)
    wa, wb = weight[:-1], weight[1:]
    # int_e w phi_a = he (2 wa + wb)/6, and phi' = -+1/he
    ia = (2 * wa + wb) / 6.0
    ib = (wa + 2 * wb) / 6.0
    a = np.arange(n - 1)
    b = a + 1
    rows = np.concatenate([a, a, b, b])
    cols = np.concatenate([a, b, a, b])
    vals = np.concatenate([-ia, ia, -ib, ib])
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _block(zz, zr, rz, rr):
    return sparse.bmat([[zz, zr], [rz, rr]], format="csr")


@dataclass
class ShellOperators:
    """Assembled shell matrices on the full wall grid.

    ``free`` marks the unknowns kept by the boundary conditions;
    ``absorbing_nodes`` lists the radial end nodes that carry the
    characteristic (absorbing) condition instead of the shell equation.
    """

    grid: np.ndarray
    coefficients: KoiterCoefficients
    rho_s_h: float
    M1: sparse.csr_matrix
    S1: sparse.csr_matrix
    G1: sparse.csr_matrix
    M_s: sparse.csr_matrix
    K_e: sparse.csr_matrix
    K_v: sparse.csr_matrix
    bc_kind: str
    free: np.ndarray
    radial_only: bool = False
    wave_speed: float = 0.0
    absorbing_nodes: tuple = field(default_factory=tuple)

    @property
    def n(self):
        return len(self.grid)

    def reduced(self, matrix):
        """Restrict a 2n x 2n operator to the free unknowns."""
        idx = np.flatnonzero(self.free)
        return matrix[idx][:, idx]


def assemble_shell_operators(c, wall_grid, bc_kind=CLAMPED, rho_s_h=1.0,
                             radial_only=False):
    """Assemble mass, elastic and viscous shell operators.

    Parameters
    ----------
    c : KoiterCoefficients
        Only terms up to second order in z are assembled (C4, D4 ignored).
    wall_grid : array_like
        Reference z coordinates of the wall nodes.
    bc_kind : {'clamped', 'absorbing'}
        Clamped removes both end nodes of both components.  Absorbing
        clamps eta_z at the ends and leaves the radial end nodes free; they
        are closed by the first-order characteristic condition in
        :func:`step3_solve`.
    rho_s_h : float
        Wall mass per unit reference area.
    radial_only : bool
        Freeze the longitudinal component entirely (radial string model).
    """
    grid = np.asarray(wall_grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 3:
        raise MeshError("wall grid must have at least 3 nodes")
    if bc_kind not in BC_KINDS:
        raise ParameterError(f"unknown boundary condition kind {bc_kind!r}")
    values = np.array(list(c.as_dict().values()), dtype=float)
    if not np.all(np.isfinite(values)) or not (math.isfinite(rho_s_h) and rho_s_h > 0):
        raise ParameterError("shell coefficients must be finite and rho_s*h > 0")

    M1, S1, G1 = p1_matrices(grid)
    n = len(grid)
    Z = sparse.csr_matrix((n, n))
    M_s = rho_s_h * _block(M1, Z, Z, M1)
    K_e = _block(c.C3 * S1, c.C2 * G1.T, c.C2 * G1, c.C0 * M1 + c.C1 * S1)
    K_v = _block(c.D3 * S1, c.D2 * G1.T, c.D2 * G1, c.D0 * M1 + c.D1 * S1)

    free = np.ones(2 * n, dtype=bool)
    free[[0, n - 1]] = False
    if bc_kind == CLAMPED:
        free[[n, 2 * n - 1]] = False
    if radial_only:
        free[:n] = False

    absorbing = ()
    speed = 0.0
    if bc_kind == ABSORBING:
        absorbing = (n, 2 * n - 1)
        speed = math.sqrt(c.C1 / rho_s_h)
        if speed <= 0:
            raise ParameterError("absorbing conditions need C1 > 0")

    return ShellOperators(grid=grid, coefficients=c, rho_s_h=float(rho_s_h),
                          M1=M1, S1=S1, G1=G1, M_s=M_s.tocsr(), K_e=K_e.tocsr(),
                          K_v=K_v.tocsr(), bc_kind=bc_kind, free=free,
                          radial_only=radial_only, wave_speed=speed,
                          absorbing_nodes=absorbing)


def pressure_coupling(ops, p_trace, beta):
    """Operator and load of the pressure acting through the implicit normal.

    The load ``beta p J n`` with ``J n = (-eta_r', 1 + eta_z')`` splits into a
    constant radial load and a term linear in the displacement gradient.
    Returns ``(K_p, f_p)`` such that the elastodynamic equation reads
    ``M eta'' + (K_e + K_p) eta = f_p``.
    """
    n = ops.n
    p_trace = np.asarray(p_trace, dtype=float)
    if beta == 0.0:
        return sparse.csr_matrix((2 * n, 2 * n)), np.zeros(2 * n)
    Gp = weighted_derivative_matrix(ops.grid, p_trace)
    Z = sparse.csr_matrix((n, n))
    K_p = beta * _block(Z, Gp, -Gp, Z)
    f_p = np.concatenate([np.zeros(n), beta * (ops.M1 @ p_trace)])
    return K_p.tocsr(), f_p


def step3_solve(state, p_trace, ops, beta, dt, geom=None):
    """Backward-Euler step of the elastodynamics sub-problem.

    Solves ``(M + dt^2 K(p)) eta^{n+1} = M eta^n + dt M zeta^n + dt^2 f(p)``
    and sets ``zeta^{n+1} = (eta^{n+1} - eta^n)/dt``.  ``state.zeta`` is the
    interface velocity handed over by the fluid steps.  The normal is taken
    implicitly, so ``geom`` is not needed; it is accepted for interface
    symmetry with the fluid step.
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise StepError(f"time step must be positive, got {dt}")
    n = ops.n
    eta = state.eta
    zeta = state.zeta
    K_p, f_p = pressure_coupling(ops, p_trace, beta)
    K = ops.K_e + K_p
    A = (ops.M_s + dt * dt * K).tolil()
    rhs = ops.M_s @ (eta + dt * zeta) + dt * dt * f_p

    if ops.absorbing_nodes:
        # first-order upwind closure of d(eta_r)/dt -+ c d(eta_r)/dz = 0
        c = ops.wave_speed
        g = ops.grid
        left, right = ops.absorbing_nodes
        scale = ops.rho_s_h * (g[1] - g[0])
        dz0 = g[1] - g[0]
        dz1 = g[-1] - g[-2]
        A[left, :] = 0.0
        A[left, left] = scale * (1.0 + c * dt / dz0)
        A[left, left + 1] = -scale * c * dt / dz0
        rhs[left] = scale * eta[left]
        A[right, :] = 0.0
        A[right, right] = scale * (1.0 + c * dt / dz1)
        A[right, right - 1] = -scale * c * dt / dz1
        rhs[right] = scale * eta[right]

    idx = np.flatnonzero(ops.free)
    A = A.tocsr()[idx][:, idx].tocsc()
    new_eta = np.zeros(2 * n)
    try:
        new_eta[idx] = spla.spsolve(A, rhs[idx])
    except RuntimeError as exc:  # singular factor
        raise StepError(f"elastodynamics solve failed: {exc}") from exc
    if not np.all(np.isfinite(new_eta)):
        raise StepError("elastodynamics solve produced non-finite values")
    new_zeta = (new_eta - eta) / dt
    return ShellState.from_vectors(new_eta, new_zeta)


@dataclass(frozen=True)
class ShellEnergy:
    kinetic: float
    membrane: float
    flexural: float
    membrane_viscous_rate: float
    flexural_viscous_rate: float

    @property
    def elastic(self):
        return self.membrane + self.flexural

    @property
    def viscous_rate(self):
        return self.membrane_viscous_rate + self.flexural_viscous_rate


def _split_quadratic(coeffs_mem, coeffs_flex, z, r, M1, S1, G1):
    """Membrane and flexural quadratic forms of a displacement-like pair."""
    a0, a2, a3 = coeffs_mem
    a1 = coeffs_flex
    mem = a0 * r @ (M1 @ r) + a3 * z @ (S1 @ z) + 2.0 * a2 * r @ (G1 @ z)
    flex = a1 * r @ (S1 @ r)
    return mem, flex


def shell_energy(state, w, wall_grid, coefficients=None):
    """Kinetic, elastic and viscous-rate terms of the shell energy balance.

    Elastic terms are ``0.5 * a(eta, eta)`` and the viscous rates are the
    full dissipation ``b(zeta, zeta)``.  The membrane part collects the
    C0, C2 and C3 contributions (including the small h^2/12R^2 bending
    correction carried by C0); the flexural part is the C1 term.  C4/D4
    terms are not part of the discrete model and are left out.
    """
    c = coefficients if coefficients is not None else koiter_coefficients(w)
    M1, S1, G1 = p1_matrices(wall_grid)
    kinetic = 0.5 * w.rho_s * w.h * (state.zeta_z @ (M1 @ state.zeta_z)
                                     + state.zeta_r @ (M1 @ state.zeta_r))
    mem, flex = _split_quadratic((c.C0, c.C2, c.C3), c.C1,
                                 state.eta_z, state.eta_r, M1, S1, G1)
    vmem, vflex = _split_quadratic((c.D0, c.D2, c.D3), c.D1,
                                   state.zeta_z, state.zeta_r, M1, S1, G1)
    return ShellEnergy(kinetic=float(kinetic), membrane=float(0.5 * mem),
                       flexural=float(0.5 * flex),
                       membrane_viscous_rate=float(vmem),
                       flexural_viscous_rate=float(vflex))
