"""Kinematically coupled beta-scheme: time loop and energy diagnostics.

One step on the frozen domain at ``t^n``:

1. Stokes solve with the wall viscosity and inertia on the interface and
   the explicit load ``-beta J p^n n`` (gives ``u^{n+1/3}``, ``p^{n+1}``);
2. ALE advection along ``u^{n+1/3} - w``, ``w`` being the harmonic
   extension of the interface velocity from step 1;
3. wall elastodynamics loaded by ``beta p^{n+1}`` with an implicit normal;
   the new wall velocity is copied into the interface fluid DOFs.

The mesh then moves to the harmonic extension of ``eta^{n+1}``.
"""
import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .ale import HarmonicExtender, MovingMesh, interface_geometry
from .errors import FSIError, ParameterError, StepError
from .fluid import BoundaryData, FluidParams, FluidState, build_mesh
from .fluid.advection import step2_advect
from .fluid.mesh import INLET, OUTLET
from .fluid.stokes import StokesOperators, mass_matrix, p1_gradients, step1_stokes
from .observables import ObservableSeries, flowrate, mean_pressure
from .shell import (BC_KINDS, FormaggiaParams, ShellState, WallParams,
                    assemble_shell_operators, formaggia_coefficients,
                    koiter_coefficients, shell_energy, step3_solve)

MODELS = ("koiter", "formaggia")


@dataclass(frozen=True)
class SimulationConfig:
    """Everything needed to reproduce one run.

    ``model`` selects the wall coefficients: the full Koiter set computed
    from ``wall`` or the reduced radial string set from ``formaggia``.
    ``radial_only`` freezes the longitudinal wall displacement.
    ``C0_override`` replaces the computed C0 (to reproduce published tables).
    """

    wall: WallParams
    fluid: FluidParams
    L: float
    dt: float
    t_final: float
    beta: float = 1.0
    bc_kind: str = "clamped"
    n_z: int = 31
    n_r: int = 11
    boundary: BoundaryData = field(default_factory=BoundaryData)
    model: str = "koiter"
    formaggia: FormaggiaParams = None
    radial_only: bool = False
    C0_override: float = None
    benchmark: str = ""
    out_dir: str = ""
    snapshot_every: int = 0

    def __post_init__(self):
        if not (0.0 <= self.beta <= 1.0):
            raise ParameterError(f"beta must lie in [0, 1], got {self.beta}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if not (math.isfinite(self.t_final) and self.t_final >= 0):
            raise ParameterError(f"t_final must be non-negative, got {self.t_final}")
        if self.bc_kind not in BC_KINDS:
            raise ParameterError(f"bc_kind must be one of {BC_KINDS}, got {self.bc_kind!r}")
        if self.model not in MODELS:
            raise ParameterError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.model == "formaggia" and self.formaggia is None:
            raise ParameterError("model 'formaggia' needs FormaggiaParams")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ParameterError(f"L must be positive, got {self.L}")
        if self.n_z < 2 or self.n_r < 2:
            raise ParameterError(f"mesh needs at least 2x2 nodes, got {self.n_z}x{self.n_r}")
        if self.snapshot_every < 0:
            raise ParameterError("snapshot_every must be non-negative")

    @property
    def R(self):
        return self.wall.R

    @property
    def n_steps(self):
        n = self.t_final / self.dt
        steps = int(round(n))
        if abs(n - steps) > 1e-6 * max(1.0, n):
            raise ParameterError(f"t_final={self.t_final} is not a multiple of dt={self.dt}")
        return steps

    def coefficients(self):
        if self.model == "formaggia":
            c = formaggia_coefficients(self.formaggia, self.wall)
        else:
            c = koiter_coefficients(self.wall)
        if self.C0_override is not None:
            c = c.with_C0(self.C0_override)
        return c

    def with_(self, **changes):
        return replace(self, **changes)


class SchemeContext:
    """Time-independent operators of a configuration: meshes, wall matrices,
    the Stokes sparsity pattern and the ALE factorization."""

    def __init__(self, cfg):
        self.mesh = build_mesh(cfg.n_z, cfg.n_r, cfg.L, cfg.R)
        self.coefficients = cfg.coefficients()
        self.shell_ops = assemble_shell_operators(
            self.coefficients.assembled(), self.mesh.wall_grid, bc_kind=cfg.bc_kind,
            rho_s_h=cfg.wall.rho_s * cfg.wall.h, radial_only=cfg.radial_only)
        self.stokes = StokesOperators(self.mesh, self.shell_ops)
        self.extender = HarmonicExtender(self.mesh)
        P = self.mesh.prolongation.tocsr()
        self.wall_pressure = P[self.mesh.interface_nodes]
        self.mid = (len(self.mesh.interface_nodes) - 1) // 2


def _context_key(cfg):
    return (cfg.wall, cfg.fluid, cfg.L, cfg.n_z, cfg.n_r, cfg.bc_kind, cfg.model,
            cfg.formaggia, cfg.radial_only, cfg.C0_override)


@functools.lru_cache(maxsize=8)
def _cached_context(keyed):
    return SchemeContext(keyed.cfg)


def scheme_context(cfg):
    """Shared :class:`SchemeContext` for every configuration with the same
    mesh, wall model and boundary condition kind."""
    return _cached_context(_KeyedConfig(cfg))


class _KeyedConfig:
    """Hash wrapper so that configurations differing only in dt, beta or
    boundary data share one context."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.key = _context_key(cfg)

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        return self.key == other.key


@dataclass
class CoupledState:
    """Fluid, wall and mesh at time ``t``; ``p_trace`` is the wall pressure
    from the last Stokes step."""

    fluid: FluidState
    shell: ShellState
    mesh: MovingMesh
    t: float
    p_trace: np.ndarray
    step: int = 0

    def copy(self):
        return CoupledState(self.fluid.copy(), self.shell.copy(), self.mesh.copy(),
                            self.t, self.p_trace.copy(), self.step)


def initial_state(cfg, eta_r=None, eta_z=None):
    """Fluid at rest; optional initial wall displacement (values on the
    wall nodes; clamped end values are forced to zero)."""
    ctx = scheme_context(cfg)
    mesh = ctx.mesh
    n = len(mesh.interface_nodes)
    shell = ShellState.at_rest(n)
    if eta_r is not None or eta_z is not None:
        eta = np.zeros(2 * n)
        if eta_z is not None:
            eta[:n] = eta_z
        if eta_r is not None:
            eta[n:] = eta_r
        eta[~ctx.shell_ops.free & ~_absorbing_mask(ctx.shell_ops)] = 0.0
        shell = ShellState.from_vectors(eta, np.zeros(2 * n))
    moving = MovingMesh.at_rest(mesh)
    if eta_r is not None or eta_z is not None:
        disp = ctx.extender.extend_wall(np.column_stack([shell.eta_z, shell.eta_r]))
        moving = MovingMesh(mesh, disp, np.zeros_like(disp))
    return CoupledState(FluidState.zeros(mesh), shell, moving, 0.0, np.zeros(n))


def _absorbing_mask(ops):
    mask = np.zeros(2 * ops.n, dtype=bool)
    mask[list(ops.absorbing_nodes)] = True
    return mask


def advance_step(state, cfg, context=None):
    """One full step of the beta-scheme; returns a new state at ``t + dt``."""
    ctx = context if context is not None else scheme_context(cfg)
    mesh = ctx.mesh
    dt = cfg.dt
    t_new = state.t + dt
    iface = mesh.interface_nodes
    try:
        geom = interface_geometry(state.shell, mesh.wall_grid)
        zeta_old = state.shell.zeta
        fluid1, zeta1 = step1_stokes(state.fluid, state.mesh, ctx.shell_ops, geom,
                                     state.p_trace, cfg.boundary, cfg.beta, dt,
                                     cfg.fluid, t_new, operators=ctx.stokes,
                                     zeta_old=zeta_old)
        n = len(iface)
        w = ctx.extender.extend_wall(np.column_stack([zeta1[:n], zeta1[n:]]))
        fluid2 = step2_advect(fluid1, w, state.mesh, dt)
        p_trace = ctx.wall_pressure @ fluid1.p
        half = ShellState.from_vectors(state.shell.eta, zeta1)
        shell_new = step3_solve(half, p_trace, ctx.shell_ops, cfg.beta, dt)
        fluid2.u[iface, 0] = shell_new.zeta_z
        fluid2.u[iface, 1] = shell_new.zeta_r
        disp = ctx.extender.extend_wall(np.column_stack([shell_new.eta_z, shell_new.eta_r]))
        moving = state.mesh.moved(disp, dt)
    except StepError as exc:
        if exc.step is not None:
            raise
        raise StepError(str(exc), step=state.step + 1, time=t_new) from exc
    except FSIError as exc:
        raise StepError(f"{type(exc).__name__}: {exc}", step=state.step + 1,
                        time=t_new) from exc
    return CoupledState(fluid2, shell_new, moving, t_new, p_trace, state.step + 1)


def observe(state, cfg, series, context=None):
    ctx = context if context is not None else scheme_context(cfg)
    zmid = 0.5 * cfg.L
    k = ctx.mid
    series.append(t=state.t,
                  diameter=2.0 * (cfg.R + state.shell.eta_r[k]),
                  flowrate=flowrate(state.fluid, state.mesh, zmid),
                  mean_pressure=mean_pressure(state.fluid, state.mesh, zmid),
                  eta_z_mid=state.shell.eta_z[k],
                  eta_r_mid=state.shell.eta_r[k])


@dataclass
class SimulationResult:
    """Final state, midpoint observables and optional snapshots / energies."""

    config: SimulationConfig
    state: CoupledState
    series: ObservableSeries
    snapshots: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    max_axial_velocity: float = 0.0
    max_abs_eta_z: float = 0.0
    max_abs_eta_r: float = 0.0
    eta_z_range: tuple = (0.0, 0.0)


def run_simulation(cfg, initial=None, callback=None, record_energy=False,
                   keep_snapshots=False):
    """Integrate from ``initial`` (rest by default) up to ``cfg.t_final``.

    Parameters
    ----------
    callback : callable, optional
        Called as ``callback(state)`` after every step.
    record_energy : bool
        Store an :class:`EnergyBreakdown` for every state.
    keep_snapshots : bool
        Keep copies of the states every ``cfg.snapshot_every`` steps.
    """
    ctx = scheme_context(cfg)
    state = initial if initial is not None else initial_state(cfg)
    series = ObservableSeries()
    result = SimulationResult(cfg, state, series)
    n_steps = cfg.n_steps
    every = cfg.snapshot_every

    def record(s):
        observe(s, cfg, series, ctx)
        if record_energy:
            result.energies.append(energy_report(s, cfg, ctx))
        if keep_snapshots and every and s.step % every == 0:
            result.snapshots.append(s.copy())
        result.max_axial_velocity = max(result.max_axial_velocity,
                                        float(np.max(s.fluid.u[:, 0])))
        result.max_abs_eta_z = max(result.max_abs_eta_z, float(np.max(np.abs(s.shell.eta_z))))
        result.max_abs_eta_r = max(result.max_abs_eta_r, float(np.max(np.abs(s.shell.eta_r))))
        lo, hi = result.eta_z_range
        result.eta_z_range = (min(lo, float(np.min(s.shell.eta_z))),
                              max(hi, float(np.max(s.shell.eta_z))))

    record(state)
    for _ in range(n_steps):
        state = advance_step(state, cfg, ctx)
        record(state)
        if callback is not None:
            callback(state)
    result.state = state
    return result


@dataclass(frozen=True)
class EnergyBreakdown:
    """Terms of the discrete energy balance (erg and erg/s)."""

    fluid_kinetic: float
    shell_kinetic: float
    shell_membrane: float
    shell_flexural: float
    shell_viscous_rate: float
    fluid_viscous_rate: float
    boundary_work_rate: float

    @property
    def shell_elastic(self):
        return self.shell_membrane + self.shell_flexural

    @property
    def total(self):
        """Stored energy: fluid and shell kinetic plus shell elastic."""
        return self.fluid_kinetic + self.shell_kinetic + self.shell_elastic


def fluid_viscous_rate(points, tris, u, mu):
    """``2 mu ||D(u)||^2`` for the P1 velocity ``u`` (shape (n, 2))."""
    area, gz, gr = p1_gradients(points, tris)
    uz = u[tris, 0]
    ur = u[tris, 1]
    dzz = np.sum(gz * uz, axis=1)
    drr = np.sum(gr * ur, axis=1)
    dzr = 0.5 * (np.sum(gr * uz, axis=1) + np.sum(gz * ur, axis=1))
    return float(2.0 * mu * np.sum(np.abs(area) * (dzz ** 2 + drr ** 2 + 2.0 * dzr ** 2)))


def boundary_work_rate(points, mesh, u, p_in, p_out):
    """Power of the inlet/outlet normal stress, ``-sum p int u.n``."""
    total = 0.0
    for tag, p in ((INLET, p_in), (OUTLET, p_out)):
        e = mesh.boundary_edges[tag]
        d = points[e[:, 1]] - points[e[:, 0]]
        nl = np.column_stack([d[:, 1], -d[:, 0]])
        um = 0.5 * (u[e[:, 0]] + u[e[:, 1]])
        total += -p * float(np.sum(um * nl))
    return total


def energy_report(state, cfg, context=None):
    """Energy terms of ``state`` computed on its current mesh."""
    ctx = context if context is not None else scheme_context(cfg)
    mesh = ctx.mesh
    pts = state.mesh.points
    u = state.fluid.u
    M = mass_matrix(pts, mesh.tris)
    kinetic = 0.5 * cfg.fluid.rho_f * float(u[:, 0] @ (M @ u[:, 0]) + u[:, 1] @ (M @ u[:, 1]))
    se = shell_energy(state.shell, cfg.wall, mesh.wall_grid, ctx.coefficients.assembled())
    return EnergyBreakdown(
        fluid_kinetic=kinetic,
        shell_kinetic=se.kinetic,
        shell_membrane=se.membrane,
        shell_flexural=se.flexural,
        shell_viscous_rate=se.viscous_rate,
        fluid_viscous_rate=fluid_viscous_rate(pts, mesh.tris, u, cfg.fluid.mu),
        boundary_work_rate=boundary_work_rate(pts, mesh, u, cfg.boundary.p_in(state.t),
                                              cfg.boundary.p_out(state.t)),
    )


__all__ = ["CoupledState", "EnergyBreakdown", "SchemeContext", "SimulationConfig",
           "SimulationResult", "advance_step", "energy_report", "initial_state",
           "run_simulation", "scheme_context"]
