"""Stokes step, advection step and the rigid-wall Poiseuille oracle."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from koiterfsi.ale import MovingMesh, interface_geometry
from koiterfsi.driver import SimulationConfig, advance_step, initial_state, scheme_context
from koiterfsi.errors import ParameterError, StepError
from koiterfsi.fluid import BoundaryData, FluidParams, FluidState, step1_stokes, step2_advect
from koiterfsi.fluid.advection import PointLocator
from koiterfsi.fluid.boundary import Waveform, inlet_pressure_pulse
from koiterfsi.fluid.mesh import build_mesh
from koiterfsi.fluid.stokes import discrete_divergence, mass_matrix
from koiterfsi.shell import FormaggiaParams, ShellState, WallParams

WALL = WallParams(E=0.75e6, sigma=0.5, C_v=30.0, D_v=15.0, rho_s=1.1, h=0.1, R=0.5)


def small_config(**kw):
    base = dict(wall=WALL, fluid=FluidParams(1.0, 0.035), L=6.0, dt=1e-4, t_final=1e-3,
                n_z=11, n_r=5, boundary=BoundaryData(kind="pulse", p_max=2e4, t_max=0.005))
    base.update(kw)
    return SimulationConfig(**base)


class TestParams:
    def test_fluid_params(self):
        with pytest.raises(ParameterError):
            FluidParams(rho_f=0.0, mu=0.035)
        with pytest.raises(ParameterError):
            FluidParams(rho_f=1.0, mu=-1.0)

    def test_pulse(self):
        assert inlet_pressure_pulse(0.0, 2e4, 0.005) == pytest.approx(0.0)
        assert inlet_pressure_pulse(0.0025, 2e4, 0.005) == pytest.approx(2e4)
        assert inlet_pressure_pulse(0.006, 2e4, 0.005) == 0.0

    def test_waveform_periodic(self):
        w = Waveform((0.0, 0.5, 1.0), (0.0, 10.0, 0.0))
        assert w(0.25) == pytest.approx(5.0)
        assert w(1.25) == pytest.approx(5.0)
        assert w.period == 1.0
        assert w.mean == pytest.approx(5.0)

    def test_boundary_kinds(self):
        with pytest.raises(ParameterError):
            BoundaryData(kind="sine")
        b = BoundaryData(kind="constant", p_in_value=3.0, p_out_value=1.0)
        assert (b.p_in(7.0), b.p_out(7.0)) == (3.0, 1.0)
        w = Waveform((0.0, 0.5, 1.0), (0.0, 10.0, 0.0))
        b = BoundaryData(kind="waveform", waveform=w, delay=0.25, mean_drop=1.0)
        assert b.p_out(0.5) == pytest.approx(w(0.25) - 1.0)


class TestStokesStep:
    def test_divergence_residual(self):
        cfg = small_config()
        ctx = scheme_context(cfg)
        s = initial_state(cfg)
        for _ in range(5):
            s = advance_step(s, cfg, ctx)
        geom = interface_geometry(s.shell, ctx.mesh.wall_grid)
        fl, _ = step1_stokes(s.fluid, s.mesh, ctx.shell_ops, geom, s.p_trace, cfg.boundary,
                             cfg.beta, cfg.dt, cfg.fluid, s.t + cfg.dt, operators=ctx.stokes,
                             zeta_old=s.shell.zeta)
        div = discrete_divergence(ctx.stokes, s.mesh.points, fl.u)
        scale = np.abs(fl.u).max() / (cfg.L / (ctx.mesh.nz_fine - 1))
        assert np.abs(div).max() <= 1e-8 * scale

    def test_rest_stays_at_rest(self):
        cfg = small_config(boundary=BoundaryData())
        ctx = scheme_context(cfg)
        s = advance_step(initial_state(cfg), cfg, ctx)
        assert np.abs(s.fluid.u).max() == 0.0
        assert np.abs(s.shell.eta).max() == 0.0

    def test_symmetric_saddle_matrix(self):
        cfg = small_config()
        ctx = scheme_context(cfg)
        A = ctx.stokes.matrix(ctx.mesh.points, 1.0, 0.035, 1e-4)
        assert abs(A - A.T).max() <= 1e-10 * abs(A).max()


class TestAdvection:
    def setup_method(self):
        self.mesh = build_mesh(6, 4, 2.0, 1.0)
        self.mm = MovingMesh.at_rest(self.mesh)

    def test_constant_preserved(self):
        u = np.tile([3.0, 0.0], (self.mesh.n_nodes, 1))
        w = np.zeros_like(u)
        w[:, 1] = 0.4  # transport velocity (3, -0.4)
        out = step2_advect(FluidState(u, np.zeros(self.mesh.n_coarse)), w, self.mm, 0.01)
        np.testing.assert_allclose(out.u, u, atol=1e-13)

    def test_linear_field_exact_inside(self):
        pts = self.mesh.points
        c = np.array([0.5, 0.2])
        u = np.column_stack([1.0 + 0.1 * pts[:, 0] + 0.2 * pts[:, 1], 0.3 * pts[:, 0]])
        w = u - c  # constant transport velocity c
        dt = 0.05
        out = step2_advect(FluidState(u, np.zeros(self.mesh.n_coarse)), w, self.mm, dt)
        back = pts - dt * c
        inside = ((back[:, 0] > 1e-9) & (back[:, 1] > 1e-9) & (back[:, 1] < 1 - 1e-9)
                  & (pts[:, 1] < 1 - 1e-9) & (pts[:, 1] > 1e-9))
        exact = np.column_stack([1.0 + 0.1 * back[:, 0] + 0.2 * back[:, 1], 0.3 * back[:, 0]])
        np.testing.assert_allclose(out.u[inside], exact[inside], atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_max_principle(self, seed):
        rng = np.random.default_rng(seed)
        n = self.mesh.n_nodes
        u = rng.uniform(-1.0, 1.0, (n, 2))
        w = rng.uniform(-0.5, 0.5, (n, 2))
        out = step2_advect(FluidState(u, np.zeros(self.mesh.n_coarse)), w, self.mm, 0.05)
        for k in range(2):
            assert out.u[:, k].min() >= min(u[:, k].min(), 0.0) - 1e-12
            assert out.u[:, k].max() <= max(u[:, k].max(), 0.0) + 1e-12

    def test_interface_and_axis(self):
        rng = np.random.default_rng(1)
        u = rng.uniform(-1.0, 1.0, (self.mesh.n_nodes, 2))
        out = step2_advect(FluidState(u, np.zeros(self.mesh.n_coarse)), np.zeros_like(u),
                           self.mm, 0.05)
        iface = self.mesh.interface_nodes
        np.testing.assert_array_equal(out.u[iface], u[iface])
        assert np.all(out.u[self.mesh.axis_nodes, 1] == 0.0)

    def test_bad_dt(self):
        u = np.ones((self.mesh.n_nodes, 2))
        with pytest.raises(StepError):
            step2_advect(FluidState(u, np.zeros(self.mesh.n_coarse)), 0 * u, self.mm, 0.0)

    def test_substep_cap(self):
        u = np.full((self.mesh.n_nodes, 2), 1e6)
        with pytest.raises(StepError):
            step2_advect(FluidState(u, np.zeros(self.mesh.n_coarse)), 0 * u, self.mm, 1.0)

    def test_locator_barycentric(self):
        loc = PointLocator(self.mesh.points, self.mesh.tris)
        f = 2.0 - self.mesh.points[:, 0] + 3.0 * self.mesh.points[:, 1]
        x = np.array([[0.31, 0.77], [1.5, 0.1], [1.99, 0.99]])
        np.testing.assert_allclose(loc.interpolate(f, x), 2.0 - x[:, 0] + 3.0 * x[:, 1])


class TestMassMatrix:
    def test_integrates_constants_and_linears(self):
        mesh = build_mesh(5, 3, 2.0, 1.0)
        M = mass_matrix(mesh.points, mesh.tris)
        one = np.ones(mesh.n_nodes)
        assert one @ M @ one == pytest.approx(2.0)
        assert one @ M @ mesh.points[:, 0] == pytest.approx(2.0)  # int z = L^2 R / 2


class TestPoiseuille:
    def test_rigid_wall_profile(self):
        # heavy stiff wall: steady plane Poiseuille flow in the half channel
        wall = WallParams(E=0.75e9, sigma=0.5, C_v=0.0, D_v=0.0, rho_s=1.1e6, h=0.1, R=0.5)
        dp, L, mu = 100.0, 4.0, 1.0
        cfg = SimulationConfig(wall=wall, fluid=FluidParams(1.0, mu), L=L, dt=0.02,
                               t_final=1.6, n_z=17, n_r=6, bc_kind="clamped",
                               boundary=BoundaryData(kind="constant", p_in_value=dp),
                               model="formaggia",
                               formaggia=FormaggiaParams(1.0, 2.5e8, 0.0))
        ctx = scheme_context(cfg)
        s = initial_state(cfg)
        for _ in range(cfg.n_steps):
            s = advance_step(s, cfg, ctx)
        mesh = ctx.mesh
        col = mesh.column(mesh.nz_fine // 2)
        r = s.mesh.points[col, 1]
        exact = dp / L / (2.0 * mu) * (0.5 ** 2 - r ** 2)
        err = np.abs(s.fluid.u[col, 0] - exact).max() / exact.max()
        assert err < 0.02
        assert np.abs(s.fluid.u[col, 1]).max() < 0.02 * exact.max()
