"""Nested meshes, harmonic extension, interface geometry and mesh motion."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from koiterfsi.ale import (HarmonicExtender, MovingMesh, domain_velocity,
                           harmonic_extension, interface_geometry, laplacian)
from koiterfsi.errors import MeshError, ParameterError
from koiterfsi.fluid.mesh import (AXIS, INLET, INTERFACE, OUTLET, build_mesh, check_mesh,
                                  signed_areas)


@pytest.fixture(scope="module")
def mesh():
    return build_mesh(7, 4, 6.0, 0.5)


class TestMesh:
    def test_counts(self, mesh):
        assert mesh.n_coarse == 7 * 4
        assert mesh.n_nodes == 13 * 7
        assert len(mesh.coarse_tris) == 2 * 6 * 3
        assert len(mesh.tris) == 4 * len(mesh.coarse_tris)
        assert len(mesh.interface_nodes) == 13

    def test_areas_sum(self, mesh):
        assert signed_areas(mesh.points, mesh.tris).sum() == pytest.approx(3.0)
        assert signed_areas(mesh.coarse_points, mesh.coarse_tris).sum() == pytest.approx(3.0)
        assert np.all(signed_areas(mesh.points, mesh.tris) > 0)

    def test_fine_refines_coarse(self, mesh):
        # every fine triangle has a quarter of its parent's area
        a = signed_areas(mesh.points, mesh.tris)
        ac = signed_areas(mesh.coarse_points, mesh.coarse_tris)
        np.testing.assert_allclose(a, ac[mesh.parent] / 4)

    def test_prolongation_reproduces_affine(self, mesh):
        f = lambda x: 2.0 + 0.3 * x[:, 0] - 1.7 * x[:, 1]
        np.testing.assert_allclose(mesh.prolongation @ f(mesh.coarse_points), f(mesh.points),
                                   atol=1e-12)

    def test_boundary_tags(self, mesh):
        pts = mesh.points
        assert np.all(pts[mesh.interface_nodes, 1] == 0.5)
        assert np.all(np.diff(pts[mesh.interface_nodes, 0]) > 0)
        assert np.all(pts[mesh.axis_nodes, 1] == 0.0)
        assert np.all(pts[mesh.inlet_nodes, 0] == 0.0)
        assert np.all(pts[mesh.outlet_nodes, 0] == 6.0)
        total = sum(np.linalg.norm(pts[e[:, 1]] - pts[e[:, 0]], axis=1).sum()
                    for e in mesh.boundary_edges.values())
        assert total == pytest.approx(2 * (6.0 + 0.5))
        assert set(mesh.boundary_edges) == {AXIS, INLET, OUTLET, INTERFACE}

    @pytest.mark.parametrize("args", [(1, 4, 1.0, 1.0), (4, 1, 1.0, 1.0), (4, 4, 0.0, 1.0),
                                      (4, 4, 1.0, -1.0)])
    def test_invalid(self, args):
        with pytest.raises(MeshError):
            build_mesh(*args)

    def test_check_mesh_detects_inversion(self, mesh):
        pts = mesh.points.copy()
        pts[mesh.interface_nodes[5], 1] = -1.0
        with pytest.raises(MeshError):
            check_mesh(pts, mesh.tris)


def dense_harmonic(mesh, g):
    """Dense solve of the Dirichlet problem; independent of the factorization."""
    K = laplacian(mesh.points, mesh.tris).toarray()
    bnd = np.zeros(mesh.n_nodes, dtype=bool)
    for e in mesh.boundary_edges.values():
        bnd[e.ravel()] = True
    out = np.where(bnd, g, 0.0)
    ii = ~bnd
    out[ii] = np.linalg.solve(K[np.ix_(ii, ii)], -K[np.ix_(ii, bnd)] @ g[bnd])
    return out


class TestHarmonicExtension:
    def test_matches_dense_oracle(self, mesh):
        z = mesh.wall_grid
        wall = np.column_stack([0.01 * np.sin(z), 0.02 * np.sin(np.pi * z / 6.0)])
        d = harmonic_extension(wall, mesh)
        g = np.zeros(mesh.n_nodes)
        g[mesh.interface_nodes] = wall[:, 1]
        np.testing.assert_allclose(d[:, 1], dense_harmonic(mesh, g), atol=1e-13)

    def test_affine_exact(self, mesh):
        f = 0.1 + 0.02 * mesh.points[:, 0] - 0.3 * mesh.points[:, 1]
        ext = HarmonicExtender(mesh)
        np.testing.assert_allclose(ext.extend(f), f, atol=1e-13)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-0.05, 0.05), min_size=13, max_size=13))
    def test_max_principle(self, vals):
        mesh = build_mesh(7, 4, 6.0, 0.5)
        wall = np.column_stack([np.zeros(13), np.array(vals)])
        wall[[0, -1], 1] = 0.0
        d = harmonic_extension(wall, mesh, HarmonicExtender(mesh))[:, 1]
        # boundary data include the zeros on inlet/outlet/axis
        lo = min(0.0, wall[:, 1].min())
        hi = max(0.0, wall[:, 1].max())
        assert d.min() >= lo - 1e-12 and d.max() <= hi + 1e-12

    def test_zero_on_other_boundaries(self, mesh):
        wall = np.column_stack([np.zeros(13), np.full(13, 0.01)])
        d = harmonic_extension(wall, mesh)
        assert np.all(d[mesh.axis_nodes] == 0.0)
        assert np.all(d[mesh.inlet_nodes] == 0.0)

    def test_nonfinite(self, mesh):
        wall = np.full((13, 2), np.nan)
        with pytest.raises(MeshError):
            harmonic_extension(wall, mesh)


class TestInterfaceGeometry:
    def test_flat(self):
        z = np.linspace(0, 6, 13)
        g = interface_geometry((np.zeros(13), np.zeros(13)), z)
        np.testing.assert_allclose(g.J, 1.0)
        np.testing.assert_allclose(g.normal, np.tile([0.0, 1.0], (13, 1)))

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-1, 1), st.floats(-1, 1))
    def test_linear_exact(self, a, b, c0, c1):
        z = np.linspace(0, 6, 13)
        g = interface_geometry((c0 + a * z, c1 + b * z), z)
        J = np.hypot(1 + a, b)
        np.testing.assert_allclose(g.J, J, rtol=1e-12)
        np.testing.assert_allclose(g.normal, np.tile([-b / J, (1 + a) / J], (13, 1)),
                                   atol=1e-12)

    def test_unit_normal(self):
        z = np.linspace(0, 6, 25)
        g = interface_geometry((0.01 * np.sin(z), 0.05 * np.cos(z)), z)
        np.testing.assert_allclose(np.linalg.norm(g.normal, axis=1), 1.0)


class TestMovingMesh:
    def test_domain_velocity(self):
        assert np.allclose(domain_velocity(np.ones(3), np.zeros(3), 0.5), 2.0)
        with pytest.raises(ParameterError):
            domain_velocity(np.ones(3), np.zeros(3), 0.0)

    def test_moved(self, mesh):
        m = MovingMesh.at_rest(mesh)
        disp = harmonic_extension(np.column_stack([np.zeros(13), np.full(13, 0.01)]), mesh)
        m2 = m.moved(disp, 1e-3)
        np.testing.assert_allclose(m2.w, disp / 1e-3)
        np.testing.assert_allclose(m2.points, mesh.points + disp)

    def test_tangled_raises(self, mesh):
        m = MovingMesh.at_rest(mesh)
        wall = np.column_stack([np.zeros(13), np.full(13, -2.0)])
        with pytest.raises(MeshError):
            m.moved(harmonic_extension(wall, mesh), 1e-3)
