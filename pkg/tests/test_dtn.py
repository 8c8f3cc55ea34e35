import math

import numpy as np
import pytest

import steklov as sk
from steklov.dtn import boundary_mass_vector, build_dtn
from steklov.meshes import assemble_mesh

TWO_PI = 2 * math.pi


def equilateral_mesh():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
    return assemble_mesh(pts, [[0, 1, 2]], [], np.ones(3))


class TestStiffness:
    def test_equilateral_weights(self):
        K = sk.assemble_stiffness(equilateral_mesh()).toarray()
        off = -0.5 / math.tan(math.pi / 3)
        expect = np.full((3, 3), off)
        np.fill_diagonal(expect, -2 * off)
        assert np.allclose(K, expect, atol=1e-14)
        assert np.allclose(K.sum(axis=1), 0.0, atol=1e-14)

    def test_constants_in_kernel(self, disk_mesh):
        K = sk.assemble_stiffness(disk_mesh)
        ones = np.ones(disk_mesh.n_logical)
        assert np.max(np.abs(K @ ones)) < 1e-12

    def test_conformal_factor_never_enters(self, coarse_disk_mesh):
        K1 = sk.assemble_stiffness(coarse_disk_mesh)
        scaled = sk.with_conformal_factor(
            coarse_disk_mesh, 3.7 * coarse_disk_mesh.conformal_factor)
        K2 = sk.assemble_stiffness(scaled)
        assert (K1 - K2).nnz == 0


class TestBoundaryMass:
    def test_trace_equals_boundary_length(self, disk_mesh):
        mass = boundary_mass_vector(disk_mesh)
        assert mass.sum() == pytest.approx(sk.boundary_length(disk_mesh), rel=1e-12)

    def test_zero_on_interior_vertices(self, coarse_disk_mesh):
        mass = boundary_mass_vector(coarse_disk_mesh)
        boundary = set().union(*coarse_disk_mesh.boundary_loops)
        interior = [i for i in range(coarse_disk_mesh.n_logical) if i not in boundary]
        assert np.all(mass[interior] == 0.0)
        assert np.all(mass[sorted(boundary)] > 0.0)

    def test_linearity_in_density(self, coarse_disk_mesh):
        m1 = boundary_mass_vector(coarse_disk_mesh)
        m2 = boundary_mass_vector(coarse_disk_mesh,
                                  2.0 * coarse_disk_mesh.conformal_factor)
        assert np.allclose(m2, 2.0 * m1, rtol=1e-14)


class TestSchurDtn:
    def test_annihilates_constants(self, cylinder_mesh):
        op = build_dtn(cylinder_mesh)
        n = len(op.boundary_index)
        scale = np.max(np.abs(op.matrix))
        assert np.max(np.abs(op.matrix @ np.ones(n))) <= 1e-10 * scale * n

    def test_symmetric_psd(self, coarse_disk_mesh):
        op = build_dtn(coarse_disk_mesh)
        assert np.array_equal(op.matrix, op.matrix.T)
        eigs = np.linalg.eigvalsh(op.matrix)
        assert eigs[0] >= -1e-9 * np.max(np.abs(op.matrix))

    def test_lowest_disk_eigenvalue_near_zero(self, coarse_disk_mesh):
        spec = sk.steklov_spectrum(coarse_disk_mesh, 1)
        assert spec.eigenvalues[0] == pytest.approx(0.0, abs=1e-10)


class TestSteklovSpectrum:
    def test_disk_reference_values(self, disk_mesh):
        spec = sk.steklov_spectrum(disk_mesh, 7)
        expect = np.array([0, 1, 1, 2, 2, 3, 3], dtype=float)
        scale = np.maximum(expect, 1e-6)
        assert np.max(np.abs(spec.eigenvalues - expect) / scale) < 5e-3

    @pytest.mark.parametrize("T", [0.5, 1.0, 2.0, 5.0])
    def test_cylinder_matches_closed_form(self, T):
        mesh = sk.build_cylinder_mesh(T, 1.0, 0.05)
        fem = sk.steklov_spectrum(mesh, 10)
        exact = sk.cylinder_spectrum(T, count=10)
        scale = np.maximum(exact.eigenvalues, 1e-6)
        assert np.max(np.abs(fem.eigenvalues - exact.eigenvalues) / scale) < 5e-3

    def test_mobius_matches_closed_form(self, mobius_mesh):
        fem = sk.steklov_spectrum(mobius_mesh, 6)
        exact = sk.mobius_spectrum(1.0, count=6)
        scale = np.maximum(exact.eigenvalues, 1e-6)
        assert np.max(np.abs(fem.eigenvalues - exact.eigenvalues) / scale) < 5e-3

    def test_count_bounds(self, coarse_disk_mesh):
        n_b = len(build_dtn(coarse_disk_mesh).boundary_index)
        with pytest.raises(sk.InvalidParameterError):
            sk.steklov_spectrum(coarse_disk_mesh, n_b + 1)
        with pytest.raises(sk.InvalidParameterError):
            sk.steklov_spectrum(coarse_disk_mesh, 0)

    def test_convergence_under_refinement(self):
        expect = np.array([0, 1, 1, 2, 2, 3, 3, 4], dtype=float)
        errors = []
        for res in (0.1, 0.05):
            spec = sk.steklov_spectrum(sk.build_disk_mesh(res), 8)
            scale = np.maximum(expect, 1.0)
            errors.append(np.sum(np.abs(spec.eigenvalues - expect) / scale))
        # empirical rate at least first order; quadratic in practice
        assert errors[1] <= 0.6 * errors[0]

    def test_homothety_covariance(self, coarse_disk_mesh):
        op = build_dtn(coarse_disk_mesh)
        base = op.spectrum(6)
        c = 2.5
        scaled = op.spectrum(6, conformal=c * coarse_disk_mesh.conformal_factor)
        assert np.allclose(scaled.eigenvalues, base.eigenvalues / c, rtol=1e-12)
        assert scaled.boundary_length == pytest.approx(c * base.boundary_length)
        assert np.allclose(scaled.normalized, base.normalized, rtol=1e-10)

    def test_interior_conformal_change_is_invisible(self, coarse_disk_mesh):
        op = build_dtn(coarse_disk_mesh)
        base = op.spectrum(6)
        lam = coarse_disk_mesh.conformal_factor.copy()
        boundary = set().union(*coarse_disk_mesh.boundary_loops)
        for i in range(coarse_disk_mesh.n_logical):
            if i not in boundary:
                lam[i] = 9.0
        changed = op.spectrum(6, conformal=lam)
        assert np.array_equal(base.eigenvalues, changed.eigenvalues)
        assert base.boundary_length == changed.boundary_length


class TestRayleigh:
    def test_first_eigenvector_reproduces_sigma1(self, coarse_disk_mesh):
        spec = sk.steklov_spectrum(coarse_disk_mesh, 3, want_vectors=True)
        q = sk.rayleigh_quotient(coarse_disk_mesh, spec.eigenvectors[:, 1])
        assert q == pytest.approx(spec.eigenvalues[1], rel=1e-9)

    def test_constant_trace(self, coarse_disk_mesh):
        op = build_dtn(coarse_disk_mesh)
        q = sk.rayleigh_quotient(coarse_disk_mesh, np.ones(len(op.boundary_index)))
        assert abs(q) < 1e-10

    def test_cos_theta_trace(self, disk_mesh):
        op = build_dtn(disk_mesh)
        reps = _chart_of(disk_mesh, op.boundary_index)
        angles = np.arctan2(disk_mesh.vertices[reps, 1], disk_mesh.vertices[reps, 0])
        q = sk.rayleigh_quotient(disk_mesh, np.cos(angles))
        assert q == pytest.approx(1.0, rel=5e-3)

    def test_minmax_upper_bound_after_deflation(self, coarse_disk_mesh):
        # traces M-orthogonal to the first k eigenvectors have quotient >= sigma_k
        k = 3
        spec = sk.steklov_spectrum(coarse_disk_mesh, k + 1, want_vectors=True)
        op = build_dtn(coarse_disk_mesh)
        mass = boundary_mass_vector(coarse_disk_mesh)[op.boundary_index]
        rng = np.random.default_rng(12)
        for _ in range(5):
            f = rng.standard_normal(len(op.boundary_index))
            for j in range(k):
                u = spec.eigenvectors[:, j]
                f -= (f @ (mass * u)) / (u @ (mass * u)) * u
            assert sk.rayleigh_quotient(coarse_disk_mesh, f) >= \
                spec.eigenvalues[k] * (1 - 1e-9)

    def test_zero_trace_rejected(self, coarse_disk_mesh):
        op = build_dtn(coarse_disk_mesh)
        with pytest.raises(sk.InvalidParameterError):
            sk.rayleigh_quotient(coarse_disk_mesh, np.zeros(len(op.boundary_index)))


class TestGrounding:
    def test_closed_component_is_grounded(self, coarse_disk_mesh):
        # a disk plus a boundaryless pillow: two triangles glued on all edges
        disk = coarse_disk_mesh
        pillow_pts = np.array([[3.0, 0.0], [4.0, 0.0], [3.5, 1.0],
                               [3.0, 0.0], [4.0, 0.0], [3.5, 1.0]]) + 0.0
        pillow_pts[3:] += [2.0, 0.0]
        n0 = disk.n_chart
        pts = np.vstack([disk.vertices, pillow_pts])
        tris = np.vstack([disk.triangles, [[n0, n0 + 1, n0 + 2],
                                           [n0 + 3, n0 + 4, n0 + 5]]])
        idents = np.array([[n0, n0 + 3], [n0 + 1, n0 + 4], [n0 + 2, n0 + 5]])
        union = assemble_mesh(pts, tris, idents, np.ones(len(pts)))
        spec = sk.steklov_spectrum(union, 6)
        reference = sk.steklov_spectrum(disk, 6)
        assert np.allclose(spec.eigenvalues, reference.eigenvalues, atol=1e-12)


class TestEigenvectorExport:
    def test_loop_ordered_json(self, tmp_path, coarse_disk_mesh):
        spec = sk.steklov_spectrum(coarse_disk_mesh, 3, want_vectors=True)
        path = tmp_path / "traces.json"
        sk.export_eigenvectors(spec, coarse_disk_mesh, path)
        import json
        payload = json.loads(path.read_text())
        n_b = sum(len(loop) for loop in coarse_disk_mesh.boundary_loops)
        assert len(payload) == 3
        assert all(len(tr) == n_b for tr in payload)
        # the constant mode has a constant trace
        first = np.asarray(payload[0])
        assert np.allclose(first, first[0])

    def test_requires_vectors(self, tmp_path, coarse_disk_mesh):
        spec = sk.steklov_spectrum(coarse_disk_mesh, 3)
        with pytest.raises(sk.InvalidParameterError):
            sk.export_eigenvectors(spec, coarse_disk_mesh, tmp_path / "x.json")


def _chart_of(mesh, logical_ids):
    rep = np.zeros(mesh.n_logical, dtype=np.int64)
    rep[mesh.logical[::-1]] = np.arange(mesh.n_chart - 1, -1, -1)
    return rep[logical_ids]
