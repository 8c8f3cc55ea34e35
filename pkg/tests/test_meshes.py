import json
import math
from dataclasses import replace

import numpy as np
import pytest

import steklov as sk
from steklov.meshes import _fill_graded, _parameter_grid, _ArcRequest

TWO_PI = 2 * math.pi


class TestDisk:
    def test_boundary_length(self, disk_mesh):
        assert sk.boundary_length(disk_mesh) == pytest.approx(TWO_PI, rel=5e-3)
        assert len(disk_mesh.boundary_loops) == 1
        assert sk.euler_characteristic(disk_mesh) == 1

    def test_refinement_shrinks_polygon_gap(self, disk_mesh, coarse_disk_mesh):
        gap_fine = TWO_PI - sk.boundary_length(disk_mesh)
        gap_coarse = TWO_PI - sk.boundary_length(coarse_disk_mesh)
        assert 0 < gap_fine < gap_coarse
        # inscribed-polygon error is quadratic in the spacing
        assert gap_fine < 0.35 * gap_coarse

    def test_validate_clean(self, disk_mesh):
        assert sk.validate_mesh(disk_mesh) == []

    def test_unit_conformal_factor(self, disk_mesh):
        assert np.all(disk_mesh.conformal_factor == 1.0)

    def test_invalid_resolution(self):
        with pytest.raises(sk.InvalidParameterError):
            sk.build_disk_mesh(0.0)
        with pytest.raises(sk.InvalidParameterError):
            sk.build_disk_mesh(-0.1)
        with pytest.raises(sk.InvalidParameterError):
            sk.build_disk_mesh(1.5)


class TestCylinder:
    def test_two_loops_unit_length(self, cylinder_mesh):
        assert len(cylinder_mesh.boundary_loops) == 2
        lengths = _loop_lengths(cylinder_mesh)
        assert lengths == pytest.approx([TWO_PI, TWO_PI], rel=5e-3)
        assert sk.euler_characteristic(cylinder_mesh) == 0

    def test_weighted_boundary_length(self):
        t10 = sk.constant_T10().value
        mesh = sk.build_cylinder_mesh(2 * t10, 1.0 / t10, 0.05)
        assert sk.boundary_length(mesh) == pytest.approx(10.474780655975891, rel=5e-3)

    def test_invalid_height(self):
        with pytest.raises(sk.InvalidParameterError):
            sk.build_cylinder_mesh(0.0, 1.0, 0.1)
        with pytest.raises(sk.InvalidParameterError):
            sk.build_cylinder_mesh(1.0, -2.0, 0.1)

    def test_validate_clean(self, cylinder_mesh):
        assert sk.validate_mesh(cylinder_mesh) == []


class TestMobius:
    def test_single_loop(self, mobius_mesh):
        assert len(mobius_mesh.boundary_loops) == 1
        assert sk.boundary_length(mobius_mesh) == pytest.approx(TWO_PI, rel=5e-3)

    def test_euler_characteristic(self, mobius_mesh):
        assert sk.euler_characteristic(mobius_mesh) == 0

    def test_antipodal_seam_is_interior(self, mobius_mesh):
        # no boundary vertex sits on the t=0 circle
        boundary = set().union(*mobius_mesh.boundary_loops)
        t = mobius_mesh.vertices[:, 1]
        on_seam = set(int(v) for v in mobius_mesh.logical[t == 0.0])
        assert not (boundary & on_seam)

    def test_accepts_critical_height(self):
        t21 = sk.constant_Tk1(2).value
        mesh = sk.build_mobius_mesh(t21, 0.1)
        assert sk.validate_mesh(mesh) == []

    def test_invalid_height(self):
        with pytest.raises(sk.InvalidParameterError):
            sk.build_mobius_mesh(-1.0, 0.1)


class TestValidation:
    def test_deleted_triangle_reported(self, coarse_disk_mesh):
        broken = replace(coarse_disk_mesh, triangles=coarse_disk_mesh.triangles[:-1])
        report = sk.validate_mesh(broken)
        assert any("boundary" in line for line in report)

    def test_nonpositive_conformal_factor_reported(self, coarse_disk_mesh):
        lam = coarse_disk_mesh.conformal_factor.copy()
        lam[0] = 0.0
        broken = replace(coarse_disk_mesh, conformal_factor=lam)
        report = sk.validate_mesh(broken)
        assert any("positive" in line for line in report)

    def test_with_conformal_factor_checks_positivity(self, coarse_disk_mesh):
        with pytest.raises(sk.InvalidParameterError):
            sk.with_conformal_factor(coarse_disk_mesh,
                                     np.zeros(coarse_disk_mesh.n_logical))

    def test_assembly_rejects_unequal_identified_densities(self):
        from steklov.meshes import assemble_mesh
        from steklov.errors import AssemblyError
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 1.0],
                        [2.0, 0.0], [3.0, 0.0], [2.5, 1.0]])
        tris = [[0, 1, 2], [3, 4, 5]]
        lam = np.array([1.0, 1.0, 1.0, 1.0, 2.0, 1.0])
        with pytest.raises(AssemblyError):
            assemble_mesh(pts, tris, [[1, 4]], lam)


class TestGrids:
    def test_fill_graded_endpoints_and_spacing(self):
        nodes = _fill_graded(0.0, 2.0, 0.01, 0.05, 0.2)
        assert nodes[0] == 0.0 and nodes[-1] == 2.0
        steps = np.diff(nodes)
        assert np.all(steps > 0)
        assert steps[0] == pytest.approx(0.01, rel=0.6)
        assert steps.max() <= 0.25

    def test_parameter_grid_pins_arcs(self):
        arcs = [_ArcRequest(2.0, 0.1, 8)]
        grid, lists = _parameter_grid(TWO_PI, 0.3, arcs)
        arc_nodes = grid[lists[0]]
        assert arc_nodes[0] == pytest.approx(1.9)
        assert arc_nodes[-1] == pytest.approx(2.1)
        assert len(arc_nodes) == 9
        assert np.allclose(np.diff(arc_nodes), 0.2 / 8)

    def test_parameter_grid_rejects_overlap(self):
        arcs = [_ArcRequest(1.0, 0.2, 4), _ArcRequest(1.3, 0.2, 4)]
        with pytest.raises(sk.InvalidParameterError):
            _parameter_grid(TWO_PI, 0.3, arcs)


class TestExport:
    def test_off_and_sidecar(self, tmp_path, coarse_disk_mesh):
        off = tmp_path / "disk.off"
        side = tmp_path / "disk.json"
        sk.export_off(coarse_disk_mesh, off)
        sk.export_sidecar(coarse_disk_mesh, side)
        lines = off.read_text().splitlines()
        assert lines[0] == "OFF"
        nv, nt, _ = (int(tok) for tok in lines[1].split())
        assert nv == coarse_disk_mesh.n_chart
        assert nt == coarse_disk_mesh.n_triangles
        payload = json.loads(side.read_text())
        assert set(payload) == {"conformal_factor", "identifications", "boundary_loops"}
        assert len(payload["conformal_factor"]) == coarse_disk_mesh.n_logical
        loop = payload["boundary_loops"][0]
        assert sorted(loop) == sorted(set(loop))


def _loop_lengths(mesh):
    lengths = []
    from steklov.meshes import boundary_edge_lengths
    edge_len = boundary_edge_lengths(mesh)
    uv = mesh.logical[mesh.boundary_edge_chart]
    for loop in mesh.boundary_loops:
        members = set(loop)
        mask = [int(a) in members and int(b) in members for a, b in uv]
        lengths.append(float(edge_len[mask].sum()))
    return lengths
