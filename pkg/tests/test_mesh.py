import math

import numpy as np
import pytest

from ddfv.errors import (
    DegenerateCell,
    NegativeArea,
    NonConvexDiamond,
    NonManifoldEdge,
    ParseError,
    ValidationError,
)
from ddfv.fields import TensorSpec
from ddfv.geometry import polygon_area
from ddfv.mesh import (
    PrimalMesh,
    build_ddfv,
    gen_kershaw,
    gen_quad_fvca,
    gen_uniform_quad,
    quality,
    read_mesh,
    write_mesh,
)


def test_uniform_interior_diamond_geometry():
    n = 4
    mesh = build_ddfv(gen_uniform_quad(n))
    inner = ~mesh.dia_is_boundary
    h = 1.0 / n
    assert np.allclose(mesh.edge_len[inner], h)
    assert np.allclose(mesh.dual_edge_len[inner], h)
    assert np.allclose(mesh.sin_angle[inner], 1.0)
    assert np.allclose(mesh.diamond_area[inner], h * h / 2.0)
    q = quality(mesh)
    assert np.allclose(q.theta[inner], 1.0)
    assert q.theta_interior_max == pytest.approx(1.0)


def test_diamond_partition_of_unit_square(mesh_zoo):
    for name, mesh in mesh_zoo:
        assert abs(mesh.diamond_area.sum() - 1.0) < 1e-12, name


def test_2x2_interior_dual_cell(uniform2):
    # The dual cell of the central vertex is the square through the four
    # cell centers: corners (0.25, 0.25) .. (0.75, 0.75), area 0.25.
    v = int(np.flatnonzero(
        (np.abs(uniform2.primal.vertices - 0.5) < 1e-14).all(axis=1)
    )[0])
    assert not uniform2.vertex_is_boundary[v]
    assert uniform2.dual_areas[v] == pytest.approx(0.25, abs=1e-14)
    poly = uniform2.dual_polygon(v)
    assert sorted(map(tuple, np.round(poly, 12))) == [
        (0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75),
    ]
    assert polygon_area(poly) == pytest.approx(0.25, abs=1e-14)


def test_partition_identities(mesh_zoo):
    for name, mesh in mesh_zoo:
        area = mesh.domain_area
        for total in (mesh.cell_areas.sum(), mesh.dual_areas.sum(),
                      mesh.diamond_area.sum(), mesh.overlap_area.sum()):
            assert abs(total - area) <= 1e-12 * area, name


def test_diamond_area_identity_per_diamond(mesh_zoo):
    # stored area must equal the shoelace area of the corner quadrilateral
    for name, mesh in mesh_zoo:
        verts = mesh.primal.vertices
        centers = mesh.primal_centers
        for d in range(mesh.n_diamonds):
            quad = np.array([
                centers[mesh.dia_cell_k[d]],
                verts[mesh.dia_vert_k[d]],
                centers[mesh.dia_cell_l[d]],
                verts[mesh.dia_vert_l[d]],
            ])
            assert abs(polygon_area(quad)) == pytest.approx(
                mesh.diamond_area[d], rel=1e-12), (name, d)


def test_quarter_diamond_consistency(mesh_zoo):
    for name, mesh in mesh_zoo:
        inner = ~mesh.dia_is_boundary
        lhs = mesh.wedge_cell_k + mesh.wedge_cell_l
        assert np.allclose(lhs[inner], mesh.diamond_area[inner], rtol=1e-12)
        lhs = mesh.wedge_vert_k + mesh.wedge_vert_l
        assert np.allclose(lhs, mesh.diamond_area, rtol=1e-12)
        # boundary convention: the degenerate cell carries no quarter
        assert (mesh.wedge_cell_l[mesh.dia_is_boundary] == 0.0).all()
        assert np.allclose(mesh.wedge_cell_k[mesh.dia_is_boundary],
                           mesh.diamond_area[mesh.dia_is_boundary])


def test_sin_angle_bounded_by_theta(mesh_zoo):
    for name, mesh in mesh_zoo:
        q = quality(mesh)
        assert (mesh.sin_angle >= 1.0 / q.theta - 1e-12).all(), name
        assert (q.theta >= 1.0 - 1e-14).all()
        assert (q.theta_tilde >= 1.0 - 1e-14).all()


def test_bases_unit_and_direct(mesh_zoo):
    for name, mesh in mesh_zoo:
        for arr in (mesh.edge_normal, mesh.dual_edge_normal,
                    mesh.edge_tangent, mesh.dual_edge_tangent):
            assert np.abs(np.hypot(arr[:, 0], arr[:, 1]) - 1.0).max() < 1e-12
        det1 = (mesh.edge_tangent[:, 0] * mesh.edge_normal[:, 1]
                - mesh.edge_tangent[:, 1] * mesh.edge_normal[:, 0])
        det2 = (mesh.dual_edge_normal[:, 0] * mesh.dual_edge_tangent[:, 1]
                - mesh.dual_edge_normal[:, 1] * mesh.dual_edge_tangent[:, 0])
        assert np.allclose(det1, 1.0) and np.allclose(det2, 1.0), name
        # normals point from cell k to cell l / vertex k to vertex l
        centers = mesh.primal_centers
        verts = mesh.primal.vertices
        dvec = centers[mesh.dia_cell_l] - centers[mesh.dia_cell_k]
        assert (np.einsum("ij,ij->i", mesh.edge_normal, dvec) > 0).all()
        evec = verts[mesh.dia_vert_l] - verts[mesh.dia_vert_k]
        assert (np.einsum("ij,ij->i", mesh.dual_edge_normal, evec) > 0).all()


# --- generators ----------------------------------------------------------


def test_gen_uniform_counts():
    m1 = gen_uniform_quad(1)
    assert m1.n_vertices == 4 and m1.n_cells == 1
    m2 = gen_uniform_quad(2)
    assert m2.n_vertices == 9 and m2.n_cells == 4
    m4 = gen_uniform_quad(4)
    assert len(m4.boundary_edges) == 16


def test_gen_quad_fvca_zero_amplitude_is_uniform():
    a = gen_quad_fvca(4, 0.0)
    b = gen_uniform_quad(4)
    assert np.allclose(a.vertices, b.vertices)
    assert a.cells == b.cells


def test_gen_quad_fvca_positive_areas():
    mesh = gen_quad_fvca(8, 0.1)
    for loop in mesh.cells:
        assert polygon_area(mesh.vertices[loop]) > 0.0
    q = quality(build_ddfv(mesh))
    assert math.isfinite(q.theta_star) and q.theta_star > 1.0


def test_gen_quad_fvca_rejects_inverting_amplitude():
    with pytest.raises(DegenerateCell):
        gen_quad_fvca(8, 0.2)
    with pytest.raises(ValidationError):
        gen_quad_fvca(8, 0.3)


def test_gen_kershaw_zero_distortion_is_uniform():
    a = gen_kershaw(8, 0.0)
    b = gen_uniform_quad(8)
    assert np.allclose(a.vertices, b.vertices)


def test_gen_kershaw_default_builds():
    mesh = build_ddfv(gen_kershaw(16))
    assert (mesh.sin_angle > 0.0).all()


def test_gen_kershaw_refinement_halves_h():
    h16 = build_ddfv(gen_kershaw(16)).h
    h32 = build_ddfv(gen_kershaw(32)).h
    assert abs(h16 / h32 - 2.0) < 0.05 * 2.0


# --- quality -------------------------------------------------------------


def test_quality_uniform_identity_condition(uniform4):
    from ddfv.operators import local_matrices

    q = quality(uniform4, TensorSpec.identity())
    mats = local_matrices(uniform4, TensorSpec.identity())
    inner = ~uniform4.dia_is_boundary
    assert np.allclose(mats.cond2()[inner], 1.0)
    assert q.cond2_max < q.cond2_bound


def test_quality_kershaw_matches_direct_evaluation(kershaw8):
    q = quality(kershaw8)
    mesh = kershaw8
    direct = 1.0
    for d in range(mesh.n_diamonds):
        r = mesh.edge_len[d] / mesh.dual_edge_len[d]
        theta = (r + 1.0 / r) / (2.0 * mesh.sin_angle[d])
        parts = [mesh.wedge_cell_k[d], mesh.wedge_vert_k[d],
                 mesh.wedge_vert_l[d]]
        if not mesh.dia_is_boundary[d]:
            parts.append(mesh.wedge_cell_l[d])
        theta_tilde = mesh.diamond_area[d] / min(parts)
        direct = max(direct, theta, theta_tilde)
    assert q.theta_star == pytest.approx(direct, rel=1e-12)


def test_quality_condition_bound_kershaw(kershaw8):
    # local quadratic-form matrices stay within the regularity-based bound
    lam = TensorSpec.rotated(1.0, 0.05, 0.3)
    q = quality(kershaw8, lam)
    assert q.cond2_max < q.cond2_bound
    assert q.cond_ok


# --- invalid meshes -------------------------------------------------------


def test_negative_area_rejected():
    verts = [(0, 0), (1, 0), (1, 1), (0, 1)]
    with pytest.raises(NegativeArea):
        PrimalMesh(verts, [[0, 3, 2, 1]])  # clockwise


def test_non_manifold_edge_rejected():
    verts = [(0, 0), (1, 0), (0, 1), (0, -1), (-1, 0)]
    cells = [[0, 1, 2], [0, 3, 1], [0, 1, 4]]
    with pytest.raises((NonManifoldEdge, NegativeArea)):
        PrimalMesh(verts, cells)


def test_disconnected_mesh_rejected():
    verts = [(0, 0), (1, 0), (1, 1), (0, 1),
             (2, 0), (3, 0), (3, 1), (2, 1)]
    with pytest.raises(ValidationError):
        PrimalMesh(verts, [[0, 1, 2, 3], [4, 5, 6, 7]])


def test_non_crossing_diagonals_rejected():
    # second triangle is skewed so the segment joining the centroids
    # misses the shared edge
    verts = [(0, 0), (1, 0), (0.5, 1), (3, -0.2)]
    cells = [[0, 1, 2], [0, 3, 1]]
    with pytest.raises(NonConvexDiamond):
        build_ddfv(PrimalMesh(verts, cells))


# --- file I/O --------------------------------------------------------------


def test_write_read_round_trip(tmp_path):
    primal = gen_quad_fvca(3, 0.1)
    path = tmp_path / "m.mesh"
    write_mesh(primal, path)
    back = read_mesh(path)
    assert np.array_equal(back.vertices, primal.vertices)
    assert back.cells == primal.cells


def test_read_missing_vertex_reference(tmp_path):
    path = tmp_path / "bad.mesh"
    path.write_text("vertices 3\n0 0\n1 0\n0 1\ncells 1\n3 0 1 7\n")
    with pytest.raises(ParseError) as err:
        read_mesh(path)
    assert err.value.line == 6


def test_read_reorients_clockwise_cell(tmp_path):
    path = tmp_path / "cw.mesh"
    path.write_text("vertices 4\n0 0\n1 0\n1 1\n0 1\ncells 1\n4 0 3 2 1\n")
    with pytest.warns(UserWarning, match="reoriented"):
        mesh = read_mesh(path)
    assert polygon_area(mesh.vertices[mesh.cells[0]]) > 0.0


def test_read_malformed_header(tmp_path):
    path = tmp_path / "hdr.mesh"
    path.write_text("points 3\n")
    with pytest.raises(ParseError):
        read_mesh(path)


def test_read_allows_comments(tmp_path):
    path = tmp_path / "c.mesh"
    path.write_text(
        "# a comment\nvertices 4\n0 0\n1 0\n# middle\n1 1\n0 1\n"
        "cells 1\n4 0 1 2 3\n"
    )
    mesh = read_mesh(path)
    assert mesh.n_cells == 1


def test_single_cell_mesh_builds():
    mesh = build_ddfv(gen_uniform_quad(1))
    assert mesh.n_cells == 1 and mesh.n_bnd == 4 and mesh.n_verts == 4
    assert abs(mesh.diamond_area.sum() - 1.0) < 1e-12


def test_mesh_arrays_immutable(uniform4):
    with pytest.raises(ValueError):
        uniform4.cell_areas[0] = 7.0
    with pytest.raises(ValueError):
        uniform4.edge_normal[0, 0] = 7.0
