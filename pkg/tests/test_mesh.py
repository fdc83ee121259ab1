import json

import numpy as np
import pytest

from cutcelldg import geometry as g
from cutcelldg import mesh as meshmod
from cutcelldg.errors import DegenerateCutError, MeshError
from cutcelldg.problems import annulus_boundary, half_plane_boundary

EPS = 1e-4


def test_pure_cartesian_grid():
    m = meshmod.generate_mesh(None, (0, 0, 1, 1), 4, 4, q=2)
    assert m.n_cells == 16
    assert len(m.cut_cells) == 0
    assert all(m.cells[ij].kind == "whole" for ij in m.order)
    assert m.min_volume_fraction == 1.0


def test_half_plane_single_cell():
    b = half_plane_boundary(0.5 + EPS, 0, 1)
    m = meshmod.generate_mesh(b, (0, 0, 1, 1), 1, 1, q=1)
    assert m.n_cells == 1
    cell = m.cells[(0, 0)]
    assert cell.kind == "cut"
    assert np.isclose(cell.volume, 0.5 - EPS, atol=1e-14)
    assert np.isclose(m.min_volume_fraction, 0.5 - EPS, atol=1e-12)


def test_half_plane_fraction_value():
    # fluid above y = 0.5 + eps on a 1-cell grid: fraction 0.5 - eps
    b = half_plane_boundary(0.5 + EPS, 0, 1)
    m = meshmod.generate_mesh(b, (0, 0, 1, 1), 1, 1, q=1)
    rep = meshmod.mesh_report(m)
    assert np.isclose(rep["min_volume_fraction"], 0.5 - EPS, atol=1e-12)
    assert rep["n_cut"] == 1


class TestAnnulus:
    def test_structure(self, annulus_mesh_50, sbr_problem):
        m = annulus_mesh_50
        assert len(m.cut_cells) > 0
        for ij in m.order:
            cell = m.cells[ij]
            nb = cell.n_boundary_edges
            assert nb <= 2
            if cell.kind == "whole":
                assert nb == 0
                assert np.isclose(cell.volume, m.dx * m.dy, rtol=1e-14)
            else:
                assert 0 < cell.volume <= m.dx * m.dy * (1 + 1e-12)
        # interior whole cells exist on both sides of the ring thickness
        assert sum(m.cells[ij].kind == "whole" for ij in m.order) > 500

    def test_connectivity_symmetry(self, annulus_mesh_50):
        m = annulus_mesh_50
        for ij in m.order:
            for e in m.cells[ij].edges:
                if e.tag[0] != "interior":
                    continue
                nbr = e.tag[1]
                back = [f for f in m.cells[nbr].edges
                        if f.tag == ("interior", ij)]
                assert len(back) == 1
                be = back[0]
                assert np.allclose(sorted(map(tuple, [e.a, e.b])),
                                   sorted(map(tuple, [be.a, be.b])),
                                   atol=1e-13)

    def test_area_closure_q5(self, sbr_problem):
        m = meshmod.generate_mesh(sbr_problem.boundary, sbr_problem.domain,
                                  50, 50, q=5)
        exact = np.pi * (1.25 ** 2 - 0.75 ** 2)
        assert abs(m.fluid_area() - exact) / exact < 1e-8

    def test_determinism(self, sbr_problem, annulus_mesh_25):
        m2 = meshmod.generate_mesh(sbr_problem.boundary, sbr_problem.domain,
                                   25, 25, q=2)
        d1 = json.dumps(meshmod.mesh_to_json(annulus_mesh_25), sort_keys=True)
        d2 = json.dumps(meshmod.mesh_to_json(m2), sort_keys=True)
        assert d1 == d2

    def test_json_round_trip(self, annulus_mesh_25):
        doc = meshmod.mesh_to_json(annulus_mesh_25)
        m2 = meshmod.mesh_from_json(json.loads(json.dumps(doc)))
        assert json.dumps(doc) == json.dumps(meshmod.mesh_to_json(m2))

    def test_report_fields(self, annulus_mesh_25):
        rep = meshmod.mesh_report(annulus_mesh_25)
        assert rep["n_cells"] == rep["n_whole"] + rep["n_cut"]
        assert 0 < rep["min_volume_fraction"] <= 1
        assert rep["max_volume_fraction"] == 1.0
        assert sum(rep["histogram"]["counts"]) == rep["n_cells"]


def test_double_crossing_on_one_grid_edge_rejected():
    # a disc tunneled inside one cell crosses the x=0.5 line twice within
    # a single grid edge
    c = np.array([0.5, 0.25])
    segs = [g.CircleArc(c, 0.2, np.pi / 4 - k * np.pi / 2,
                        np.pi / 4 - (k + 1) * np.pi / 2, name="hole")
            for k in range(4)]

    def inside(pts):
        return np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1]) >= 0.2

    b = g.Boundary(segs, inside, chains=[[0, 1, 2, 3, 0]])
    with pytest.raises(MeshError):
        meshmod.generate_mesh(b, (0, 0, 1, 1), 2, 2, q=2)


def test_mixed_corners_without_crossing_rejected():
    # inconsistent predicate: classification flips but no geometric crossing
    seg = g.LineSegmentGeom((10, 10), (11, 10), name="faraway")

    def inside(pts):
        return (pts[:, 0] + pts[:, 1]) < 0.77

    b = g.Boundary([seg], inside)
    with pytest.raises(DegenerateCutError):
        meshmod.generate_mesh(b, (0, 0, 1, 1), 2, 2, q=1)


def test_periodic_connectivity():
    m = meshmod.generate_mesh(None, (0, 0, 1, 1), 4, 4, q=1,
                              periodic_x=True, periodic_y=True)
    left = m.cells[(0, 1)]
    tags = [e.tag for e in left.edges]
    assert ("interior", (3, 1)) in tags
    bottom = m.cells[(1, 0)]
    assert ("interior", (1, 3)) in [e.tag for e in bottom.edges]


def test_dmr_wedge_mesh_min_fraction():
    """The 1/120 wedge grid reproduces the reported minimum volume fraction
    4.11e-06 (same geometry, same background grid)."""
    from cutcelldg.problems import double_mach
    prob = double_mach()
    m = meshmod.generate_mesh(prob.boundary, prob.domain, 300, 210, q=2)
    assert np.isclose(m.min_volume_fraction, 4.11e-06, rtol=5e-3)
