import numpy as np
import pytest

from cutcelldg import geometry as g
from cutcelldg import quadrature as quad
from cutcelldg.mesh import Cell, EdgeRef, generate_mesh
from cutcelldg.problems import annulus_boundary


def make_polygon_cell(vertices, volume=None):
    vertices = np.asarray(vertices, float)
    edges = [EdgeRef("straight",
                     np.array([vertices[k], vertices[(k + 1) % len(vertices)]]),
                     ("domain", "left"))
             for k in range(len(vertices))]
    if volume is None:
        x, y = vertices[:, 0], vertices[:, 1]
        volume = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    return Cell((0, 0), "cut", vertices, edges, float(volume),
                vertices.mean(axis=0),
                (vertices[:, 0].min(), vertices[:, 1].min(),
                 np.ptp(vertices[:, 0]), np.ptp(vertices[:, 1])))


def shoelace_monomial(vertices, a, b):
    """Green's theorem closed form of int x^a y^b over a straight polygon:
    contour integral of x^(a+1) y^b / (a+1) dy, edge by edge (exact
    Gauss-Legendre on each straight edge)."""
    t, wt = quad.gauss01(10)
    total = 0.0
    n = len(vertices)
    for k in range(n):
        p0, p1 = vertices[k], vertices[(k + 1) % n]
        xy = p0 + t[:, None] * (p1 - p0)
        dy = p1[1] - p0[1]
        total += np.sum(wt * xy[:, 0] ** (a + 1) * xy[:, 1] ** b) * dy / (a + 1)
    return total


class TestVolumeRules:
    def test_unit_square(self):
        rule = quad.cartesian_rule(0, 0, 1, 1, 3)
        assert np.isclose(rule.weights.sum(), 1.0, atol=1e-14)
        assert np.isclose(rule.integrate(rule.points[:, 0]), 0.5, atol=1e-14)

    def test_right_triangle_x2(self):
        cell = make_polygon_cell([(0, 0), (1, 0), (0, 1)])
        rule = quad.polygon_rule(cell, 2)
        # closed-form oracle: int x^2 over the unit right triangle = 1/12
        val = rule.integrate(rule.points[:, 0] ** 2)
        assert np.isclose(val, 1.0 / 12.0, atol=1e-14)

    def test_quarter_disc_area(self):
        # the rule integrates the degree-q isoparametric region exactly, so
        # its distance to the true disc area is set by the arc interpolation;
        # four q=5 pieces put that below 1e-8 (one piece over the full 90
        # degrees leaves ~5e-6 of interpolation defect)
        pieces = []
        for k in range(4):
            arc = g.CircleArc((0, 0), 1.0, k * np.pi / 8, (k + 1) * np.pi / 8)
            pieces.append(g.edge_interpolation_points(arc, 0.0, 1.0, 5))
        edge_pts = [np.array([[0.0, 0.0], [1.0, 0.0]])] + pieces \
            + [np.array([[0.0, 1.0], [0.0, 0.0]])]
        verts = np.array([[0, 0], [1, 0],
                          [np.cos(np.pi / 8), np.sin(np.pi / 8)],
                          [np.cos(np.pi / 4), np.sin(np.pi / 4)],
                          [np.cos(3 * np.pi / 8), np.sin(3 * np.pi / 8)],
                          [0, 1]], float)
        rule = quad._rule_from_pieces(edge_pts, verts, 10)
        assert abs(rule.weights.sum() - np.pi / 4) < 1e-8
        assert np.all(rule.weights > 0)

    def test_monomial_exactness_random_polygons(self):
        rng = np.random.default_rng(5)
        for _ in range(8):
            # convex polygon from random points
            pts = rng.normal(size=(12, 2)) * rng.uniform(0.5, 2)
            pts = pts + rng.normal(size=2) * 3
            hull = _convex_hull(pts)
            cell = make_polygon_cell(hull)
            d = 4
            rule = quad.polygon_rule(cell, d)
            for a in range(d + 1):
                for b in range(d + 1 - a):
                    got = rule.integrate(rule.points[:, 0] ** a
                                         * rule.points[:, 1] ** b)
                    want = shoelace_monomial(hull, a, b)
                    assert abs(got - want) <= 1e-12 * max(1.0, abs(want)), \
                        (a, b, got, want)

    def test_positive_interior_on_annulus_cut_cells(self, annulus_mesh_50,
                                                    sbr_problem):
        b = sbr_problem.boundary
        for ij in annulus_mesh_50.cut_cells[::7]:
            cell = annulus_mesh_50.cells[ij]
            rule = quad.polygon_rule(cell, 4)
            assert np.all(rule.weights > 0)
            # all nodes classify as fluid (interior to the cell polygon)
            assert b.classify(rule.points).all()
            assert np.isclose(rule.weights.sum(), cell.volume,
                              rtol=1e-12)


class TestEdgeRules:
    def test_straight_two_point(self):
        sr = quad.edge_rule(np.array([[0.0, 0.0], [1.0, 0.0]]), 2)
        nodes = np.sort(sr.points[:, 0])
        assert np.allclose(nodes, [0.5 - 0.5 / np.sqrt(3),
                                   0.5 + 0.5 / np.sqrt(3)], atol=1e-14)
        assert np.allclose(sr.weights, 0.5, atol=1e-14)
        assert np.allclose(sr.normals, [[0, -1], [0, -1]], atol=1e-14)

    def test_quarter_circle_arclength(self):
        # q=5 edges spanning 15 degrees each keep the interpolation defect
        # below the 1e-9 target (a single 90-degree edge leaves ~5e-6)
        total = 0.0
        for k in range(6):
            arc = g.CircleArc((0, 0), 1.0, k * np.pi / 12, (k + 1) * np.pi / 12)
            pts = g.edge_interpolation_points(arc, 0.0, 1.0, 5)
            sr = quad.edge_rule(pts, 6)
            total += sr.arclength
            assert np.allclose(np.linalg.norm(sr.normals, axis=1), 1.0,
                               atol=1e-14)
        assert abs(total - np.pi / 2) < 1e-9

    def test_unit_integral_is_arclength(self):
        pts = np.array([[0.0, 0.0], [0.3, 0.4]])
        sr = quad.edge_rule(pts, 3)
        assert np.isclose(sr.weights.sum(), 0.5, atol=1e-14)


def test_divergence_consistency(annulus_mesh_50):
    """closed cells: sum of w*n over all edges vanishes (constant field)."""
    for ij in list(annulus_mesh_50.order[::35]) + annulus_mesh_50.cut_cells[::5]:
        cell = annulus_mesh_50.cells[ij]
        srs = quad.cell_edge_rules(cell, 3)
        tot = sum((sr.weights[:, None] * sr.normals).sum(axis=0)
                  for sr in srs)
        per = sum(sr.arclength for sr in srs)
        assert np.abs(tot).max() < 1e-10 * per


def _convex_hull(pts):
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def half(points):
        out = []
        for p in points:
            while len(out) >= 2:
                u = out[-1] - out[-2]
                v = p - out[-2]
                if u[0] * v[1] - u[1] * v[0] > 0:
                    break
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])
