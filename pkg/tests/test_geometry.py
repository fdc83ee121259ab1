import numpy as np
import pytest

from cutcelldg import geometry as g
from cutcelldg.errors import NoRootError
from cutcelldg.problems import annulus_boundary


def dense_chord_root(seg, s1, s2, w, n=1_000_000):
    """Independent oracle: bisection on a 1e6-point evaluation of Gamma."""
    ss = np.linspace(s1, s2, n)
    P = seg.point(ss)
    chord = np.linalg.norm(seg.point(s2) - seg.point(s1))
    f = np.linalg.norm(P - seg.point(s1), axis=-1) / chord - w
    k = np.searchsorted(f, 0.0)
    # linear interpolation between the bracketing samples
    s_lo, s_hi = ss[k - 1], ss[k]
    f_lo, f_hi = f[k - 1], f[k]
    return s_lo + (0.0 - f_lo) / (f_hi - f_lo) * (s_hi - s_lo)


class TestClassify:
    def test_annulus_center_solid(self):
        b = annulus_boundary()
        assert not b.is_fluid(1.5, 1.5)

    def test_annulus_ring_fluid(self):
        b = annulus_boundary()
        assert b.is_fluid(1.5, 2.5)   # radius 1.0 between 0.75 and 1.25

    def test_far_exterior_solid(self):
        b = annulus_boundary()
        assert not b.is_fluid(-40.0, -40.0)

    def test_stability_under_snap_perturbation(self):
        b = annulus_boundary()
        h = 0.06
        snap = g.SNAP_FACTOR * h
        rng = np.random.default_rng(0)
        # points well away (> 10x snap tol) from both circles
        pts = np.array([[1.5 + 1.0, 1.5], [1.5, 1.5 + 0.8],
                        [1.5 - 1.1, 1.5], [0.1, 0.1]])
        base = b.classify(pts)
        for _ in range(20):
            wig = pts + rng.uniform(-snap, snap, pts.shape)
            assert np.array_equal(b.classify(wig), base)


class TestArclengthRoot:
    def test_quarter_circle_midpoint(self):
        arc = g.CircleArc((0, 0), 1.0, 0.0, np.pi / 2)
        s = g.arclength_fraction_root(arc, 0.0, 1.0, 0.5)
        pt = arc.point(s)
        assert np.allclose(pt, [np.sqrt(2) / 2, np.sqrt(2) / 2], atol=1e-12)

    def test_straight_segment_fraction(self):
        seg = g.LineSegmentGeom((0, 0), (2, 0))
        s = g.arclength_fraction_root(seg, 0.0, 1.0, 0.25)
        assert np.allclose(seg.point(s), [0.5, 0.0], atol=1e-12)

    def test_ellipse_vs_dense_oracle(self):
        ell = g.ParamCurve(
            lambda s: np.stack([2 * np.cos(s), np.sin(s)], axis=-1),
            0.0, np.pi / 2, name="ellipse")
        s_star = g.arclength_fraction_root(ell, 0.0, np.pi / 2, 0.5)
        s_oracle = dense_chord_root(ell, 0.0, np.pi / 2, 0.5)
        assert abs(s_star - s_oracle) < 1e-10

    def test_doubling_back_rejected(self):
        # chord distance is non-monotone on a hairpin
        hairpin = g.ParamCurve(
            lambda s: np.stack([np.sin(np.pi * s), 0.1 * s], axis=-1),
            0.0, 1.0, name="hairpin")
        with pytest.raises(NoRootError):
            g.arclength_fraction_root(hairpin, 0.0, 1.0, 0.5)

    def test_w_out_of_range(self):
        seg = g.LineSegmentGeom((0, 0), (1, 0))
        with pytest.raises(ValueError):
            g.arclength_fraction_root(seg, 0.0, 1.0, 1.5)


class TestInterpolationPoints:
    def test_q2_quarter_circle(self):
        arc = g.CircleArc((0, 0), 1.0, 0.0, np.pi / 2)
        pts = g.edge_interpolation_points(arc, 0.0, 1.0, 2)
        assert pts.shape == (3, 2)
        assert np.allclose(pts[0], [1, 0], atol=1e-14)
        assert np.allclose(pts[1], [np.sqrt(2) / 2, np.sqrt(2) / 2],
                           atol=1e-12)
        assert np.allclose(pts[2], [0, 1], atol=1e-14)

    def test_q1_endpoints_only(self):
        ell = g.ParamCurve(
            lambda s: np.stack([2 * np.cos(s), np.sin(s)], axis=-1),
            0.2, 1.0)
        pts = g.edge_interpolation_points(ell, 0.2, 1.0, 1)
        assert pts.shape == (2, 2)
        assert np.allclose(pts[0], ell.point(0.2))
        assert np.allclose(pts[1], ell.point(1.0))

    def test_q5_ringleb_wall_vs_dense_oracle(self):
        from cutcelldg.problems import ringleb_boundary
        wall = ringleb_boundary().segments[0]      # k = 1.2 wall
        s1, s2 = 0.35, 0.55                        # between two crossings
        pts = g.edge_interpolation_points(wall, s1, s2, 5)
        for i in range(1, 5):
            s_o = dense_chord_root(wall, s1, s2, i / 5)
            assert np.linalg.norm(pts[i] - wall.point(s_o)) < 1e-9

    def test_chord_fraction_invariant(self):
        # |f(interior point i)| < tol with w = i/q on the root-finding path
        # (circles use exact angle interpolation instead, which differs from
        # the chord-fraction roots at O(theta^2))
        curves = [
            g.ParamCurve(lambda s: np.stack(
                [0.3 + 2 * np.cos(s), -1 + 2 * np.sin(s)], axis=-1),
                0.3, 1.2),
            g.ParamCurve(lambda s: np.stack(
                [s, np.sin(2 * s) * 0.3], axis=-1), 0.0, 1.5),
        ]
        for seg in curves:
            q = 4
            pts = g.edge_interpolation_points(seg, seg.s_lo, seg.s_hi, q)
            chord = np.linalg.norm(pts[-1] - pts[0])
            for i in range(1, q):
                f = np.linalg.norm(pts[i] - pts[0]) / chord - i / q
                assert abs(f) < 10 * g.ROOT_TOL


def test_interpolant_convergence_order():
    """Degree-q interpolant distance to a circle decays at order >= q+1."""
    R = 1.0
    for q in (2, 3):
        errs = []
        for n in (8, 16, 32, 64):
            arc = g.CircleArc((0, 0), R, 0.0, 2 * np.pi / n)
            pts = g.edge_interpolation_points(arc, 0.0, 1.0, q)
            t = np.linspace(0, 1, 200)
            xy, _ = g.edge_eval(pts, t)
            errs.append(np.abs(np.hypot(xy[:, 0], xy[:, 1]) - R).max())
        rates = [np.log(errs[k] / errs[k + 1]) / np.log(2) for k in range(3)]
        assert min(rates[-2:]) >= q + 1 - 0.3, (q, errs, rates)
