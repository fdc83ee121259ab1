"""Embedded boundary geometry.

A boundary is a collection of parametric segments Gamma(s) = (x(s), y(s)),
each oriented so the fluid lies on the *left* when s increases, together with
an inside/outside predicate.  The predicate is authoritative for classifying
points; the parametric form is used to build curved cell edges whose
interpolation points are equispaced in arclength.
"""

from __future__ import annotations

import numpy as np

from .errors import NoRootError

#: relative factor for snapping intersections onto grid nodes
SNAP_FACTOR = 1e-10

#: tolerance on the chord-fraction function f(s) in the bisection root find
ROOT_TOL = 1e-12


class Segment:
    """Parametric curve piece with fluid on the left of increasing s."""

    name = "segment"
    closed_form_arclength = False

    def __init__(self, s_lo: float, s_hi: float):
        self.s_lo = float(s_lo)
        self.s_hi = float(s_hi)

    def point(self, s):
        """Position Gamma(s); broadcasts over an array of parameters."""
        raise NotImplementedError

    def start(self):
        return self.point(self.s_lo)

    def end(self):
        return self.point(self.s_hi)


class LineSegmentGeom(Segment):
    """Straight segment from a to b, s in [0, 1]."""

    closed_form_arclength = True

    def __init__(self, a, b, name="line"):
        super().__init__(0.0, 1.0)
        self.a = np.asarray(a, float)
        self.b = np.asarray(b, float)
        self.name = name

    def point(self, s):
        s = np.asarray(s, float)
        return self.a + s[..., None] * (self.b - self.a)


class CircleArc(Segment):
    """Circular arc walked from theta_start to theta_end as s goes 0 to 1.

    An increasing angle span walks counterclockwise (fluid inside the circle
    on the left); a decreasing span walks clockwise (fluid outside on the
    left).  The parametrization has uniform angular speed, so equispacing in
    the parameter is exact equispacing in arclength.
    """

    closed_form_arclength = True

    def __init__(self, center, radius, theta_start, theta_end, name="arc"):
        super().__init__(0.0, 1.0)
        self.center = np.asarray(center, float)
        self.radius = float(radius)
        self.theta_start = float(theta_start)
        self.theta_end = float(theta_end)
        self.name = name

    def point(self, s):
        s = np.asarray(s, float)
        th = self.theta_start + s * (self.theta_end - self.theta_start)
        return self.center + self.radius * np.stack(
            [np.cos(th), np.sin(th)], axis=-1
        )


class ParamCurve(Segment):
    """General parametric segment backed by a vectorized callable fn(s)->(...,2)."""

    def __init__(self, fn, s_lo, s_hi, name="curve"):
        super().__init__(s_lo, s_hi)
        self.fn = fn
        self.name = name

    def point(self, s):
        return np.asarray(self.fn(np.asarray(s, float)), float)


class Boundary:
    """Embedded boundary: oriented segments plus the authoritative predicate.

    ``inside_fn`` takes an (n, 2) array and returns a boolean array, True for
    fluid.  Consecutive chained segments must share endpoints; chains are
    given as lists of segment indices so junction points can be resolved to a
    single coordinate.
    """

    def __init__(self, segments, inside_fn, chains=None):
        self.segments = list(segments)
        self.inside_fn = inside_fn
        if chains is None:
            chains = [[i] for i in range(len(self.segments))]
        self.chains = chains

    def classify(self, pts):
        """True where a point is fluid. Vectorized over an (n, 2) array."""
        pts = np.atleast_2d(np.asarray(pts, float))
        res = np.asarray(self.inside_fn(pts), bool)
        return res

    def is_fluid(self, x, y):
        return bool(self.classify(np.array([[x, y]]))[0])


def _param_range(seg, s1, s2):
    lo, hi = (s1, s2) if s2 >= s1 else (s2, s1)
    return lo, hi


def chord_fraction(seg, s1, s2, s, w):
    """f(s): fractional chord distance from Gamma(s1), minus the target w."""
    p1 = seg.point(s1)
    p2 = seg.point(s2)
    chord = np.linalg.norm(p2 - p1)
    d = np.linalg.norm(seg.point(s) - p1, axis=-1)
    return d / chord - w


def arclength_fraction_root(seg, s1, s2, w, tol=ROOT_TOL, n_check=64):
    """Parameter s* where the chord distance from Gamma(s1) is the fraction w
    of the full chord |Gamma(s2) - Gamma(s1)|.

    Circular arcs (and straight lines) use the exact angle / linear
    interpolation.  Other curves are solved by bisection; a segment whose
    chord-distance function is not monotone on [s1, s2] doubles back inside
    the cell and is rejected.
    """
    if not 0.0 < w < 1.0:
        raise ValueError(f"fraction w must lie in (0,1), got {w}")
    if seg.closed_form_arclength:
        return s1 + w * (s2 - s1)

    p1 = seg.point(s1)
    p2 = seg.point(s2)
    chord = np.linalg.norm(p2 - p1)
    if chord <= 0.0:
        raise NoRootError("zero-length chord")

    ss = np.linspace(s1, s2, n_check)
    f = np.linalg.norm(seg.point(ss) - p1, axis=-1) / chord - w
    df = np.diff(f)
    if np.any(df < -10 * ROOT_TOL):
        raise NoRootError(
            f"segment {seg.name!r} doubles back on [{s1}, {s2}]"
        )

    a, b = s1, s2
    fa = -w
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = float(chord_fraction(seg, s1, s2, m, w))
        if abs(fm) < tol:
            return m
        if (fa < 0) == (fm < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def edge_interpolation_points(seg, s1, s2, q):
    """q+1 points on Gamma between s1 and s2, equispaced in arclength.

    Endpoints are Gamma(s1) and Gamma(s2); the q-1 interior points sit at
    chord fractions i/q.
    """
    if q < 1:
        raise ValueError("interpolation degree q must be >= 1")
    params = [s1]
    for i in range(1, q):
        params.append(arclength_fraction_root(seg, s1, s2, i / q))
    params.append(s2)
    return seg.point(np.array(params))


# ---------------------------------------------------------------------------
# curved-edge interpolants

def fit_edge_polys(points):
    """Degree-q polynomial pair (x(t), y(t)) through edge points at t = i/q.

    Coordinates are centered on the chord midpoint before fitting so the
    coefficient (and hence derivative) roundoff scales with the edge length,
    not with the absolute position; sliver cells rely on this.
    """
    pts = np.asarray(points, float)
    q = len(pts) - 1
    t = np.linspace(0.0, 1.0, q + 1)
    center = 0.5 * (pts[0] + pts[-1])
    px = np.polynomial.Polynomial.fit(t, pts[:, 0] - center[0], q,
                                      domain=[0.0, 1.0])
    py = np.polynomial.Polynomial.fit(t, pts[:, 1] - center[1], q,
                                      domain=[0.0, 1.0])
    return px, py, center


def edge_eval(points, t):
    """Evaluate the degree-q edge interpolant and its derivative at t.

    Returns (xy, dxy) with shapes (..., 2).  Straight two-point edges take the
    linear fast path.
    """
    pts = np.asarray(points, float)
    t = np.asarray(t, float)
    if len(pts) == 2:
        d = pts[1] - pts[0]
        xy = pts[0] + t[..., None] * d
        dxy = np.broadcast_to(d, xy.shape).copy()
        return xy, dxy
    px, py, center = fit_edge_polys(pts)
    xy = np.stack([center[0] + px(t), center[1] + py(t)], axis=-1)
    dxy = np.stack([px.deriv()(t), py.deriv()(t)], axis=-1)
    return xy, dxy
