"""Quadrature on (curved) polygons and their edges.

Volume rules triangulate the cell from an interior point and map a tensor
Gauss rule onto each (possibly curved) triangle through the blend
T(u,v) = (1-v) E(u) + v C, where E is the degree-q edge interpolant and C the
apex.  Composing positive Gauss weights with a positive Jacobian keeps every
weight positive and every node interior.  Surface rules are Gauss-Legendre
nodes mapped through the edge interpolant with arclength-scaled weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TriangulationError
from .geometry import edge_eval

_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss01(n):
    """n-point Gauss-Legendre nodes and weights on [0, 1]."""
    if n not in _GAUSS_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GAUSS_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _GAUSS_CACHE[n]


@dataclass
class VolumeRule:
    points: np.ndarray   # (n, 2)
    weights: np.ndarray  # (n,), all positive

    @property
    def n(self):
        return len(self.weights)

    def integrate(self, vals):
        return np.tensordot(self.weights, vals, axes=(0, 0))


@dataclass
class SurfaceRule:
    points: np.ndarray   # (m, 2)
    weights: np.ndarray  # (m,), include the arclength Jacobian
    normals: np.ndarray  # (m, 2), outward unit normals

    @property
    def arclength(self):
        return float(self.weights.sum())


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def edge_rule(edge_points, n_points):
    """Gauss-Legendre rule along a straight or curved edge.

    Normals follow the fluid-left convention: rotating the tangent by -90
    degrees points out of the cell.
    """
    t, wt = gauss01(n_points)
    xy, dxy = edge_eval(edge_points, t)
    speed = np.linalg.norm(dxy, axis=-1)
    normals = np.stack([dxy[:, 1], -dxy[:, 0]], axis=-1) / speed[:, None]
    return SurfaceRule(points=xy, weights=wt * speed, normals=normals)


def _blend_rule(edge_points, apex, degree):
    """Tensor rule on the triangle {edge, apex}, exact to `degree` through
    the isoparametric blend map."""
    qe = len(edge_points) - 1
    nu = max(1, math.ceil(qe * (degree + 2) / 2))
    nv = max(1, math.ceil((degree + 2) / 2))
    u, wu = gauss01(nu)
    v, wv = gauss01(nv)
    E, dE = edge_eval(edge_points, u)                      # (nu, 2)
    P = (1.0 - v)[None, :, None] * E[:, None, :] \
        + v[None, :, None] * apex[None, None, :]           # (nu, nv, 2)
    jcross = _cross(dE, apex[None, :] - E)                 # (nu,)
    J = (1.0 - v)[None, :] * jcross[:, None]
    if np.any(J <= 0.0):
        raise TriangulationError("non-positive Jacobian in blend rule")
    w = wu[:, None] * wv[None, :] * J
    return P.reshape(-1, 2), w.ravel()


def _ear_clip(vertices):
    """Ear-clipping triangulation of a simple CCW polygon (indices)."""
    n = len(vertices)
    idx = list(range(n))
    tris = []
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10 * n:
            raise TriangulationError("ear clipping failed to terminate")
        clipped = False
        for k in range(len(idx)):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
            a, b, c = vertices[i0], vertices[i1], vertices[i2]
            if _cross(b - a, c - a) <= 0.0:
                continue
            ok = True
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                p = vertices[j]
                s0 = _cross(b - a, p - a)
                s1 = _cross(c - b, p - b)
                s2 = _cross(a - c, p - c)
                if s0 > 0 and s1 > 0 and s2 > 0:
                    ok = False
                    break
            if ok:
                tris.append((i0, i1, i2))
                idx.pop(k)
                clipped = True
                break
        if not clipped:
            raise TriangulationError("no ear found; polygon not simple?")
    tris.append(tuple(idx))
    return tris


def _fan_rule(edge_point_arrays, apex, degree):
    """Fan of blend rules from one apex; raises if any Jacobian goes
    non-positive.  Straight edges emanating from the apex itself span no
    area and are skipped; curved ones are kept (thin crescent cells are
    star-shaped only from the shared vertex)."""
    pts_all, w_all = [], []
    for pts in edge_point_arrays:
        if len(pts) == 2:
            chord2 = np.sum((pts[1] - pts[0]) ** 2)
            area2 = _cross(pts[1] - pts[0], apex - pts[0])
            if abs(area2) <= 1e-14 * chord2:
                continue
        P, w = _blend_rule(pts, apex, degree)
        pts_all.append(P)
        w_all.append(w)
    if not pts_all:
        raise TriangulationError("fan spans no area")
    return VolumeRule(np.concatenate(pts_all), np.concatenate(w_all))


def _split_curved(pts):
    """Split a curved piece at its parameter midpoint.

    A degree-q polynomial restricted to a half interval is the same
    polynomial under an affine reparametrization, so interpolating it at q+1
    equispaced sub-parameters reproduces the geometry exactly.
    """
    q = len(pts) - 1
    t = np.linspace(0.0, 1.0, q + 1)
    lo, _ = edge_eval(pts, 0.5 * t)
    hi, _ = edge_eval(pts, 0.5 + 0.5 * t)
    return lo, hi


def _rule_from_pieces(edge_point_arrays, vertices, degree, extra_apexes=(),
                      depth=0):
    # vertex mean first; thin crescent/banana cells against a curved edge
    # may only be star-shaped from a vertex, an edge midpoint, or the area
    # centroid (passed in by the caller)
    apexes = [vertices.mean(axis=0)]
    apexes += [np.asarray(a, float) for a in extra_apexes]
    apexes += [v for v in vertices]
    apexes += [0.5 * (pts[0] + pts[-1]) for pts in edge_point_arrays
               if len(pts) == 2]
    for apex in apexes:
        try:
            return _fan_rule(edge_point_arrays, apex, degree)
        except TriangulationError:
            continue
    has_curved = any(len(pts) > 2 for pts in edge_point_arrays)
    if has_curved and depth < 3:
        # halve the curved edges (exact) and add their midpoints as both
        # polygon vertices and apex candidates
        pieces = []
        new_verts = list(vertices)
        for pts in edge_point_arrays:
            if len(pts) > 2:
                lo, hi = _split_curved(pts)
                pieces += [lo, hi]
                new_verts.append(lo[-1])
            else:
                pieces.append(pts)
        return _rule_from_pieces(pieces, np.asarray(new_verts), degree,
                                 extra_apexes, depth + 1)
    if has_curved:
        raise TriangulationError(
            "cell is not star-shaped from any candidate apex"
        )
    pts_all, w_all = [], []
    for i0, i1, i2 in _ear_clip(vertices):
        tri = np.array([vertices[i0], vertices[i1], vertices[i2]])
        P, w = _blend_rule(tri[:2], tri[2], degree)
        pts_all.append(P)
        w_all.append(w)
    return VolumeRule(np.concatenate(pts_all), np.concatenate(w_all))


def cartesian_rule(x0, y0, dx, dy, degree):
    """Tensor Gauss rule on an axis-aligned rectangle."""
    n1 = max(1, math.ceil((degree + 1) / 2))
    t, wt = gauss01(n1)
    X = x0 + dx * t
    Y = y0 + dy * t
    P = np.stack(np.meshgrid(X, Y, indexing="ij"), axis=-1).reshape(-1, 2)
    W = (np.outer(wt, wt) * dx * dy).ravel()
    return VolumeRule(P, W)


def polygon_rule(cell, degree):
    """Volume rule for a mesh cell, exact to `degree` with respect to the
    degree-q isoparametric edge maps.

    Whole Cartesian cells get a tensor Gauss rule; cut cells are fan
    triangulated from the vertex average (ear clipping as the fallback for
    non-star straight polygons).
    """
    if cell.kind == "whole":
        x0, y0, dx, dy = cell.bbox
        return cartesian_rule(x0, y0, dx, dy, degree)
    edge_pts = [np.asarray(e.points, float) for e in cell.edges]
    rule = _rule_from_pieces(edge_pts, np.asarray(cell.vertices, float),
                             degree, extra_apexes=(cell.centroid,))
    if not np.all(rule.weights > 0.0):
        raise TriangulationError("non-positive quadrature weight")
    total = rule.weights.sum()
    if abs(total - cell.volume) > 1e-12 * max(cell.volume, 1e-300):
        raise TriangulationError(
            f"rule volume {total!r} disagrees with cell volume {cell.volume!r}"
        )
    return rule


def cell_edge_rules(cell, n_points):
    """Surface rules for every edge of a cell, in polygon order."""
    return [edge_rule(np.asarray(e.points, float), n_points) for e in cell.edges]
