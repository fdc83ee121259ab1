"""Cut-cell mesh generation on a Cartesian background grid.

The boundary is superimposed on an N_x x N_y grid, exterior cells are
deleted, and each intersected cell becomes a polygon with straight pieces of
grid lines plus degree-q curved edges along the boundary.  Cut-cell polygons
are assembled by walking the cell perimeter counterclockwise and handing over
to the boundary arc at each fluid/solid transition, so the fluid always stays
on the left.

Restrictions (rejected with errors rather than approximated): at most one
boundary crossing per grid edge, no split or tunneled cells, single connected
arc per cut cell (up to one sharp corner).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import (
    DegenerateCutError,
    GeometryError,
    MeshError,
    SplitCellError,
)
from .quadrature import gauss01


@dataclass
class EdgeRef:
    """One directed edge of a cell polygon (CCW order, fluid on the left).

    points has shape (2, 2) for straight pieces and (q+1, 2) for boundary
    arcs.  tag is ("interior", (i, j)), ("domain", side) or
    ("boundary", segment_name).
    """

    kind: str            # "straight" | "curved"
    points: np.ndarray
    tag: tuple

    @property
    def a(self):
        return self.points[0]

    @property
    def b(self):
        return self.points[-1]


@dataclass
class Cell:
    index: tuple
    kind: str            # "whole" | "cut"
    vertices: np.ndarray
    edges: list
    volume: float = 0.0
    centroid: np.ndarray = None
    bbox: tuple = None   # (xmin, ymin, dx, dy)

    @property
    def n_boundary_edges(self):
        return sum(1 for e in self.edges if e.tag[0] == "boundary")


class CutCellMesh:
    def __init__(self, domain, nx, ny, q, cells, boundary=None,
                 periodic_x=False, periodic_y=False):
        self.domain = tuple(float(v) for v in domain)  # (x0, y0, x1, y1)
        self.nx, self.ny = int(nx), int(ny)
        self.q = int(q)
        self.dx = (self.domain[2] - self.domain[0]) / self.nx
        self.dy = (self.domain[3] - self.domain[1]) / self.ny
        self.cells = cells                              # dict[(i,j) -> Cell]
        self.boundary = boundary
        self.periodic_x = periodic_x
        self.periodic_y = periodic_y
        self.order = sorted(cells.keys())
        self.ids = {ij: k for k, ij in enumerate(self.order)}
        self.cut_cells = [ij for ij in self.order if cells[ij].kind == "cut"]

    @property
    def n_cells(self):
        return len(self.order)

    def volume_fractions(self):
        full = self.dx * self.dy
        return np.array([self.cells[ij].volume / full for ij in self.order])

    @property
    def min_volume_fraction(self):
        return float(self.volume_fractions().min())

    def fluid_area(self):
        return float(sum(self.cells[ij].volume for ij in self.order))

    def interior_faces(self):
        """Deduplicated interior faces: (cell_a, cell_b, edge_ref of a).

        Each face is reported once, keyed on the lower cell id; for periodic
        faces the owning side is the cell whose edge sits on the low domain
        boundary.
        """
        seen = set()
        faces = []
        for ij in self.order:
            for e in self.cells[ij].edges:
                if e.tag[0] != "interior":
                    continue
                nbr = e.tag[1]
                key = tuple(sorted([ij, nbr]))
                if key in seen:
                    continue
                seen.add(key)
                faces.append((ij, nbr, e))
        return faces


# ---------------------------------------------------------------------------
# intersection collection

@dataclass
class _Crossing:
    seg_id: int
    s: float
    point: np.ndarray
    edge_key: tuple = None    # ("v"|"h", line, interval) or None if at a node


def _segment_samples(seg, h_min):
    ss = np.linspace(seg.s_lo, seg.s_hi, 256)
    P = seg.point(ss)
    L = np.sum(np.linalg.norm(np.diff(P, axis=0), axis=-1))
    n = int(max(512, min(400000, 24 * L / max(h_min, 1e-300))))
    ss = np.linspace(seg.s_lo, seg.s_hi, n)
    return ss, seg.point(ss)


def _bisect_line(seg, axis, X, sa, sb, ga, gb):
    for _ in range(90):
        sm = 0.5 * (sa + sb)
        gm = float(seg.point(sm)[axis] - X)
        if gm == 0.0:
            return sm
        if (ga < 0) == (gm < 0):
            sa, ga = sm, gm
        else:
            sb, gb = sm, gm
    return 0.5 * (sa + sb)


class _MeshBuilder:
    def __init__(self, boundary, domain, nx, ny, q,
                 periodic_x=False, periodic_y=False):
        self.b = boundary
        self.x0, self.y0, self.x1, self.y1 = (float(v) for v in domain)
        self.nx, self.ny = nx, ny
        self.q = q
        self.dx = (self.x1 - self.x0) / nx
        self.dy = (self.y1 - self.y0) / ny
        self.h_min = min(self.dx, self.dy)
        self.snap_tol = geometry.SNAP_FACTOR * self.h_min
        self.match_tol = 1e-7 * self.h_min
        self.periodic_x = periodic_x
        self.periodic_y = periodic_y
        self.edge_cross = {}     # edge_key -> _Crossing
        self.seg_breaks = {}     # seg_id -> list[(s, point)]
        self.cell_arcs = {}      # (i,j) -> list[(seg_id, s0, s1, P0, P1)]

    # -- grid helpers --
    def node(self, i, j):
        return np.array([self.x0 + i * self.dx, self.y0 + j * self.dy])

    def _snap_point(self, p, axis, X):
        p = p.copy()
        p[axis] = X
        i = round((p[0] - self.x0) / self.dx)
        j = round((p[1] - self.y0) / self.dy)
        if 0 <= i <= self.nx and 0 <= j <= self.ny:
            nd = self.node(i, j)
            if np.hypot(*(p - nd)) < self.snap_tol:
                return nd, True
        return p, False

    def _line_values(self, axis):
        if axis == 0:
            return self.x0 + self.dx * np.arange(self.nx + 1)
        return self.y0 + self.dy * np.arange(self.ny + 1)

    def collect_crossings(self):
        if self.b is None:
            return
        # canonical junction coordinates for chained segments
        junctions = {}
        for chain in self.b.chains:
            for a, bseg in zip(chain[:-1], chain[1:]):
                pa = self.b.segments[a].end()
                pb = self.b.segments[bseg].start()
                if np.hypot(*(pa - pb)) > 100 * self.snap_tol:
                    raise GeometryError(
                        f"chained segments {a}->{bseg} do not share an endpoint"
                    )
                jp = 0.5 * (pa + pb)
                junctions[(a, "end")] = jp
                junctions[(bseg, "start")] = jp

        for sid, seg in enumerate(self.b.segments):
            ss, P = _segment_samples(seg, self.h_min)
            breaks = []
            for axis in (0, 1):
                lines = self._line_values(axis)
                g = P[:, axis]
                lo = max(0, int(np.floor((g.min() - self.x0 if axis == 0
                                          else g.min() - self.y0)
                                         / (self.dx if axis == 0 else self.dy))))
                hi = min(len(lines) - 1,
                         int(np.ceil((g.max() - self.x0 if axis == 0
                                      else g.max() - self.y0)
                                     / (self.dx if axis == 0 else self.dy))))
                for li in range(lo, hi + 1):
                    X = lines[li]
                    f = g - X
                    sgn = np.sign(f)
                    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
                    roots = [
                        _bisect_line(seg, axis, X, ss[k], ss[k + 1],
                                     f[k], f[k + 1])
                        for k in idx
                    ]
                    roots += [ss[k] for k in np.nonzero(f == 0.0)[0]
                              if seg.s_lo < ss[k] < seg.s_hi]
                    for s_root in roots:
                        p = np.asarray(seg.point(s_root), float)
                        p, snapped = self._snap_point(p, axis, X)
                        breaks.append((float(s_root), p, axis, li, snapped))

            # open endpoints sitting on a grid line become crossings too
            for which, s_end in (("start", seg.s_lo), ("end", seg.s_hi)):
                if (sid, which) in junctions:
                    continue
                p = np.asarray(seg.point(s_end), float)
                for axis in (0, 1):
                    lines = self._line_values(axis)
                    li = int(round((p[axis] - lines[0])
                                   / (self.dx if axis == 0 else self.dy)))
                    if 0 <= li < len(lines) and \
                            abs(p[axis] - lines[li]) < self.snap_tol:
                        p2, _ = self._snap_point(p, axis, lines[li])
                        breaks.append((float(s_end), p2, axis, li, True))
                        break
                else:
                    raise DegenerateCutError(
                        f"open endpoint of segment {seg.name!r} is not on a "
                        "grid line; boundary does not close the domain"
                    )

            breaks.sort(key=lambda r: r[0])
            merged = []
            span = seg.s_hi - seg.s_lo
            for rec in breaks:
                if merged and abs(rec[0] - merged[-1][0]) < 1e-9 * span:
                    # same physical crossing seen on two lines (grid node)
                    if np.hypot(*(rec[1] - merged[-1][1])) > self.match_tol:
                        raise DegenerateCutError(
                            "distinct crossings collide in parameter space"
                        )
                    continue
                merged.append(rec)

            for s_root, p, axis, li, snapped in merged:
                if not self._in_rect(p):
                    continue
                at_node = self._is_node(p)
                if not at_node:
                    key = self._edge_key(p, axis, li)
                    if key in self.edge_cross:
                        raise DegenerateCutError(
                            f"two boundary crossings on grid edge {key}"
                        )
                    self.edge_cross[key] = _Crossing(sid, s_root, p, key)
            self.seg_breaks[sid] = [(s, p) for s, p, *_ in merged]

        self._build_arcs(junctions)

    def _in_rect(self, p):
        return (self.x0 - self.snap_tol <= p[0] <= self.x1 + self.snap_tol
                and self.y0 - self.snap_tol <= p[1] <= self.y1 + self.snap_tol)

    def _is_node(self, p):
        i = round((p[0] - self.x0) / self.dx)
        j = round((p[1] - self.y0) / self.dy)
        if 0 <= i <= self.nx and 0 <= j <= self.ny:
            return bool(np.all(p == self.node(i, j)))
        return False

    def _edge_key(self, p, axis, li):
        if axis == 0:   # vertical line x = const, interval in y
            j = int(np.floor((p[1] - self.y0) / self.dy))
            return ("v", li, min(max(j, 0), self.ny - 1))
        i = int(np.floor((p[0] - self.x0) / self.dx))
        return ("h", li, min(max(i, 0), self.nx - 1))

    def _build_arcs(self, junctions):
        for sid, seg in enumerate(self.b.segments):
            pts = [(seg.s_lo, junctions.get((sid, "start"),
                                            np.asarray(seg.start(), float)))]
            for s, p in self.seg_breaks.get(sid, []):
                if seg.s_lo < s < seg.s_hi:
                    pts.append((s, p))
            pts.append((seg.s_hi, junctions.get((sid, "end"),
                                                np.asarray(seg.end(), float))))
            # endpoints that were snapped as crossings keep the snapped coords
            for s, p in self.seg_breaks.get(sid, []):
                if s == seg.s_lo:
                    pts[0] = (s, p)
                if s == seg.s_hi:
                    pts[-1] = (s, p)
            for (s0, p0), (s1, p1) in zip(pts[:-1], pts[1:]):
                if s1 - s0 <= 1e-12 * (seg.s_hi - seg.s_lo):
                    continue
                sm = 0.5 * (s0 + s1)
                pm = np.asarray(seg.point(sm), float)
                i = int(np.floor((pm[0] - self.x0) / self.dx))
                j = int(np.floor((pm[1] - self.y0) / self.dy))
                if not (0 <= i < self.nx and 0 <= j < self.ny):
                    continue   # boundary piece outside the domain rectangle
                self.cell_arcs.setdefault((i, j), []).append(
                    (sid, s0, s1, p0, p1)
                )

    # -- cell assembly --
    def build(self):
        self.collect_crossings()
        nxn, nyn = self.nx + 1, self.ny + 1
        gx, gy = np.meshgrid(
            self.x0 + self.dx * np.arange(nxn),
            self.y0 + self.dy * np.arange(nyn), indexing="ij",
        )
        nodes = np.stack([gx.ravel(), gy.ravel()], axis=-1)
        if self.b is None:
            fluid = np.ones(len(nodes), bool)
        else:
            fluid = self.b.classify(nodes)
        fluid = fluid.reshape(nxn, nyn)

        cells = {}
        for j in range(self.ny):
            for i in range(self.nx):
                cell = self._build_cell(i, j, fluid)
                if cell is not None:
                    cells[(i, j)] = cell

        mesh = CutCellMesh((self.x0, self.y0, self.x1, self.y1),
                           self.nx, self.ny, self.q, cells,
                           boundary=self.b,
                           periodic_x=self.periodic_x,
                           periodic_y=self.periodic_y)
        _apply_periodicity(mesh)
        _validate_connectivity(mesh)
        return mesh

    def _neighbor_tag(self, side, i, j):
        if side == 0:
            return ("interior", (i, j - 1)) if j > 0 else ("domain", "bottom")
        if side == 1:
            return ("interior", (i + 1, j)) if i < self.nx - 1 else ("domain", "right")
        if side == 2:
            return ("interior", (i, j + 1)) if j < self.ny - 1 else ("domain", "top")
        return ("interior", (i - 1, j)) if i > 0 else ("domain", "left")

    def _build_cell(self, i, j, fluid):
        corners = [self.node(i, j), self.node(i + 1, j),
                   self.node(i + 1, j + 1), self.node(i, j + 1)]
        cflags = [fluid[i, j], fluid[i + 1, j],
                  fluid[i + 1, j + 1], fluid[i, j + 1]]
        keys = [("h", j, i), ("v", i + 1, j), ("h", j + 1, i), ("v", i, j)]
        crossings = [self.edge_cross.get(k) for k in keys]
        arcs = self.cell_arcs.get((i, j), [])

        if not arcs and all(c is None for c in crossings):
            if all(cflags):
                return self._whole_cell(i, j, corners)
            if not any(cflags):
                return None
            raise DegenerateCutError(
                f"cell {(i, j)}: mixed corners but no boundary crossing"
            )
        return self._cut_cell(i, j, corners, crossings, arcs)

    def _whole_cell(self, i, j, corners):
        verts = np.array(corners)
        edges = [
            EdgeRef("straight", np.array([corners[k], corners[(k + 1) % 4]]),
                    self._neighbor_tag(k, i, j))
            for k in range(4)
        ]
        vol = self.dx * self.dy
        centroid = verts.mean(axis=0)
        bbox = (corners[0][0], corners[0][1], self.dx, self.dy)
        return Cell((i, j), "whole", verts, edges, vol, centroid, bbox)

    def _perimeter_point(self, t, corners):
        e = int(np.floor(t)) % 4
        f = t - np.floor(t)
        a, b = corners[e], corners[(e + 1) % 4]
        return a + f * (b - a)

    def _cut_cell(self, i, j, corners, crossings, arcs):
        # wheel points: corners plus edge-interior crossings, by perimeter t
        wheel = [(float(k), corners[k]) for k in range(4)]
        for side, c in enumerate(crossings):
            if c is None:
                continue
            p = c.point
            if side == 0:
                f = (p[0] - corners[0][0]) / self.dx
            elif side == 1:
                f = (p[1] - corners[1][1]) / self.dy
            elif side == 2:
                f = (corners[2][0] - p[0]) / self.dx
            else:
                f = (corners[3][1] - p[1]) / self.dy
            if not 0.0 < f < 1.0:
                raise DegenerateCutError(
                    f"cell {(i, j)}: crossing off its grid edge"
                )
            wheel.append((side + f, p))
        wheel.sort(key=lambda w: w[0])

        # classify each perimeter interval at its midpoint
        mids = []
        for k in range(len(wheel)):
            t0 = wheel[k][0]
            t1 = wheel[(k + 1) % len(wheel)][0]
            if k == len(wheel) - 1:
                t1 += 4.0
            mids.append(self._perimeter_point(0.5 * (t0 + t1) % 4.0, corners))
        is_fluid = self.b.classify(np.array(mids))

        pieces = []
        for k in range(len(wheel)):
            if not is_fluid[k]:
                continue
            t0, p0 = wheel[k]
            t1, p1 = wheel[(k + 1) % len(wheel)]
            side = int(np.floor(t0 if t0 < 4 else 0.0)) % 4
            pieces.append({
                "start": p0, "end": p1,
                "edge": EdgeRef("straight", np.array([p0, p1]),
                                self._neighbor_tag(side, i, j)),
            })
        arc_elems = []
        for sid, s0, s1, p0, p1 in arcs:
            seg = self.b.segments[sid]
            pts = geometry.edge_interpolation_points(seg, s0, s1, self.q)
            pts = np.asarray(pts, float)
            pts[0] = p0
            pts[-1] = p1
            arc_elems.append({
                "start": p0, "end": p1,
                "edge": EdgeRef("curved", pts, ("boundary", seg.name)),
            })

        elements = arc_elems + pieces
        if not elements:
            raise DegenerateCutError(f"cell {(i, j)}: no fluid boundary")
        used = [False] * len(elements)

        def find_next(pt):
            hits = [k for k, e in enumerate(elements)
                    if not used[k]
                    and np.hypot(*(e["start"] - pt)) < self.match_tol]
            if len(hits) != 1:
                raise DegenerateCutError(
                    f"cell {(i, j)}: perimeter walk found {len(hits)} "
                    "continuations"
                )
            return hits[0]

        loop = [0]
        used[0] = True
        start_pt = elements[0]["start"]
        cur = elements[0]["end"]
        guard = 0
        while np.hypot(*(cur - start_pt)) >= self.match_tol:
            guard += 1
            if guard > len(elements) + 1:
                raise DegenerateCutError(f"cell {(i, j)}: open polygon walk")
            k = find_next(cur)
            used[k] = True
            loop.append(k)
            cur = elements[k]["end"]
        if not all(used):
            raise SplitCellError(
                f"cell {(i, j)}: fluid region is split or tunneled"
            )

        edges = [elements[k]["edge"] for k in loop]
        verts = np.array([elements[k]["start"] for k in loop])
        if _signed_area(verts) <= 0.0:
            raise DegenerateCutError(f"cell {(i, j)}: polygon not CCW")
        if sum(1 for e in edges if e.tag[0] == "boundary") > 2:
            raise DegenerateCutError(
                f"cell {(i, j)}: more than two irregular edges"
            )

        # volume is quadrature-measured so that rules built later at any
        # degree agree with it to roundoff; Green's theorem cross-checks it
        from .quadrature import _rule_from_pieces
        gvol, gcen = _green_volume_centroid(edges)
        base = _rule_from_pieces([e.points for e in edges], verts, 2,
                                 extra_apexes=(gcen,))
        vol = float(base.weights.sum())
        centroid = (base.weights @ base.points) / vol
        if abs(gvol - vol) > 1e-10 * max(vol, 1e-300):
            raise DegenerateCutError(
                f"cell {(i, j)}: contour and volume quadrature disagree"
            )
        if not 0.0 < vol <= self.dx * self.dy * (1 + 1e-12):
            raise DegenerateCutError(
                f"cell {(i, j)}: volume {vol} outside (0, dx*dy]"
            )
        allpts = np.concatenate([e.points for e in edges])
        bbox = (allpts[:, 0].min(), allpts[:, 1].min(),
                np.ptp(allpts[:, 0]), np.ptp(allpts[:, 1]))
        return Cell((i, j), "cut", verts, edges, vol, centroid, bbox)


def _signed_area(verts):
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def _green_volume_centroid(edges):
    """Exact area and centroid of the curved polygon via contour integrals."""
    area = 0.0
    mx = 0.0
    my = 0.0
    for e in edges:
        qe = len(e.points) - 1
        t, wt = gauss01(max(2, (3 * qe + 3) // 2))
        xy, dxy = geometry.edge_eval(e.points, t)
        x, y = xy[:, 0], xy[:, 1]
        area += np.sum(wt * x * dxy[:, 1])
        mx += 0.5 * np.sum(wt * x * x * dxy[:, 1])
        my += -0.5 * np.sum(wt * y * y * dxy[:, 0])
    return area, np.array([mx / area, my / area])


def _apply_periodicity(mesh):
    if not (mesh.periodic_x or mesh.periodic_y):
        return
    pairs = []
    if mesh.periodic_x:
        pairs.append(("left", "right", (mesh.nx - 1, 0)))
    if mesh.periodic_y:
        pairs.append(("bottom", "top", (0, mesh.ny - 1)))
    for lo_side, hi_side, _ in pairs:
        for ij in mesh.order:
            cell = mesh.cells[ij]
            for e in cell.edges:
                if e.tag != ("domain", lo_side) and e.tag != ("domain", hi_side):
                    continue
                i, j = ij
                if lo_side == "left":
                    nbr = (mesh.nx - 1, j) if e.tag[1] == "left" else (0, j)
                else:
                    nbr = (i, mesh.ny - 1) if e.tag[1] == "bottom" else (i, 0)
                if nbr not in mesh.cells:
                    raise MeshError(
                        f"periodic partner cell {nbr} of {ij} is missing"
                    )
                e.tag = ("interior", nbr)


def _validate_connectivity(mesh):
    for ij in mesh.order:
        for e in mesh.cells[ij].edges:
            if e.tag[0] != "interior":
                continue
            nbr = e.tag[1]
            if nbr not in mesh.cells:
                raise MeshError(f"cell {ij} references missing neighbor {nbr}")
            back = [f for f in mesh.cells[nbr].edges
                    if f.tag == ("interior", ij)]
            if len(back) != 1:
                raise MeshError(
                    f"connectivity not mirrored between {ij} and {nbr}"
                )


def generate_mesh(boundary, domain, nx, ny, q,
                  periodic_x=False, periodic_y=False):
    """Build the cut-cell mesh of the fluid region.

    boundary may be None for a pure Cartesian grid.  Raises subclasses of
    MeshError when the boundary is under-resolved (split/tunneled cells,
    multiple crossings on one grid edge, degenerate snapping).
    """
    builder = _MeshBuilder(boundary, domain, nx, ny, q,
                           periodic_x=periodic_x, periodic_y=periodic_y)
    return builder.build()


def mesh_report(mesh):
    """Cell counts, volume-fraction extrema and a volume-fraction histogram."""
    fr = mesh.volume_fractions()
    cut = np.array([mesh.cells[ij].kind == "cut" for ij in mesh.order])
    hist, edges = np.histogram(fr, bins=20, range=(0.0, 1.0 + 1e-12))
    return {
        "n_cells": mesh.n_cells,
        "n_whole": int((~cut).sum()),
        "n_cut": int(cut.sum()),
        "min_volume_fraction": float(fr.min()),
        "max_volume_fraction": float(fr.max()),
        "fluid_area": mesh.fluid_area(),
        "histogram": {"counts": hist.tolist(), "bin_edges": edges.tolist()},
    }


# ---------------------------------------------------------------------------
# JSON fixtures

MESH_SCHEMA_VERSION = 1


def mesh_to_json(mesh):
    cells = []
    for ij in mesh.order:
        c = mesh.cells[ij]
        cells.append({
            "i": ij[0], "j": ij[1], "kind": c.kind,
            "vertices": c.vertices.tolist(),
            "volume": c.volume,
            "centroid": c.centroid.tolist(),
            "bbox": list(c.bbox),
            "edges": [
                {"kind": e.kind, "points": e.points.tolist(),
                 "tag": [e.tag[0], list(e.tag[1]) if e.tag[0] == "interior"
                         else e.tag[1]]}
                for e in c.edges
            ],
        })
    return {
        "version": MESH_SCHEMA_VERSION,
        "domain": list(mesh.domain),
        "nx": mesh.nx, "ny": mesh.ny, "q": mesh.q,
        "periodic_x": mesh.periodic_x, "periodic_y": mesh.periodic_y,
        "cells": cells,
    }


def mesh_from_json(doc, boundary=None):
    if doc.get("version") != MESH_SCHEMA_VERSION:
        raise MeshError(f"unsupported mesh schema version {doc.get('version')}")
    cells = {}
    for rec in doc["cells"]:
        ij = (rec["i"], rec["j"])
        edges = []
        for e in rec["edges"]:
            kind, payload = e["tag"]
            tag = (kind, tuple(payload)) if kind == "interior" else (kind, payload)
            edges.append(EdgeRef(e["kind"], np.array(e["points"]), tag))
        cells[ij] = Cell(ij, rec["kind"], np.array(rec["vertices"]), edges,
                         rec["volume"], np.array(rec["centroid"]),
                         tuple(rec["bbox"]))
    return CutCellMesh(tuple(doc["domain"]), doc["nx"], doc["ny"], doc["q"],
                       cells, boundary=boundary,
                       periodic_x=doc["periodic_x"],
                       periodic_y=doc["periodic_y"])


def save_mesh(mesh, path):
    with open(path, "w") as f:
        json.dump(mesh_to_json(mesh), f)


def load_mesh(path, boundary=None):
    with open(path) as f:
        return mesh_from_json(json.load(f), boundary=boundary)
