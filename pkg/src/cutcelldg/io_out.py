"""Output writers: legacy ASCII VTK, boundary-trace CSV, checkpoints."""

from __future__ import annotations

import csv
import json

import numpy as np

from . import euler


def _vtk_header(f, title):
    f.write("# vtk DataFile Version 3.0\n")
    f.write(f"{title}\n")
    f.write("ASCII\n")
    f.write("DATASET UNSTRUCTURED_GRID\n")


def _cell_outline(cell):
    """Polygon outline including curved-edge interpolation points."""
    pts = []
    for e in cell.edges:
        pts.extend(e.points[:-1])
    return np.asarray(pts)


def write_vtk_cells(path, mesh, cell_data=None, title="cutcelldg"):
    """Mesh as VTK polygons with optional per-cell scalar fields.

    cell_data: dict name -> array over mesh.order.
    """
    outlines = [_cell_outline(mesh.cells[ij]) for ij in mesh.order]
    npts = sum(len(o) for o in outlines)
    with open(path, "w") as f:
        _vtk_header(f, title)
        f.write(f"POINTS {npts} double\n")
        for o in outlines:
            for x, y in o:
                f.write(f"{x:.16g} {y:.16g} 0\n")
        ncell = len(outlines)
        f.write(f"CELLS {ncell} {ncell + npts}\n")
        off = 0
        for o in outlines:
            k = len(o)
            f.write(" ".join([str(k)] + [str(off + i) for i in range(k)]))
            f.write("\n")
            off += k
        f.write(f"CELL_TYPES {ncell}\n")
        f.write("7\n" * ncell)            # VTK_POLYGON
        if cell_data:
            f.write(f"CELL_DATA {ncell}\n")
            for name, vals in cell_data.items():
                f.write(f"SCALARS {name} double\nLOOKUP_TABLE default\n")
                for v in np.asarray(vals, float):
                    f.write(f"{v:.16g}\n")
    return path


def write_vtk_points(path, pts, point_data, title="cutcelldg-points"):
    """Scattered quadrature-point samples as VTK vertices with scalars."""
    pts = np.asarray(pts, float).reshape(-1, 2)
    n = len(pts)
    with open(path, "w") as f:
        _vtk_header(f, title)
        f.write(f"POINTS {n} double\n")
        for x, y in pts:
            f.write(f"{x:.16g} {y:.16g} 0\n")
        f.write(f"CELLS {n} {2 * n}\n")
        for i in range(n):
            f.write(f"1 {i}\n")
        f.write(f"CELL_TYPES {n}\n")
        f.write("1\n" * n)                # VTK_VERTEX
        f.write(f"POINT_DATA {n}\n")
        for name, vals in point_data.items():
            f.write(f"SCALARS {name} double\nLOOKUP_TABLE default\n")
            for v in np.asarray(vals, float).ravel():
                f.write(f"{v:.16g}\n")
    return path


def write_field_vtk(path, ctx, C, law=None, title="solution"):
    """Cell-average fields plus SRD overlap counts and volume fractions."""
    mesh = ctx.mesh
    data = {"volume_fraction": mesh.volume_fractions(),
            "overlap_count": ctx.plan.overlap.astype(float)}
    avg = C[:, 0, :]
    if avg.shape[1] == 1:
        data["u"] = avg[:, 0]
    else:
        gamma = getattr(law, "gamma", 1.4)
        rho, u, v, P = euler.primitives(avg, gamma)
        data.update({"rho": rho, "u": u, "v": v, "P": P,
                     "mach": np.sqrt(u * u + v * v)
                     / np.sqrt(gamma * np.maximum(P, 1e-300) / rho)})
    return write_vtk_cells(path, mesh, data, title=title)


def boundary_trace(ctx, C, coord_fn=None, segment=None):
    """Solution sampled at boundary-edge quadrature points, ordered by a
    trace coordinate along the boundary.

    coord_fn(segment_name, pts) -> scalar per point defines the coordinate
    (each geometry documents its own, e.g. wall distance from the domain
    origin); the default is the Euclidean distance from (0, 0).
    """
    if coord_fn is None:
        def coord_fn(name, pts):
            return np.hypot(pts[..., 0], pts[..., 1])
    rows = []
    for cid, cd in enumerate(ctx.cdata):
        for e, sr, phi in zip(cd.cell.edges, cd.srules, cd.table.phi_surf):
            if e.tag[0] != "boundary":
                continue
            if segment is not None and e.tag[1] != segment:
                continue
            U = phi @ C[cid]
            coords = np.atleast_1d(coord_fn(e.tag[1], sr.points))
            for k in range(len(sr.weights)):
                rows.append((e.tag[1], float(coords[k]), sr.points[k, 0],
                             sr.points[k, 1]) + tuple(np.asarray(U[k], float)))
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def write_boundary_trace_csv(path, ctx, C, law=None, coord_fn=None):
    rows = boundary_trace(ctx, C, coord_fn=coord_fn)
    m = C.shape[2]
    names = ["u"] if m == 1 else ["rho", "mx", "my", "E"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["segment", "distance", "x", "y"] + names)
        for r in rows:
            w.writerow([r[0]] + [f"{v:.16g}" for v in r[1:]])
    return path


CHECKPOINT_VERSION = 1


def save_checkpoint(path, C, t, p, meta=None):
    np.savez(path, version=CHECKPOINT_VERSION, C=C, t=t, p=p,
             meta=json.dumps(meta or {}))
    return path


def load_checkpoint(path):
    d = np.load(path, allow_pickle=False)
    if int(d["version"]) != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {d['version']}")
    return d["C"], float(d["t"]), int(d["p"]), json.loads(str(d["meta"]))
