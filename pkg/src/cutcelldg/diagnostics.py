"""Error norms, boundary error metrics, conservation audits and
convergence-rate fitting.

L1/Linf are the quadrature-point-sampled norms: L1 sums w |U - u| over all
volume points, Linf takes the pointwise max.  The FV-style metrics compare
cell averages with the exact solution at cell centroids, weighted by cell
volume on the domain and by boundary-edge arclength on the cut cells.
"""

from __future__ import annotations

import csv

import numpy as np


def _mapped(vals, error_map):
    return vals if error_map is None else error_map(vals)


def l1_linf(ctx, C, exact_fn, t=0.0, error_map=None):
    """Quadrature-sampled (L1, Linf) per mapped component."""
    l1 = 0.0
    linf = 0.0
    Uw, Uc = ctx.eval_volume(C)
    if len(ctx.whole_ids):
        d = np.abs(_mapped(Uw, error_map)
                   - _mapped(exact_fn(ctx.pts_whole, t), error_map))
        l1 = l1 + np.einsum("q,cqm->m", ctx.w_whole, d)
        linf = np.maximum(linf, d.max(axis=(0, 1)))
    if len(ctx.cut_ids):
        d = np.abs(_mapped(Uc, error_map)
                   - _mapped(exact_fn(ctx.pts_cut, t), error_map))
        l1 = l1 + np.einsum("cq,cqm->m", ctx.w_cut, d)
        linf = np.maximum(linf, d.max(axis=(0, 1)))
    return np.atleast_1d(l1), np.atleast_1d(linf)


def fv_style_errors(ctx, C, exact_fn, t=0.0, error_map=None, component=0):
    """Relative L1 of cell averages at centroids: domain metric E_d plus one
    boundary metric E_b per boundary segment name (arclength weights)."""
    exact_c = _mapped(exact_fn(ctx.centroids, t), error_map)[..., component]
    avg = _mapped(C[:, 0, :], error_map)[..., component]
    vols = ctx.volumes
    E_d = float(np.sum(np.abs(avg - exact_c) * vols)
                / np.sum(np.abs(exact_c) * vols))

    groups = {}
    for cid, cd in enumerate(ctx.cdata):
        for e, sr in zip(cd.cell.edges, cd.srules):
            if e.tag[0] != "boundary":
                continue
            name = e.tag[1]
            num, den = groups.setdefault(name, [0.0, 0.0])
            blen = sr.arclength
            groups[name][0] = num + abs(avg[cid] - exact_c[cid]) * blen
            groups[name][1] = den + abs(exact_c[cid]) * blen
    E_b = {name: num / den for name, (num, den) in sorted(groups.items())}
    return E_d, E_b


def mass_audit(ctx, C):
    """Per-variable totals sum_K |K| c_0."""
    return ctx.mass(C)


def convergence_rates(points):
    """Least-squares slope of log(error) against log(1/N).

    points: iterable of (N, error); returns the fitted rate (positive for
    first-order-or-better convergence).
    """
    pts = [(n, e) for n, e in points if e > 0]
    if len(pts) < 2:
        return float("nan")
    x = np.log([1.0 / n for n, _ in pts])
    y = np.log([e for _, e in pts])
    A = np.stack([x, np.ones_like(x)], axis=1)
    slope, _ = np.linalg.lstsq(A, y, rcond=None)[0]
    return float(slope)


def pairwise_rates(points):
    """log2-style rate between consecutive grids: log(e1/e2)/log(N2/N1)."""
    out = []
    for (n1, e1), (n2, e2) in zip(points[:-1], points[1:]):
        out.append(float(np.log(e1 / e2) / np.log(n2 / n1)))
    return out


def write_convergence_csv(path, rows):
    """Emit the study table: N, L1, rate, Linf, rate, E_d, E_b_*.

    rows: list of dicts with keys N, L1, Linf and optionally E_d plus
    per-boundary E_b entries; rates are recomputed pairwise.
    """
    rows = sorted(rows, key=lambda r: r["N"])
    eb_names = sorted({k for r in rows for k in r if k.startswith("E_b")})
    header = ["N", "L1", "L1_rate", "Linf", "Linf_rate"]
    if any("E_d" in r for r in rows):
        header.append("E_d")
    header += eb_names
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        prev = None
        for r in rows:
            l1r = linfr = ""
            if prev is not None:
                l1r = f"{np.log(prev['L1'] / r['L1']) / np.log(r['N'] / prev['N']):.3f}"
                linfr = f"{np.log(prev['Linf'] / r['Linf']) / np.log(r['N'] / prev['N']):.3f}"
            row = [r["N"], f"{r['L1']:.6e}", l1r, f"{r['Linf']:.6e}", linfr]
            if "E_d" in header:
                row.append(f"{r['E_d']:.6e}" if "E_d" in r else "")
            for name in eb_names:
                row.append(f"{r[name]:.6e}" if name in r else "")
            w.writerow(row)
            prev = r
    return path
