"""Per-cell discretization data: quadrature rules and orthonormal bases.

Volume rules are exact to degree 2p on cut cells and 2p+1 on Cartesian cells;
surface rules use p+1 Gauss points per edge.  A degree override raises the
volume rule exactness uniformly (escape hatch for under-resolved nonlinear
runs).
"""

from __future__ import annotations

from dataclasses import dataclass

from .basis import ReferenceBasis, build_cell_basis
from .quadrature import cell_edge_rules, polygon_rule


@dataclass
class CellData:
    cell: object
    vrule: object
    srules: list
    table: object


def volume_degree(p, kind, override=None):
    d = 2 * p if kind == "cut" else 2 * p + 1
    if override is not None:
        d = max(d, int(override))
    return d


def build_cell_data(mesh, p, quad_degree_override=None):
    """Rules and bases for every cell, in mesh order."""
    ref = ReferenceBasis(p)
    out = []
    for ij in mesh.order:
        cell = mesh.cells[ij]
        vr = polygon_rule(cell, volume_degree(p, cell.kind,
                                              quad_degree_override))
        srs = cell_edge_rules(cell, p + 1)
        table = build_cell_basis(cell, vr, srs, ref)
        out.append(CellData(cell, vr, srs, table))
    return ref, out
