"""State redistribution: merging neighborhoods and the two projections.

Small cut cells are temporarily merged with nearby cells into possibly
overlapping neighborhoods.  Each neighborhood carries a polynomial basis
orthonormal under a weighted inner product in which every member cell's
contribution is divided by its overlap count.  After a forward Euler stage
the solution is projected onto the neighborhood bases (coarsen) and then back
onto the base grid by averaging the overlapping neighborhood polynomials
(refine).  Both operations are linear and are precomputed as small dense
blocks per (neighborhood, member) pair.

Cells at least half the size of a background cell keep a self-neighborhood,
for which the weighted inner product collapses to the cell's own and the
whole postprocess is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import BBoxMap, orthonormalize
from .errors import MergeFailure

AXES = ((1, 0), (-1, 0), (0, 1), (0, -1))

#: members allowed in a normal-direction chain before falling back to the
#: central 3x3 tile
NORMAL_CHAIN_CAP = 4


def boundary_normal(cdata):
    """Arclength-weighted average outward normal over boundary edges."""
    n = np.zeros(2)
    for e, sr in zip(cdata.cell.edges, cdata.srules):
        if e.tag[0] == "boundary":
            n += sr.weights @ sr.normals
    norm = np.hypot(*n)
    return n / norm if norm > 0 else n


def merge_direction(cdata, mesh, cells_present):
    """Signed grid axis closest to the into-the-fluid direction -n.

    Ties (|n_x| = |n_y| within 1e-12) are broken toward the axis whose first
    neighbor cell has the larger volume.
    """
    n = boundary_normal(cdata)
    scores = [float(-(n[0] * e[0] + n[1] * e[1])) for e in AXES]
    best = max(scores)
    cand = [k for k, s in enumerate(scores) if s >= best - 1e-12]
    if len(cand) > 1:
        i, j = cdata.cell.index

        def nbr_volume(k):
            ij = (i + AXES[k][0], j + AXES[k][1])
            return mesh.cells[ij].volume if ij in cells_present else -1.0

        cand.sort(key=lambda k: (nbr_volume(k), -k), reverse=True)
    return AXES[cand[0]]


def build_neighborhoods(mesh, cdata_list):
    """Member index sets M_{i,j} plus the merge kind for every cell.

    Cut cells smaller than half a background cell merge along the grid
    direction closest to the boundary normal until the summed member volume
    reaches dx*dy/2; corner cells with two irregular edges, and cells whose
    normal chain leaves the fluid region or exceeds the chain cap, use the
    3x3 central tile instead.
    """
    thresh = 0.5 * mesh.dx * mesh.dy
    present = set(mesh.order)
    members_all, kinds = [], []
    for cd in cdata_list:
        cell = cd.cell
        i, j = cell.index
        if cell.kind == "cut" and cell.n_boundary_edges >= 2:
            members, kind = _central(mesh, present, i, j, thresh), "central3x3"
        elif cell.volume >= thresh:
            members, kind = [cell.index], "self"
        else:
            members = _normal_chain(mesh, present, cd, thresh)
            if members is None:
                members, kind = _central(mesh, present, i, j, thresh), "central3x3"
            else:
                kind = "normal"
        members_all.append(members)
        kinds.append(kind)
    return members_all, kinds


def _normal_chain(mesh, present, cdata, thresh):
    e = merge_direction(cdata, mesh, present)
    i, j = cdata.cell.index
    members = [(i, j)]
    total = cdata.cell.volume
    while total < thresh:
        if len(members) >= NORMAL_CHAIN_CAP:
            return None
        nxt = (members[-1][0] + e[0], members[-1][1] + e[1])
        if nxt not in present:
            return None
        if nxt not in members:
            members.append(nxt)
            total += mesh.cells[nxt].volume
    return members


def _central(mesh, present, i, j, thresh):
    members = [(i + di, j + dj)
               for di in (-1, 0, 1) for dj in (-1, 0, 1)
               if (i + di, j + dj) in present]
    members.sort()
    total = sum(mesh.cells[ij].volume for ij in members)
    if total < thresh:
        raise MergeFailure(
            f"central neighborhood of {(i, j)} has volume {total:.3e} "
            f"< {thresh:.3e}; mesh too coarse for this geometry"
        )
    return members


def compute_overlap_counts(member_sets, ids, n_cells):
    """N_{r,s}: number of neighborhoods containing each cell."""
    counts = np.zeros(n_cells, dtype=int)
    for members in member_sets:
        for ij in members:
            counts[ids[ij]] += 1
    return counts


@dataclass
class Neighborhood:
    owner: int                    # dense cell id
    member_ids: np.ndarray
    kind: str
    weighted_volume: float
    bbox: BBoxMap
    coarsen: np.ndarray           # (n_mem, K, K): q_hat += C_m @ c_member
    refine: np.ndarray            # (n_mem, K, K): c_member += D_m @ q_hat
    phi_hat_chk: np.ndarray       # basis values at member vol+surf points
    Rinv: np.ndarray


@dataclass
class _NbBatch:
    """Active neighborhoods with the same member count, stacked."""

    member_ids: np.ndarray   # (g, mm)
    coarsen: np.ndarray      # (g, mm, K, K)
    refine: np.ndarray       # (g, mm, K, K)
    chk: np.ndarray          # (g, n_chk_max, K) padded with row repeats


@dataclass
class MergePlan:
    n_cells: int
    n_modes: int
    overlap: np.ndarray
    member_sets: list
    kinds: list
    active: list = field(default_factory=list)   # Neighborhood records
    affected: np.ndarray = None                  # dense ids touched by SRD
    batches: list = field(default_factory=list)

    def neighborhood_of(self, cell_id):
        for nb in self.active:
            if nb.owner == cell_id:
                return nb
        return None

    def build_batches(self):
        by_count = {}
        for nb in self.active:
            by_count.setdefault(len(nb.member_ids), []).append(nb)
        self.batches = []
        for mm in sorted(by_count):
            nbs = by_count[mm]
            nmax = max(nb.phi_hat_chk.shape[0] for nb in nbs)
            chk = np.stack([
                np.concatenate([nb.phi_hat_chk,
                                np.repeat(nb.phi_hat_chk[:1],
                                          nmax - nb.phi_hat_chk.shape[0], 0)])
                for nb in nbs])
            self.batches.append(_NbBatch(
                member_ids=np.stack([nb.member_ids for nb in nbs]),
                coarsen=np.stack([nb.coarsen for nb in nbs]),
                refine=np.stack([nb.refine for nb in nbs]),
                chk=chk,
            ))


def build_merge_plan(mesh, cdata_list, ref):
    """Precompute neighborhoods, overlap counts, weighted bases and the
    coarsen/refine blocks.  Only cells actually touched by merging get
    records; everywhere else SRD acts as the identity."""
    ids = mesh.ids
    member_sets, kinds = build_neighborhoods(mesh, cdata_list)
    overlap = compute_overlap_counts(member_sets, ids, mesh.n_cells)

    affected = set()
    for k, members in enumerate(member_sets):
        if len(members) > 1 or kinds[k] != "self":
            affected.update(ids[ij] for ij in members)
    affected.update(int(c) for c in np.nonzero(overlap > 1)[0])
    affected = np.array(sorted(affected), dtype=int)
    aff_set = set(int(c) for c in affected)

    K = ref.n
    active = []
    for owner_id, (members, kind) in enumerate(zip(member_sets, kinds)):
        if owner_id not in aff_set:
            continue
        mem_ids = np.array([ids[ij] for ij in members], dtype=int)
        cds = [cdata_list[m] for m in mem_ids]
        vols = np.array([cd.cell.volume for cd in cds])
        Ns = overlap[mem_ids].astype(float)
        khat = float(np.sum(vols / Ns))

        boxes = np.array([cd.cell.bbox for cd in cds])
        xmin = boxes[:, 0].min()
        ymin = boxes[:, 1].min()
        xmax = (boxes[:, 0] + boxes[:, 2]).max()
        ymax = (boxes[:, 1] + boxes[:, 3]).max()
        bbox = BBoxMap(xmin, ymin, xmax - xmin, ymax - ymin)

        pts = np.concatenate([cd.vrule.points for cd in cds])
        w = np.concatenate([cd.vrule.weights / N
                            for cd, N in zip(cds, Ns)])
        V = ref.eval(*bbox.to_ref(pts))
        _, Rinv = orthonormalize(V, w / khat)
        phi_hat = V @ Rinv

        coarsen = np.empty((len(cds), K, K))
        refine = np.empty((len(cds), K, K))
        chk = [phi_hat]
        off = 0
        for m, (cd, N) in enumerate(zip(cds, Ns)):
            nq = cd.vrule.n
            ph = phi_hat[off:off + nq]
            G = (cd.vrule.weights[:, None] * ph).T @ cd.table.phi_vol
            coarsen[m] = G / (khat * N)
            refine[m] = G.T / (cd.cell.volume * N)
            off += nq
            spts = np.concatenate([sr.points for sr in cd.srules])
            chk.append(ref.eval(*bbox.to_ref(spts)) @ Rinv)
        active.append(Neighborhood(
            owner=owner_id, member_ids=mem_ids, kind=kind,
            weighted_volume=khat, bbox=bbox,
            coarsen=coarsen, refine=refine,
            phi_hat_chk=np.concatenate(chk), Rinv=Rinv,
        ))

    plan = MergePlan(mesh.n_cells, K, overlap, member_sets, kinds,
                     active, affected)
    plan.build_batches()
    return plan


def coarsen(plan, chat):
    """Neighborhood coefficients q_hat for every active neighborhood."""
    return [np.einsum("mkl,mlv->kv", nb.coarsen, chat[nb.member_ids])
            for nb in plan.active]


def _scatter_blocks(out, ids, contrib):
    nc, K, m = out.shape
    km = K * m
    flat = (ids[:, None] * km + np.arange(km)[None, :]).ravel()
    acc = np.bincount(flat, weights=contrib.reshape(len(ids), km).ravel(),
                      minlength=nc * km)
    out += acc.reshape(out.shape)


def apply_srd(plan, chat, limit_qhat=None):
    """refine(coarsen(chat)), the full postprocess.

    chat has shape (n_cells, K) or (n_cells, K, m); each conserved variable
    is redistributed independently.  limit_qhat(qhat, phi_chk) may modify the
    stacked neighborhood coefficients (g, K, m) before refinement
    (positivity limiting on the neighborhood polynomials).
    """
    squeeze = chat.ndim == 2
    if squeeze:
        chat = chat[:, :, None]
    out = chat.copy()
    out[plan.affected] = 0.0
    for grp in plan.batches:
        qhat = np.einsum("gmkl,gmlv->gkv", grp.coarsen, chat[grp.member_ids])
        if limit_qhat is not None:
            qhat = limit_qhat(qhat, grp.chk)
        contrib = np.einsum("gmkl,glv->gmkv", grp.refine, qhat)
        _scatter_blocks(out, grp.member_ids.ravel(),
                        contrib.reshape(-1, *contrib.shape[2:]))
    return out[:, :, 0] if squeeze else out
