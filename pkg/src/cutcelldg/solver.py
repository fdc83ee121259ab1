"""Modal DG semidiscretization and SRD-stabilized explicit time stepping.

The per-cell rhs is
    d c_k/dt = -(1/|K|) [ oint phi_k F*(U-, U+) . n dl
                          - int F(U) . grad phi_k dA ],
with surface integrals from the p+1-point edge rules and volume integrals
from the cell rules.  Cells are processed in two vectorized groups (whole
cells share one basis table; cut cells are padded to a common quadrature
size), faces in one flat batch plus one batch per boundary-condition group.

Time steppers: SSP-RK2 (p=1) and SSP-RK3 (p=2) postprocess every forward
Euler stage with state redistribution and limiters; RK4 (p=3) and the
five-stage fourth-order low-storage scheme (p>=4) postprocess the
intermediate and final stage solutions.  The time step obeys
dt (|a|/dx + |b|/dy) = cfl/(2p+1) with background spacings only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import euler
from .discretization import build_cell_data
from .errors import MaxStepsExceeded, SolverBlowup
from .srd import apply_srd, build_merge_plan


# ---------------------------------------------------------------------------
# conservation laws

class AdvectionLaw:
    """Scalar advection u_t + div(a(x,y) u) = 0 with a static velocity field."""

    m = 1

    def __init__(self, velocity):
        self.velocity = velocity

    def phys_flux(self, U, pts):
        a = self.velocity(pts)
        return a[..., 0:1] * U, a[..., 1:2] * U

    def num_flux(self, name, Um, Up, n, pts):
        a = self.velocity(pts)
        an = a[..., 0] * n[..., 0] + a[..., 1] * n[..., 1]
        return np.where(an[..., None] > 0.0, an[..., None] * Um,
                        an[..., None] * Up)

    def wall_flux(self, Um, n, pts):
        return np.zeros_like(Um)

    def normal_flux(self, U, n, pts):
        a = self.velocity(pts)
        an = a[..., 0] * n[..., 0] + a[..., 1] * n[..., 1]
        return an[..., None] * U

    def wavespeeds(self, ctx, C):
        if not hasattr(self, "_speeds"):
            pts = np.concatenate([ctx.pts_whole.reshape(-1, 2),
                                  ctx.pts_cut.reshape(-1, 2)])
            a = self.velocity(pts)
            self._speeds = (float(np.abs(a[:, 0]).max()),
                            float(np.abs(a[:, 1]).max()))
        return self._speeds

    def admissible(self, C):
        return True


class EulerLaw:
    """Compressible Euler equations with ideal-gas pressure."""

    m = 4

    def __init__(self, gamma=1.4):
        self.gamma = gamma
        self.roe_fallbacks = [0]

    def phys_flux(self, U, pts):
        return euler.phys_flux(U, self.gamma)

    def num_flux(self, name, Um, Up, n, pts):
        if name == "roe":
            return euler.roe_flux(Um, Up, n, self.gamma, self.roe_fallbacks)
        if name == "llf":
            return euler.llf_flux(Um, Up, n, self.gamma)
        raise ValueError(f"unknown Euler flux {name!r}")

    def wall_flux(self, Um, n, pts):
        return euler.wall_flux(Um, n, self.gamma)

    def normal_flux(self, U, n, pts):
        return euler.normal_flux(U, n, self.gamma)

    def wavespeeds(self, ctx, C):
        avg = C[:, 0, :]            # c_0 is the cell average
        rho, u, v, P = euler.primitives(avg, self.gamma)
        c = np.sqrt(self.gamma * np.maximum(P, 0.0) / rho)
        return (float(np.max(np.abs(u) + c)), float(np.max(np.abs(v) + c)))

    def admissible(self, C):
        rho, _, _, P = euler.primitives(C[:, 0, :], self.gamma)
        return bool(np.all(rho > 0) and np.all(P > 0))


# ---------------------------------------------------------------------------
# boundary conditions

@dataclass
class BCSpec:
    kind: str                  # exact | reflect | extrapolate | prescribed
    state: np.ndarray = None   # prescribed ghost state
    fn: object = None          # exact(pts, t) -> (..., m)
    static: bool = False       # fn independent of t: ghost cached per batch


def quiescent_bc(gamma):
    return BCSpec("prescribed",
                  state=euler.conserved(1.0, 0.0, 0.0, 1.0 / gamma, gamma))


# ---------------------------------------------------------------------------
# context

@dataclass
class FaceBatch:
    L: np.ndarray
    R: np.ndarray
    pts: np.ndarray
    w: np.ndarray
    n: np.ndarray
    phiL: np.ndarray
    phiR: np.ndarray


@dataclass
class BCBatch:
    key: str
    spec: BCSpec
    cells: np.ndarray
    pts: np.ndarray
    w: np.ndarray
    n: np.ndarray
    phi: np.ndarray
    ghost_cache: np.ndarray = None


class DGContext:
    """Everything precomputed for a (mesh, p) pair."""

    def __init__(self, mesh, p, bcs, quad_degree_override=None):
        self.mesh = mesh
        self.p = int(p)
        ref, cdata = build_cell_data(mesh, p, quad_degree_override)
        self.ref = ref
        self.cdata = cdata
        self.n_modes = ref.n
        nc = mesh.n_cells
        self.volumes = np.array([cd.cell.volume for cd in cdata])
        self.centroids = np.array([cd.cell.centroid for cd in cdata])
        self.is_whole = np.array(
            [cd.cell.kind == "whole" for cd in cdata], bool)
        self.whole_ids = np.nonzero(self.is_whole)[0]
        self.cut_ids = np.nonzero(~self.is_whole)[0]

        # whole-cell group shares a single basis table
        if len(self.whole_ids):
            t0 = cdata[self.whole_ids[0]].table
            r0 = cdata[self.whole_ids[0]].vrule
            self.phi_whole = t0.phi_vol
            self.phix_whole = t0.phix_vol
            self.phiy_whole = t0.phiy_vol
            self.w_whole = r0.weights
            self.pts_whole = np.stack(
                [cdata[c].vrule.points for c in self.whole_ids])
        else:
            self.phi_whole = np.zeros((0, ref.n))
            self.phix_whole = self.phiy_whole = self.phi_whole
            self.w_whole = np.zeros(0)
            self.pts_whole = np.zeros((0, 0, 2))

        # cut cells padded to a common quadrature count (zero weights)
        if len(self.cut_ids):
            nq = max(cdata[c].vrule.n for c in self.cut_ids)
            m = len(self.cut_ids)
            self.pts_cut = np.empty((m, nq, 2))
            self.w_cut = np.zeros((m, nq))
            self.phi_cut = np.empty((m, nq, ref.n))
            self.phix_cut = np.empty((m, nq, ref.n))
            self.phiy_cut = np.empty((m, nq, ref.n))
            for k, c in enumerate(self.cut_ids):
                cd = cdata[c]
                nqi = cd.vrule.n
                self.pts_cut[k, :nqi] = cd.vrule.points
                self.pts_cut[k, nqi:] = cd.cell.centroid
                self.w_cut[k, :nqi] = cd.vrule.weights
                self.phi_cut[k, :nqi] = cd.table.phi_vol
                self.phix_cut[k, :nqi] = cd.table.phix_vol
                self.phiy_cut[k, :nqi] = cd.table.phiy_vol
                pad = cd.table.eval_at(cd.cell.centroid[None, :])
                gx, gy = cd.table.eval_grad_at(cd.cell.centroid[None, :])
                self.phi_cut[k, nqi:] = pad
                self.phix_cut[k, nqi:] = gx
                self.phiy_cut[k, nqi:] = gy
        else:
            self.pts_cut = np.zeros((0, 0, 2))
            self.w_cut = np.zeros((0, 0))
            self.phi_cut = np.zeros((0, 0, ref.n))
            self.phix_cut = self.phiy_cut = self.phi_cut

        self._build_faces(bcs)
        self.plan = build_merge_plan(mesh, cdata, ref)
        self._build_limiter_support()

    # -- faces --
    def _build_faces(self, bcs):
        mesh, cdata = self.mesh, self.cdata
        ids = mesh.ids
        seen = set()
        fl, fr, fpts, fw, fn, fphiL, fphiR = [], [], [], [], [], [], []
        groups = {}
        for ij in mesh.order:
            a_id = ids[ij]
            cell = mesh.cells[ij]
            for eidx, e in enumerate(cell.edges):
                sr = cdata[a_id].srules[eidx]
                if e.tag[0] == "interior":
                    b_ij = e.tag[1]
                    b_id = ids[b_ij]
                    key = (min(a_id, b_id), max(a_id, b_id))
                    if key in seen:
                        continue
                    seen.add(key)
                    back = [f for f in mesh.cells[b_ij].edges
                            if f.tag == ("interior", ij)][0]
                    shift = back.points[-1] - e.points[0]
                    fl.append(a_id)
                    fr.append(b_id)
                    fpts.append(sr.points)
                    fw.append(sr.weights)
                    fn.append(sr.normals)
                    fphiL.append(cdata[a_id].table.phi_surf[eidx])
                    fphiR.append(cdata[b_id].table.eval_at(sr.points + shift))
                else:
                    key = f"{e.tag[0]}:{e.tag[1]}"
                    spec = bcs.get(key)
                    if spec is None:
                        raise KeyError(f"no boundary condition for {key!r}")
                    g = groups.setdefault(key, {"spec": spec, "cells": [],
                                                "pts": [], "w": [], "n": [],
                                                "phi": []})
                    g["cells"].append(a_id)
                    g["pts"].append(sr.points)
                    g["w"].append(sr.weights)
                    g["n"].append(sr.normals)
                    g["phi"].append(cdata[a_id].table.phi_surf[eidx])

        def _stack(xs, empty_shape):
            return np.stack(xs) if xs else np.zeros(empty_shape)

        ns = self.p + 1
        K = self.n_modes
        self.faces = FaceBatch(
            L=np.array(fl, dtype=int), R=np.array(fr, dtype=int),
            pts=_stack(fpts, (0, ns, 2)), w=_stack(fw, (0, ns)),
            n=_stack(fn, (0, ns, 2)),
            phiL=_stack(fphiL, (0, ns, K)), phiR=_stack(fphiR, (0, ns, K)),
        )
        self.bc_batches = [
            BCBatch(key=k, spec=g["spec"],
                    cells=np.array(g["cells"], dtype=int),
                    pts=np.stack(g["pts"]), w=np.stack(g["w"]),
                    n=np.stack(g["n"]), phi=np.stack(g["phi"]))
            for k, g in sorted(groups.items())
        ]

    # -- limiter support --
    def _build_limiter_support(self):
        mesh = self.mesh
        ids = mesh.ids
        nc = mesh.n_cells
        axis = np.full((nc, 4), -1, dtype=int)   # +x, -x, +y, -y
        for ij in mesh.order:
            i, j = ij
            c = ids[ij]
            for k, (di, dj) in enumerate(((1, 0), (-1, 0), (0, 1), (0, -1))):
                nb = (i + di, j + dj)
                if nb in ids:
                    axis[c, k] = ids[nb]
        self.axis_nbrs = axis
        whole = self.is_whole
        ok = (axis >= 0).all(axis=1)
        nb_whole = np.ones(nc, bool)
        for k in range(4):
            has = axis[:, k] >= 0
            nb_whole &= has & whole[np.where(has, axis[:, k], 0)]
        self.regular_stencil = ok & whole & nb_whole

        adj = [[] for _ in range(nc)]
        for a, b in zip(self.faces.L, self.faces.R):
            adj[a].append(b)
            adj[b].append(a)
        counts = np.array([len(a) for a in adj])
        self.adj_indptr = np.concatenate([[0], np.cumsum(counts)])
        self.adj_indices = np.array(
            [b for a in adj for b in a], dtype=int)
        maxdeg = int(counts.max()) if nc else 0
        self.adj_padded = np.tile(np.arange(nc)[:, None], (1, max(maxdeg, 1)))
        for c, nbrs in enumerate(adj):
            self.adj_padded[c, :len(nbrs)] = nbrs

        if self.p >= 1:
            gm = np.empty((nc, 2, 2))
            for c, cd in enumerate(self.cdata):
                gm[c, 0, 0] = cd.table.phix_vol[0, 1]
                gm[c, 0, 1] = cd.table.phix_vol[0, 2]
                gm[c, 1, 0] = cd.table.phiy_vol[0, 1]
                gm[c, 1, 1] = cd.table.phiy_vol[0, 2]
            self.grad_mat = gm                     # grad U = gm @ c_{1:3}
            self.grad_mat_inv = np.linalg.inv(gm)

        # positivity check matrices: volume + surface points per cell
        if len(self.whole_ids):
            cd = self.cdata[self.whole_ids[0]]
            self.chk_whole = np.concatenate(
                [cd.table.phi_vol] + list(cd.table.phi_surf))
        else:
            self.chk_whole = np.zeros((0, self.n_modes))
        if len(self.cut_ids):
            chks = []
            for c in self.cut_ids:
                cd = self.cdata[c]
                chks.append(np.concatenate([cd.table.phi_vol]
                                           + list(cd.table.phi_surf)))
            nmax = max(ch.shape[0] for ch in chks)
            self.chk_cut = np.stack([
                np.concatenate([ch, np.repeat(ch[:1], nmax - ch.shape[0],
                                              axis=0)])
                for ch in chks])
        else:
            self.chk_cut = np.zeros((0, 0, self.n_modes))

    # -- projections & evaluation --
    def project(self, fn):
        """L2-project fn(pts)->(...,m) onto every cell's basis."""
        probe = fn(np.zeros((1, 2)))
        m = probe.shape[-1]
        C = np.zeros((self.mesh.n_cells, self.n_modes, m))
        if len(self.whole_ids):
            vals = fn(self.pts_whole)
            wphi = self.w_whole[:, None] * self.phi_whole
            C[self.whole_ids] = np.einsum("qk,cqm->ckm", wphi, vals) \
                / self.volumes[self.whole_ids, None, None]
        if len(self.cut_ids):
            vals = fn(self.pts_cut)
            C[self.cut_ids] = np.einsum(
                "cq,cqk,cqm->ckm", self.w_cut, self.phi_cut, vals) \
                / self.volumes[self.cut_ids, None, None]
        return C

    def eval_volume(self, C):
        """Solution values at all volume quadrature points (two groups)."""
        Uw = np.einsum("qk,ckm->cqm", self.phi_whole, C[self.whole_ids])
        Uc = np.einsum("cqk,ckm->cqm", self.phi_cut, C[self.cut_ids])
        return Uw, Uc

    def mass(self, C):
        """Per-variable totals sum_K |K| c_0."""
        return self.volumes @ C[:, 0, :]


def _scatter_add(target, ids, contrib):
    nc, K, m = target.shape
    if len(ids) == 0:
        return
    km = K * m
    flat_ids = (ids[:, None] * km + np.arange(km)[None, :]).ravel()
    acc = np.bincount(flat_ids, weights=contrib.reshape(len(ids), km).ravel(),
                      minlength=nc * km)
    target += acc.reshape(nc, K, m)


def compute_rhs(ctx, law, flux_name, C, t):
    """dc/dt for all cells; C has shape (n_cells, K, m)."""
    nc, K, m = C.shape
    vol = np.zeros_like(C)
    surf = np.zeros_like(C)

    if len(ctx.whole_ids):
        U = np.einsum("qk,ckm->cqm", ctx.phi_whole, C[ctx.whole_ids])
        Fx, Fy = law.phys_flux(U, ctx.pts_whole)
        vol[ctx.whole_ids] = (
            np.einsum("q,qk,cqm->ckm", ctx.w_whole, ctx.phix_whole, Fx)
            + np.einsum("q,qk,cqm->ckm", ctx.w_whole, ctx.phiy_whole, Fy))
    if len(ctx.cut_ids):
        U = np.einsum("cqk,ckm->cqm", ctx.phi_cut, C[ctx.cut_ids])
        Fx, Fy = law.phys_flux(U, ctx.pts_cut)
        vol[ctx.cut_ids] = (
            np.einsum("cq,cqk,cqm->ckm", ctx.w_cut, ctx.phix_cut, Fx)
            + np.einsum("cq,cqk,cqm->ckm", ctx.w_cut, ctx.phiy_cut, Fy))

    f = ctx.faces
    if len(f.L):
        Um = np.einsum("fqk,fkm->fqm", f.phiL, C[f.L])
        Up = np.einsum("fqk,fkm->fqm", f.phiR, C[f.R])
        Fst = law.num_flux(flux_name, Um, Up, f.n, f.pts)
        _scatter_add(surf, f.L,
                     np.einsum("fq,fqk,fqm->fkm", f.w, f.phiL, Fst))
        _scatter_add(surf, f.R,
                     -np.einsum("fq,fqk,fqm->fkm", f.w, f.phiR, Fst))

    for g in ctx.bc_batches:
        Um = np.einsum("fqk,fkm->fqm", g.phi, C[g.cells])
        spec = g.spec
        if spec.kind == "reflect":
            Fst = law.wall_flux(Um, g.n, g.pts)
        elif spec.kind == "extrapolate":
            Fst = law.normal_flux(Um, g.n, g.pts)
        elif spec.kind == "prescribed":
            ghost = np.broadcast_to(spec.state, Um.shape)
            Fst = law.num_flux(flux_name, Um, ghost, g.n, g.pts)
        elif spec.kind == "exact":
            if spec.static:
                if g.ghost_cache is None:
                    g.ghost_cache = spec.fn(g.pts, t)
                ghost = g.ghost_cache
            else:
                ghost = spec.fn(g.pts, t)
            Fst = law.num_flux(flux_name, Um, ghost, g.n, g.pts)
        else:
            raise ValueError(f"unknown BC kind {spec.kind!r}")
        _scatter_add(surf, g.cells,
                     np.einsum("fq,fqk,fqm->fkm", g.w, g.phi, Fst))

    return (vol - surf) / ctx.volumes[:, None, None]


def stable_dt(p, ax, ay, dx, dy, cfl=0.9):
    """dt = cfl / ((2p+1)(|a|/dx + |b|/dy)); background spacings only."""
    return cfl / ((2 * p + 1) * (ax / dx + ay / dy))


# ---------------------------------------------------------------------------
# time stepping

LSRK4_A = (0.0,
           -567301805773.0 / 1357537059087.0,
           -2404267990393.0 / 2016746695238.0,
           -3550918686646.0 / 2091501179385.0,
           -1275806237668.0 / 842570457699.0)
LSRK4_B = (1432997174477.0 / 9575080441755.0,
           5161836677717.0 / 13612068292357.0,
           1720146321549.0 / 2090206949498.0,
           3134564353537.0 / 4481467310338.0,
           2277821191437.0 / 14882151754819.0)
LSRK4_C = (0.0,
           1432997174477.0 / 9575080441755.0,
           2526269341429.0 / 6820363962896.0,
           2006345519317.0 / 3224310063776.0,
           2802321613138.0 / 2924317926251.0)


def scheme_for_p(p):
    if p <= 1:
        return "ssp2"
    if p == 2:
        return "ssp3"
    if p == 3:
        return "rk4"
    return "lsrk4"


def step(ctx, law, flux_name, C, t, dt, post, scheme):
    """One full time step; `post` stabilizes each stage (SRD + limiters)."""

    def L(state, tau):
        return compute_rhs(ctx, law, flux_name, state, tau)

    if scheme == "fe":
        return post(C + dt * L(C, t))
    if scheme == "ssp2":
        u1 = post(C + dt * L(C, t))
        u2 = post(u1 + dt * L(u1, t + dt))
        return 0.5 * C + 0.5 * u2
    if scheme == "ssp3":
        u1 = post(C + dt * L(C, t))
        u2 = post(u1 + dt * L(u1, t + dt))
        u2 = 0.75 * C + 0.25 * u2
        u3 = post(u2 + dt * L(u2, t + 0.5 * dt))
        return (1.0 / 3.0) * C + (2.0 / 3.0) * u3
    if scheme == "rk4":
        k1 = L(C, t)
        v1 = post(C + 0.5 * dt * k1)
        k2 = L(v1, t + 0.5 * dt)
        v2 = post(C + 0.5 * dt * k2)
        k3 = L(v2, t + 0.5 * dt)
        v3 = post(C + dt * k3)
        k4 = L(v3, t + dt)
        return post(C + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))
    if scheme == "lsrk4":
        u = C
        du = np.zeros_like(C)
        for a, b, c in zip(LSRK4_A, LSRK4_B, LSRK4_C):
            du = a * du + dt * L(u, t + c * dt)
            u = post(u + b * du)
        return u
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass
class RunResult:
    C: np.ndarray
    t: float
    steps: int
    steady_residual: float = np.inf
    mass_history: list = field(default_factory=list)
    dt_history: list = field(default_factory=list)
    reached_steady: bool = False


def run(ctx, law, flux_name, C0, t0=0.0, t_final=None, steady_tol=None,
        cfl=0.9, max_steps=2_000_000, post=None, mass_cadence=0,
        on_step=None):
    """Advance to t_final (last step truncated to land exactly) or until the
    steady criterion max |c^{n+1} - c^n| < steady_tol is met, whichever is
    requested.  Raises SolverBlowup on non-finite states."""
    if post is None:
        post = lambda C: apply_srd(ctx.plan, C)
    scheme = scheme_for_p(ctx.p)
    C = C0.copy()
    t = float(t0)
    res = RunResult(C, t, 0)
    if t_final is not None and t >= t_final:
        return res
    for nstep in range(1, max_steps + 1):
        ax, ay = law.wavespeeds(ctx, C)
        dt = stable_dt(ctx.p, ax, ay, ctx.mesh.dx, ctx.mesh.dy, cfl)
        last = False
        if t_final is not None and t + dt >= t_final - 1e-14 * max(1.0, abs(t_final)):
            dt = t_final - t
            last = True
        Cn = step(ctx, law, flux_name, C, t, dt, post, scheme)
        if not np.all(np.isfinite(Cn)):
            raise SolverBlowup(f"non-finite state at step {nstep}, t={t:.6g}")
        resid = float(np.max(np.abs(Cn - C)))
        C = Cn
        t = t + dt
        res.steps = nstep
        res.steady_residual = resid
        if mass_cadence and nstep % mass_cadence == 0:
            res.mass_history.append((t, ctx.mass(C)))
        if on_step is not None:
            on_step(nstep, t, C, resid)
        if steady_tol is not None and resid < steady_tol:
            res.reached_steady = True
            break
        if last:
            break
    else:
        raise MaxStepsExceeded(f"no termination after {max_steps} steps")
    res.C = C
    res.t = t
    return res
