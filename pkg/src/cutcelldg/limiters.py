"""Shock-capturing limiters for p=1 Euler runs.

Gradients are limited in characteristic variables: cells whose four axis
neighbors are all whole cells use the MC limiter per grid direction; cells
with an irregular stencil use a Barth-Jespersen factor that keeps the linear
reconstruction, evaluated at every edge-neighbor centroid, inside the range
of the surrounding cell averages.  A Zhang-Shu style scaling enforces
positive density and pressure at all volume and surface quadrature points;
the same scaling is applied to the merged-neighborhood polynomials before
they are redistributed back to the base grid.

All limiters leave the cell average (mode 0) untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import euler
from .errors import PositivityFailure


@dataclass
class LimiterConfig:
    slope: bool = True
    positivity: bool = True
    characteristic: bool = True      # conserved-variable limiting if False
    eps: float = 1e-12
    bj_direction: object = None      # centroids (n,2) -> unit dirs (n,2)
    gamma: float = 1.4


def minmod3(a, b, c):
    """Componentwise minmod of three arrays."""
    pos = (a > 0) & (b > 0) & (c > 0)
    neg = (a < 0) & (b < 0) & (c < 0)
    m = np.minimum(np.minimum(np.abs(a), np.abs(b)), np.abs(c))
    return np.where(pos, m, np.where(neg, -m, 0.0))


def _frames(avg, dirs, gamma, characteristic, m):
    """Right/left eigenvector stacks, or identities for scalar/conserved."""
    if m == 1 or not characteristic:
        n = len(avg)
        eye = np.broadcast_to(np.eye(m), (n, m, m))
        return eye, eye
    return euler.eigenvectors(avg, dirs, gamma)


def cell_gradients(ctx, C):
    """Per-cell solution gradient (constant for p=1): (nc, 2, m)."""
    return np.einsum("cde,cem->cdm", ctx.grad_mat, C[:, 1:3, :])


def write_gradients(ctx, C, grads, mask):
    C = C.copy()
    new = np.einsum("cde,cem->cdm", ctx.grad_mat_inv[mask], grads[mask])
    C[mask, 1:3, :] = new
    return C


def mc_limit(ctx, C, cfg):
    """MC-limited gradients on regular-stencil cells; returns (grads, mask).

    Per direction: R minmod(2 L dU_fwd / dx, L U_x, 2 L dU_bwd / dx).
    """
    mask = ctx.regular_stencil.copy()
    grads = cell_gradients(ctx, C)
    if not mask.any():
        return grads, mask
    ids = np.nonzero(mask)[0]
    avg = C[:, 0, :]
    m = avg.shape[1]
    h = (ctx.mesh.dx, ctx.mesh.dy)
    for d, (fwd_k, bwd_k) in enumerate(((0, 1), (2, 3))):
        dirs = np.zeros((len(ids), 2))
        dirs[:, d] = 1.0
        R, L = _frames(avg[ids], dirs, cfg.gamma, cfg.characteristic, m)
        dfwd = (avg[ctx.axis_nbrs[ids, fwd_k]] - avg[ids]) / h[d]
        dbwd = (avg[ids] - avg[ctx.axis_nbrs[ids, bwd_k]]) / h[d]
        wf = 2.0 * np.einsum("cij,cj->ci", L, dfwd)
        wb = 2.0 * np.einsum("cij,cj->ci", L, dbwd)
        wg = np.einsum("cij,cj->ci", L, grads[ids, d, :])
        lim = minmod3(wf, wg, wb)
        grads[ids, d, :] = np.einsum("cij,cj->ci", R, lim)
    return grads, mask


def bj_factor(w_avg, w_nbrs, w_recon):
    """Barth-Jespersen scaling per characteristic component.

    w_avg (c, m); w_nbrs (c, n, m) neighbor averages (self-padded);
    w_recon (c, n, m) reconstruction at the neighbor centroids.
    Returns alpha (c, m) in [0, 1].
    """
    lo = np.minimum(w_nbrs.min(axis=1), w_avg)
    hi = np.maximum(w_nbrs.max(axis=1), w_avg)
    d = w_recon - w_avg[:, None, :]
    scale = np.maximum(np.abs(hi), np.abs(lo)) + 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        a_up = (hi[:, None, :] - w_avg[:, None, :]) / d
        a_dn = (lo[:, None, :] - w_avg[:, None, :]) / d
    alpha = np.where(np.abs(d) <= 1e-14 * scale[:, None, :], 1.0,
                     np.where(d > 0, a_up, a_dn))
    return np.clip(alpha, 0.0, 1.0).min(axis=1)


def bj_limit(ctx, C, cfg, mask=None):
    """Characteristic Barth-Jespersen gradients; returns (grads, mask)."""
    if mask is None:
        mask = ~ctx.regular_stencil
    grads = cell_gradients(ctx, C)
    if not mask.any():
        return grads, mask
    ids = np.nonzero(mask)[0]
    avg = C[:, 0, :]
    m = avg.shape[1]

    if cfg.bj_direction is not None:
        dirs = cfg.bj_direction(ctx.centroids[ids])
    else:
        dirs = np.tile(np.array([1.0, 0.0]), (len(ids), 1))
    R, L = _frames(avg[ids], dirs, cfg.gamma, cfg.characteristic, m)

    nbr = ctx.adj_padded[ids]

    w_avg = np.einsum("cij,cj->ci", L, avg[ids])
    w_nbr = np.einsum("cij,cnj->cni", L, avg[nbr])
    g_char = np.einsum("cij,cdj->cdi", L, grads[ids])
    dx = ctx.centroids[nbr] - ctx.centroids[ids][:, None, :]
    w_recon = w_avg[:, None, :] + np.einsum("cnd,cdi->cni", dx, g_char)
    alpha = bj_factor(w_avg, w_nbr, w_recon)
    g_char = g_char * alpha[:, None, :]
    grads[ids] = np.einsum("cij,cdj->cdi", R, g_char)
    return grads, mask


def slope_limit(ctx, C, cfg):
    """MC on regular stencils plus BJ on irregular ones (p=1 only)."""
    g_mc, m_mc = mc_limit(ctx, C, cfg)
    C = write_gradients(ctx, C, g_mc, m_mc)
    g_bj, m_bj = bj_limit(ctx, C, cfg)
    return write_gradients(ctx, C, g_bj, m_bj)


# ---------------------------------------------------------------------------
# positivity

def _pressure_theta(avg, vals, gamma, eps):
    """Largest theta with P(avg + theta (vals - avg)) >= eps per point.

    Uses the quadratic h(theta) = (gamma-1)(E rho - |m|^2/2) - eps rho, which
    is P*rho - eps*rho and shares its sign with P - eps once rho > 0.
    """
    D = vals - avg[..., None, :]
    rb, mb_x, mb_y, Eb = (avg[..., None, k] for k in range(4))
    dr, dmx, dmy, dE = (D[..., k] for k in range(4))
    g1 = gamma - 1.0
    A = g1 * (dE * dr - 0.5 * (dmx ** 2 + dmy ** 2))
    B = g1 * (Eb * dr + dE * rb - (mb_x * dmx + mb_y * dmy)) - eps * dr
    Cc = g1 * (Eb * rb - 0.5 * (mb_x ** 2 + mb_y ** 2)) - eps * rb
    Cc = np.broadcast_to(Cc, A.shape)

    h1 = A + B + Cc                      # h at theta = 1
    need = h1 < 0.0
    theta = np.ones_like(h1)
    if np.any(need):
        a, b, c = A[need], B[need], Cc[need]
        lin = np.abs(a) < 1e-14 * (np.abs(b) + np.abs(c) + 1e-300)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_lin = -c / b
            disc = np.sqrt(np.maximum(b * b - 4.0 * a * c, 0.0))
            r1 = (-b - disc) / (2.0 * a)
            r2 = (-b + disc) / (2.0 * a)
        lo = np.minimum(r1, r2)
        hi = np.maximum(r1, r2)
        root = np.where(lo > 0.0, lo, hi)
        t = np.where(lin, t_lin, root)
        theta[need] = np.clip(np.nan_to_num(t, nan=0.0), 0.0, 1.0)
    return theta.min(axis=-1)


def _admissible_theta(avg, vals, gamma, eps):
    """Density stage then pressure stage; returns the per-cell factor."""
    rho_avg = avg[..., 0]
    rho = vals[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (rho_avg[..., None] - eps) / (rho_avg[..., None] - rho)
    t_rho = np.where(rho < eps, np.clip(ratio, 0.0, 1.0), 1.0).min(axis=-1)
    vals1 = avg[..., None, :] + t_rho[..., None, None] * (vals - avg[..., None, :])
    t_p = _pressure_theta(avg, vals1, gamma, eps)
    return t_rho * t_p


def positivity_limit(ctx, C, cfg):
    """Scale high-order modes toward the cell average until density and
    pressure clear eps at every volume and surface quadrature point."""
    eps = cfg.eps
    gamma = cfg.gamma
    avg = C[:, 0, :]
    rho, _, _, P = euler.primitives(avg, gamma)
    if np.any(rho < eps) or np.any(P < eps):
        bad = int(np.argmin(np.minimum(rho, P)))
        raise PositivityFailure(
            f"cell {ctx.mesh.order[bad]} average inadmissible: "
            f"rho={rho[bad]:.3e} P={P[bad]:.3e}"
        )
    C = C.copy()
    if len(ctx.whole_ids):
        vals = np.einsum("qk,ckm->cqm", ctx.chk_whole, C[ctx.whole_ids])
        th = _admissible_theta(avg[ctx.whole_ids], vals, gamma, eps)
        C[ctx.whole_ids, 1:, :] *= th[:, None, None]
    if len(ctx.cut_ids):
        vals = np.einsum("cqk,ckm->cqm", ctx.chk_cut, C[ctx.cut_ids])
        th = _admissible_theta(avg[ctx.cut_ids], vals, gamma, eps)
        C[ctx.cut_ids, 1:, :] *= th[:, None, None]
    return C


def make_qhat_positivity(gamma, eps=1e-12):
    """Hook limiting the stacked neighborhood polynomials at their member
    quadrature points before refinement."""

    def hook(qhat, phi_chk):
        # qhat (g, K, 4); phi_chk (g, n_chk, K); phi_hat_0 = 1 so the
        # neighborhood average is the zeroth coefficient
        avg = qhat[:, 0, :]
        rho = avg[:, 0]
        P = (gamma - 1.0) * (avg[:, 3]
                             - 0.5 * (avg[:, 1] ** 2 + avg[:, 2] ** 2) / rho)
        if np.any(rho < eps) or np.any(P < eps):
            k = int(np.argmin(np.minimum(rho, P)))
            raise PositivityFailure(
                f"neighborhood average inadmissible: rho={rho[k]:.3e} "
                f"P={P[k]:.3e}"
            )
        vals = np.einsum("gqk,gkm->gqm", phi_chk, qhat)
        th = _admissible_theta(avg, vals, gamma, eps)
        if np.any(th < 1.0):
            qhat = qhat.copy()
            qhat[:, 1:, :] *= th[:, None, None]
        return qhat

    return hook


def make_postprocess(ctx, law, cfg=None):
    """SRD plus limiting, in the order: redistribute (with neighborhood
    positivity), slope-limit the base grid, then base-grid positivity."""
    from .srd import apply_srd

    if cfg is None or not (cfg.slope or cfg.positivity):
        return lambda C: apply_srd(ctx.plan, C)
    hook = make_qhat_positivity(cfg.gamma, cfg.eps) if cfg.positivity else None

    def post(C):
        C = apply_srd(ctx.plan, C, limit_qhat=hook)
        if cfg.slope:
            C = slope_limit(ctx, C, cfg)
        if cfg.positivity:
            C = positivity_limit(ctx, C, cfg)
        return C

    return post
