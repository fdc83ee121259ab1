"""Compressible Euler physics: fluxes, Roe/LLF interface solvers, and
characteristic frames.

States are conserved variables (rho, rho*u, rho*v, E) on the trailing axis.
All routines are vectorized over arbitrary leading axes.
"""

from __future__ import annotations

import numpy as np

RHO, MX, MY, EN = 0, 1, 2, 3


def primitives(U, gamma):
    rho = U[..., RHO]
    u = U[..., MX] / rho
    v = U[..., MY] / rho
    P = (gamma - 1.0) * (U[..., EN] - 0.5 * rho * (u * u + v * v))
    return rho, u, v, P


def pressure(U, gamma):
    return primitives(U, gamma)[3]


def sound_speed(U, gamma):
    rho, _, _, P = primitives(U, gamma)
    return np.sqrt(gamma * np.maximum(P, 0.0) / rho)


def conserved(rho, u, v, P, gamma):
    rho = np.asarray(rho, float)
    E = P / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)
    return np.stack([rho, rho * u, rho * v, E], axis=-1)


def phys_flux(U, gamma):
    """Fx, Fy with shapes matching U."""
    rho, u, v, P = primitives(U, gamma)
    E = U[..., EN]
    Fx = np.stack([rho * u, rho * u * u + P, rho * u * v, u * (E + P)], axis=-1)
    Fy = np.stack([rho * v, rho * u * v, rho * v * v + P, v * (E + P)], axis=-1)
    return Fx, Fy


def normal_flux(U, n, gamma):
    """F(U) . n."""
    rho, u, v, P = primitives(U, gamma)
    un = u * n[..., 0] + v * n[..., 1]
    E = U[..., EN]
    return np.stack([
        rho * un,
        rho * u * un + P * n[..., 0],
        rho * v * un + P * n[..., 1],
        (E + P) * un,
    ], axis=-1)


def wall_flux(U, n, gamma):
    """Reflecting-wall flux (0, P nx, P ny, 0) from the interior trace."""
    P = pressure(U, gamma)
    z = np.zeros_like(P)
    return np.stack([z, P * n[..., 0], P * n[..., 1], z], axis=-1)


def reflect_state(U, n):
    """Mirror the velocity across the wall plane (ghost state)."""
    un = (U[..., MX] * n[..., 0] + U[..., MY] * n[..., 1])
    out = U.copy()
    out[..., MX] = U[..., MX] - 2.0 * un * n[..., 0]
    out[..., MY] = U[..., MY] - 2.0 * un * n[..., 1]
    return out


def max_wavespeed(Um, Up, n, gamma):
    vn_m = (Um[..., MX] * n[..., 0] + Um[..., MY] * n[..., 1]) / Um[..., RHO]
    vn_p = (Up[..., MX] * n[..., 0] + Up[..., MY] * n[..., 1]) / Up[..., RHO]
    cm = sound_speed(Um, gamma)
    cp = sound_speed(Up, gamma)
    return np.maximum(np.abs(vn_m) + cm, np.abs(vn_p) + cp)


def llf_flux(Um, Up, n, gamma):
    """Local Lax-Friedrichs: mean flux minus lambda_max dissipation."""
    lam = max_wavespeed(Um, Up, n, gamma)
    Fm = normal_flux(Um, n, gamma)
    Fp = normal_flux(Up, n, gamma)
    return 0.5 * (Fm + Fp) - 0.5 * lam[..., None] * (Up - Um)


def _rotate_in(U, n):
    """Momentum components along (n, t) with t = (-ny, nx)."""
    mn = U[..., MX] * n[..., 0] + U[..., MY] * n[..., 1]
    mt = -U[..., MX] * n[..., 1] + U[..., MY] * n[..., 0]
    return np.stack([U[..., RHO], mn, mt, U[..., EN]], axis=-1)


def _rotate_out(F, n):
    fx = F[..., 1] * n[..., 0] - F[..., 2] * n[..., 1]
    fy = F[..., 1] * n[..., 1] + F[..., 2] * n[..., 0]
    return np.stack([F[..., 0], fx, fy, F[..., 3]], axis=-1)


def roe_flux(Um, Up, n, gamma, fallback_count=None):
    """Roe's approximate Riemann solver in the face-normal frame.

    Faces where the Roe average breaks down (non-physical input states or a
    negative averaged sound speed) fall back to LLF; the number of such faces
    is accumulated into fallback_count[0] when given.
    """
    UL = _rotate_in(Um, n)
    UR = _rotate_in(Up, n)
    rhoL, rhoR = UL[..., 0], UR[..., 0]
    uL, uR = UL[..., 1] / rhoL, UR[..., 1] / rhoR
    vL, vR = UL[..., 2] / rhoL, UR[..., 2] / rhoR
    PL = (gamma - 1.0) * (UL[..., 3] - 0.5 * rhoL * (uL ** 2 + vL ** 2))
    PR = (gamma - 1.0) * (UR[..., 3] - 0.5 * rhoR * (uR ** 2 + vR ** 2))
    HL = (UL[..., 3] + PL) / rhoL
    HR = (UR[..., 3] + PR) / rhoR

    bad = (rhoL <= 0) | (rhoR <= 0) | (PL <= 0) | (PR <= 0)
    sqL = np.sqrt(np.where(rhoL > 0, rhoL, 1.0))
    sqR = np.sqrt(np.where(rhoR > 0, rhoR, 1.0))
    wsum = sqL + sqR
    ut = (sqL * uL + sqR * uR) / wsum
    vt = (sqL * vL + sqR * vR) / wsum
    Ht = (sqL * HL + sqR * HR) / wsum
    c2 = (gamma - 1.0) * (Ht - 0.5 * (ut * ut + vt * vt))
    bad |= c2 <= 0
    ct = np.sqrt(np.where(c2 > 0, c2, 1.0))
    rhot = sqL * sqR

    dP = PR - PL
    du = uR - uL
    dv = vR - vL
    drho = rhoR - rhoL
    a1 = (dP - rhot * ct * du) / (2.0 * c2)
    a2 = drho - dP / c2
    a3 = rhot * dv
    a4 = (dP + rhot * ct * du) / (2.0 * c2)

    l1 = np.abs(ut - ct)
    l2 = np.abs(ut)
    l4 = np.abs(ut + ct)

    def wave(a, lam, r0, r1, r2, r3):
        coef = (a * lam)[..., None]
        return coef * np.stack([r0, r1, r2, r3], axis=-1)

    one = np.ones_like(ut)
    zero = np.zeros_like(ut)
    diss = wave(a1, l1, one, ut - ct, vt, Ht - ut * ct)
    diss = diss + wave(a2, l2, one, ut, vt, 0.5 * (ut * ut + vt * vt))
    diss = diss + wave(a3, l2, zero + 0, zero + 0, one, vt)
    diss = diss + wave(a4, l4, one, ut + ct, vt, Ht + ut * ct)

    FL = np.stack([rhoL * uL, rhoL * uL ** 2 + PL, rhoL * uL * vL,
                   uL * (UL[..., 3] + PL)], axis=-1)
    FR = np.stack([rhoR * uR, rhoR * uR ** 2 + PR, rhoR * uR * vR,
                   uR * (UR[..., 3] + PR)], axis=-1)
    F = 0.5 * (FL + FR) - 0.5 * diss
    out = _rotate_out(F, n)
    if np.any(bad):
        if fallback_count is not None:
            fallback_count[0] += int(bad.sum())
        out = np.where(bad[..., None], llf_flux(Um, Up, n, gamma), out)
    return out


def eigenvectors(U, d, gamma):
    """Right/left eigenvector matrices of dF/dU . d at the given states.

    U has shape (..., 4) and d (..., 2) (unit directions).  Returns
    (R, L) with shapes (..., 4, 4) so that L = R^-1 and
    R diag(lam) L = dF/dU . d.
    """
    rho, u, v, P = primitives(U, gamma)
    c = np.sqrt(gamma * P / rho)
    H = (U[..., EN] + P) / rho
    nx, ny = d[..., 0], d[..., 1]
    un = u * nx + v * ny
    ut = -u * ny + v * nx

    shape = rho.shape + (4, 4)
    R = np.empty(shape)
    R[..., 0, 0] = 1.0
    R[..., 0, 1] = 1.0
    R[..., 0, 2] = 0.0
    R[..., 0, 3] = 1.0
    R[..., 1, 0] = u - c * nx
    R[..., 1, 1] = u
    R[..., 1, 2] = -ny
    R[..., 1, 3] = u + c * nx
    R[..., 2, 0] = v - c * ny
    R[..., 2, 1] = v
    R[..., 2, 2] = nx
    R[..., 2, 3] = v + c * ny
    R[..., 3, 0] = H - c * un
    R[..., 3, 1] = 0.5 * (u * u + v * v)
    R[..., 3, 2] = ut
    R[..., 3, 3] = H + c * un

    g1 = gamma - 1.0
    c2 = c * c
    phi2 = 0.5 * g1 * (u * u + v * v)
    b = 1.0 / (2.0 * c2)
    L = np.empty(shape)
    L[..., 0, 0] = b * (phi2 + c * un)
    L[..., 0, 1] = -b * (g1 * u + c * nx)
    L[..., 0, 2] = -b * (g1 * v + c * ny)
    L[..., 0, 3] = b * g1
    L[..., 1, 0] = 1.0 - phi2 / c2
    L[..., 1, 1] = g1 * u / c2
    L[..., 1, 2] = g1 * v / c2
    L[..., 1, 3] = -g1 / c2
    L[..., 2, 0] = -ut
    L[..., 2, 1] = -ny
    L[..., 2, 2] = nx
    L[..., 2, 3] = 0.0
    L[..., 3, 0] = b * (phi2 - c * un)
    L[..., 3, 1] = -b * (g1 * u - c * nx)
    L[..., 3, 2] = -b * (g1 * v - c * ny)
    L[..., 3, 3] = b * g1
    return R, L


def flux_jacobian(U, d, gamma):
    """dF/dU . d assembled from the eigendecomposition (for validation)."""
    rho, u, v, P = primitives(U, gamma)
    c = np.sqrt(gamma * P / rho)
    un = u * d[..., 0] + v * d[..., 1]
    lam = np.stack([un - c, un, un, un + c], axis=-1)
    R, L = eigenvectors(U, d, gamma)
    return np.einsum("...ik,...k,...kj->...ij", R, lam, L)
