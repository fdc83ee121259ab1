"""Per-cell orthonormal polynomial bases.

The reference basis spans S^p([0,1]^2) and is orthonormal under the plain L2
inner product there; it is the Gram-Schmidt result on monomials ordered
{1, xi, eta, xi^2, xi*eta, eta^2, ...}, which works out to products of shifted
Legendre polynomials.  On each cell the reference values at quadrature points
(mapped through the cell bounding box) form a Vandermonde-like matrix V; the
reduced QR of W^{1/2} V in the volume-normalized discrete inner product gives
basis values directly, and R^{-1} transports gradients and surface values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import RankDeficientError

RANK_TOL = 1e-12


def n_modes(p):
    """Dimension of S^p in 2D: (p+1)(p+2)/2."""
    return (p + 1) * (p + 2) // 2


class ReferenceBasis:
    """Orthonormal basis of S^p([0,1]^2) with the constant mode first."""

    def __init__(self, p):
        self.p = int(p)
        self.pairs = [(d - b, b) for d in range(p + 1) for b in range(d + 1)]
        self.scales = np.array([
            np.sqrt((2 * a + 1) * (2 * b + 1)) for a, b in self.pairs
        ])
        eye = np.eye(p + 1)
        self._c = eye
        self._dc = npleg.legder(eye, axis=0) if p > 0 else np.zeros((1, 1))

    @property
    def n(self):
        return len(self.pairs)

    def _leg_all(self, t, deriv=False):
        t = np.asarray(t, float)
        if deriv and self.p == 0:
            return np.zeros((1,) + t.shape)
        if deriv:
            return 2.0 * npleg.legval(2.0 * t - 1.0, self._dc)
        return npleg.legval(2.0 * t - 1.0, self._c)  # (p+1, ...) = L_k(2t-1)

    def eval(self, xi, eta):
        """Values of all modes; returns shape xi.shape + (n,)."""
        Lx = self._leg_all(xi)
        Ly = self._leg_all(eta)
        out = np.stack([Lx[a] * Ly[b] for a, b in self.pairs], axis=-1)
        return out * self.scales

    def eval_grad(self, xi, eta):
        """(d/dxi, d/deta) of all modes in reference coordinates."""
        Lx, Ly = self._leg_all(xi), self._leg_all(eta)
        dLx, dLy = self._leg_all(xi, deriv=True), self._leg_all(eta, deriv=True)
        gx = np.stack([dLx[a] * Ly[b] for a, b in self.pairs], axis=-1)
        gy = np.stack([Lx[a] * dLy[b] for a, b in self.pairs], axis=-1)
        return gx * self.scales, gy * self.scales


@dataclass
class BBoxMap:
    xmin: float
    ymin: float
    dx: float
    dy: float

    def to_ref(self, pts):
        pts = np.asarray(pts, float)
        return ((pts[..., 0] - self.xmin) / self.dx,
                (pts[..., 1] - self.ymin) / self.dy)


@dataclass
class BasisTable:
    """Orthonormal basis data for one cell (or merging neighborhood)."""

    bbox: BBoxMap
    ref: ReferenceBasis
    R: np.ndarray
    Rinv: np.ndarray
    phi_vol: np.ndarray       # (n_q, K) values at volume points
    phix_vol: np.ndarray
    phiy_vol: np.ndarray
    phi_surf: list            # per edge: (n_s, K)

    def eval_at(self, pts):
        xi, eta = self.bbox.to_ref(pts)
        return self.ref.eval(xi, eta) @ self.Rinv

    def eval_grad_at(self, pts):
        xi, eta = self.bbox.to_ref(pts)
        gx, gy = self.ref.eval_grad(xi, eta)
        return (gx @ self.Rinv) / self.bbox.dx, (gy @ self.Rinv) / self.bbox.dy


def orthonormalize(V, weights):
    """QR step of the weighted Vandermonde matrix.

    weights must sum to 1 (the volume-normalized discrete inner product).
    Returns (R, Rinv) with positive diagonal so bases are deterministic.
    """
    if V.shape[0] < V.shape[1]:
        raise RankDeficientError(
            f"{V.shape[0]} quadrature points cannot resolve "
            f"{V.shape[1]} modes"
        )
    A = np.sqrt(weights)[:, None] * V
    _, R = np.linalg.qr(A, mode="reduced")
    d = np.abs(np.diag(R))
    if d.min() < RANK_TOL * d.max():
        raise RankDeficientError(
            f"R diagonal ratio {d.min() / d.max():.3e}; quadrature rule "
            "cannot resolve the basis"
        )
    sign = np.sign(np.diag(R))
    R = sign[:, None] * R
    Rinv = np.linalg.solve(R, np.eye(len(R)))
    return R, Rinv


def build_cell_basis(cell, vrule, srules, ref):
    """Orthonormal basis values/gradients at a cell's quadrature points.

    The discrete inner product is <f,g> = (1/|K|) sum_q w_q f g, so the
    constant mode is phi_0 = 1 on every cell regardless of its size.
    """
    x0, y0, bdx, bdy = cell.bbox
    bbox = BBoxMap(x0, y0, bdx, bdy)
    xi, eta = bbox.to_ref(vrule.points)
    V = ref.eval(xi, eta)
    wn = vrule.weights / cell.volume
    R, Rinv = orthonormalize(V, wn)
    gx, gy = ref.eval_grad(xi, eta)
    phi = V @ Rinv
    phix = (gx @ Rinv) / bdx
    phiy = (gy @ Rinv) / bdy
    phi_surf = []
    for sr in srules:
        sxi, seta = bbox.to_ref(sr.points)
        phi_surf.append(ref.eval(sxi, seta) @ Rinv)
    return BasisTable(bbox, ref, R, Rinv, phi, phix, phiy, phi_surf)


def evaluate_solution(coeffs, table, where="volume", edge=None):
    """U at stored quadrature points: sum_k c_k phi_k.

    coeffs has shape (K,) or (K, m); returns values per point (and variable).
    """
    if where == "volume":
        return table.phi_vol @ coeffs
    if where == "surface":
        if edge is None:
            return [S @ coeffs for S in table.phi_surf]
        return table.phi_surf[edge] @ coeffs
    raise ValueError(f"unknown evaluation site {where!r}")
