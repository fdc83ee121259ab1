"""Benchmark problem definitions: geometry, initial/boundary conditions and
exact solutions for the four standard experiments plus manufactured
advection tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import euler
from .errors import BisectionFailure
from .geometry import Boundary, CircleArc, LineSegmentGeom, ParamCurve
from .limiters import LimiterConfig
from .solver import AdvectionLaw, BCSpec, EulerLaw, quiescent_bc

_erf = np.vectorize(math.erf, otypes=[float])


@dataclass
class ProblemSpec:
    name: str
    law: object
    domain: tuple
    boundary: object                  # Boundary or None
    bcs: dict
    ic: object                        # pts (...,2) -> (...,m)
    exact: object = None              # (pts, t) -> (...,m)
    t_final: float = None
    steady: bool = False
    flux: str = "upwind"
    limiter: LimiterConfig = None
    periodic_x: bool = False
    periodic_y: bool = False
    error_map: object = None          # U (...,m) -> (...,k) for norms
    notes: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# geometry factories

def circle_boundary(center, radius, fluid_inside, name, phase=np.pi / 4.0):
    """Closed circle from four quarter arcs; CCW if the fluid is inside.

    The seams are phase-shifted off the axis extremes so they never coincide
    with the points where the circle is tangent to a grid line.
    """
    th = phase + np.linspace(0.0, 2.0 * np.pi, 5)
    if not fluid_inside:
        th = 2.0 * phase - th
    segs = [CircleArc(center, radius, th[k], th[k + 1], name=name)
            for k in range(4)]
    return segs


def annulus_boundary(r_inner=0.75, r_outer=1.25, center=(1.5, 1.5)):
    center = np.asarray(center, float)
    segs = circle_boundary(center, r_outer, True, "outer") \
        + circle_boundary(center, r_inner, False, "inner")

    def inside(pts):
        r = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
        return (r >= r_inner) & (r <= r_outer)

    return Boundary(segs, inside, chains=[[0, 1, 2, 3, 0], [4, 5, 6, 7, 4]])


def half_plane_boundary(y_cut, x_lo, x_hi):
    """Horizontal wall: fluid above y = y_cut (walked with fluid on the
    left, so from low x to high x)."""
    seg = LineSegmentGeom((x_lo, y_cut), (x_hi, y_cut), name="wall")

    def inside(pts):
        return pts[:, 1] >= y_cut

    return Boundary([seg], inside)


# ---------------------------------------------------------------------------
# solid body rotation (scalar advection around an annulus)

OMEGA_SBR = 0.4 * np.pi


def pulse_profile(theta):
    """w(theta) = [erf(5(pi/6 - theta)) + erf(5(pi/6 + theta))] / 2."""
    th = np.mod(np.asarray(theta, float) + np.pi, 2.0 * np.pi) - np.pi
    return 0.5 * (_erf(5.0 * (np.pi / 6.0 - th))
                  + _erf(5.0 * (np.pi / 6.0 + th)))


def solid_body_rotation():
    center = np.array([1.5, 1.5])

    def velocity(pts):
        return OMEGA_SBR * np.stack(
            [-(pts[..., 1] - center[1]), pts[..., 0] - center[0]], axis=-1)

    def exact(pts, t):
        th = np.arctan2(pts[..., 1] - center[1], pts[..., 0] - center[0])
        return pulse_profile(th - np.pi / 2.0 - OMEGA_SBR * t)[..., None]

    return ProblemSpec(
        name="solid_body_rotation",
        law=AdvectionLaw(velocity),
        domain=(0.0, 0.0, 3.0001, 3.0001),
        boundary=annulus_boundary(),
        bcs={"boundary:outer": BCSpec("reflect"),
             "boundary:inner": BCSpec("reflect")},
        ic=lambda pts: exact(pts, 0.0),
        exact=exact,
        t_final=5.0,
        flux="upwind",
    )


# ---------------------------------------------------------------------------
# Ringleb transonic channel flow

RINGLEB_SHIFT = (1.5, 0.0)
RINGLEB_K = (0.7, 1.2)
RINGLEB_QBAR = 0.5


def _ringleb_vars(c, gamma=1.4):
    rho = c ** (2.0 / (gamma - 1.0))
    q2 = 2.0 * (1.0 - c * c) / (gamma - 1.0)
    J = (1.0 / c + 1.0 / (3.0 * c ** 3) + 1.0 / (5.0 * c ** 5)
         - 0.5 * np.log((1.0 + c) / (1.0 - c)))
    return rho, q2, J


def ringleb_xy(k, q, gamma=1.4):
    """Channel coordinates of the hodograph point (k, q).

    The radical uses q/k directly so the wall turning points (q = k) land on
    y = 0 exactly.
    """
    k = np.asarray(k, float)
    q = np.asarray(q, float)
    c = np.sqrt(np.maximum(1.0 - 0.5 * (gamma - 1.0) * q ** 2, 1e-300))
    rho, _, J = _ringleb_vars(c, gamma)
    x = 0.5 / rho * (1.0 / q ** 2 - 2.0 / k ** 2) + 0.5 * J + RINGLEB_SHIFT[0]
    y = np.sqrt(np.maximum(1.0 - (q / k) ** 2, 0.0)) / (k * q * rho) \
        + RINGLEB_SHIFT[1]
    return np.stack([x, y], axis=-1)


def _ringleb_residual(c, xt, yt, gamma=1.4):
    """Isotach circle relation (x - J/2)^2 + y^2 = 1/(2 rho q^2)^2.

    Note: radius uses the flow speed q; the streamline constant k follows
    from the x relation afterwards.
    """
    rho, q2, J = _ringleb_vars(c, gamma)
    b = xt - 0.5 * J
    return b * b + yt * yt - 1.0 / (4.0 * rho * rho * q2 * q2)


def _ringleb_k_of(c, xt, gamma=1.4):
    rho, q2, J = _ringleb_vars(c, gamma)
    denom = 1.0 / q2 - 2.0 * rho * (xt - 0.5 * J)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.sqrt(2.0 / denom)
    return np.where(denom > 0, k, np.inf)


_C_GRID = 1.0 - np.geomspace(1e-5, 0.75, 220)[::-1]


def ringleb_solve(pts, gamma=1.4, band=(0.55, 1.45), require=True):
    """Invert the hodograph map at each point by bisection on c.

    Returns dict of arrays (c, k, q, valid).  Points with no root whose
    streamline constant lies near [k_wall_1, k_wall_2] are flagged invalid
    (raises BisectionFailure when require=True).
    """
    pts = np.atleast_2d(np.asarray(pts, float))
    flat = pts.reshape(-1, 2)
    xt = flat[:, 0] - RINGLEB_SHIFT[0]
    yt = flat[:, 1] - RINGLEB_SHIFT[1]
    n = len(flat)
    lo = np.full(n, np.nan)
    hi = np.full(n, np.nan)
    found = np.zeros(n, bool)
    chunk = 8192
    for s in range(0, n, chunk):
        e = min(n, s + chunk)
        F = _ringleb_residual(_C_GRID[:, None], xt[s:e], yt[s:e], gamma)
        K = _ringleb_k_of(_C_GRID[:, None], xt[s:e], gamma)
        sign_change = F[:-1] * F[1:] < 0
        k_mid = np.minimum(K[:-1], K[1:])
        in_band = (k_mid > band[0]) & (k_mid < band[1])
        cand = sign_change & in_band
        has = cand.any(axis=0)
        first = np.argmax(cand, axis=0)
        found[s:e] = has
        lo[s:e] = _C_GRID[first]
        hi[s:e] = _C_GRID[first + 1]

    a, b = lo.copy(), hi.copy()
    fa = _ringleb_residual(a, xt, yt, gamma)
    for _ in range(70):
        m = 0.5 * (a + b)
        fm = _ringleb_residual(m, xt, yt, gamma)
        take = (fa < 0) == (fm < 0)
        a = np.where(take, m, a)
        fa = np.where(take, fm, fa)
        b = np.where(take, b, m)
    c = 0.5 * (a + b)
    k = _ringleb_k_of(c, xt, gamma)
    q = np.sqrt(2.0 * (1.0 - c * c) / (gamma - 1.0))
    if require and not found.all():
        raise BisectionFailure(
            f"no Ringleb root for {int((~found).sum())} points"
        )
    shape = pts.shape[:-1]
    return {
        "c": c.reshape(shape), "k": k.reshape(shape),
        "q": q.reshape(shape), "valid": found.reshape(shape),
    }


def ringleb_state(pts, gamma=1.4):
    """Exact conserved state at points inside (or on) the channel.

    The flow enters through the subsonic q=0.5 arc at the top and
    accelerates down the channel (v < 0), reaching its maximum Mach number
    where the right wall meets the outflow line y=0.
    """
    sol = ringleb_solve(pts, gamma, require=True)
    c, k, q = sol["c"], sol["k"], sol["q"]
    rho = c ** (2.0 / (gamma - 1.0))
    P = c * c * rho / gamma
    v = q * q / k
    u = np.sqrt(np.maximum(q * q - v * v, 0.0))
    return euler.conserved(rho, -u, -v, P, gamma)


def ringleb_inside(pts, gamma=1.4):
    sol = ringleb_solve(pts, gamma, require=False)
    tol = 1e-11
    return (sol["valid"]
            & (sol["k"] >= RINGLEB_K[0] - tol)
            & (sol["k"] <= RINGLEB_K[1] + tol)
            & (sol["q"] >= RINGLEB_QBAR - tol))


def ringleb_boundary(gamma=1.4):
    k1, k2 = RINGLEB_K
    qb = RINGLEB_QBAR

    # CCW walk with fluid on the left: up the right wall (k2) from its foot,
    # across the inflow arc toward the left wall, down the left wall (k1).
    wall_r = ParamCurve(lambda s: ringleb_xy(k2, k2 + s * (qb - k2), gamma),
                        0.0, 1.0, name="wall_right")
    arc = ParamCurve(lambda s: ringleb_xy(k2 + s * (k1 - k2), qb, gamma),
                     0.0, 1.0, name="inflow_arc")
    wall_l = ParamCurve(lambda s: ringleb_xy(k1, qb + s * (k1 - qb), gamma),
                        0.0, 1.0, name="wall_left")
    return Boundary([wall_r, arc, wall_l],
                    lambda pts: ringleb_inside(pts, gamma),
                    chains=[[0, 1, 2]])


def ringleb(gamma=1.4):
    law = EulerLaw(gamma)

    def exact(pts, t=0.0):
        return ringleb_state(pts, gamma)

    def entropy(U):
        rho, _, _, P = euler.primitives(U, gamma)
        return (P / rho ** gamma)[..., None]

    return ProblemSpec(
        name="ringleb",
        law=law,
        domain=(0.0, 0.0, 2.75, 2.75),
        boundary=ringleb_boundary(gamma),
        bcs={"boundary:wall_left": BCSpec("reflect"),
             "boundary:wall_right": BCSpec("reflect"),
             "boundary:inflow_arc": BCSpec("exact", fn=exact, static=True),
             "domain:bottom": BCSpec("exact", fn=exact, static=True)},
        ic=lambda pts: exact(pts),
        exact=exact,
        steady=True,
        flux="roe",
        error_map=entropy,
    )


# ---------------------------------------------------------------------------
# pressure pulse scattered by five discs

def pressure_pulse(gamma=1.4, obstacle_radius=1.2):
    centers = [(10.0 + 5.0 * np.cos(ph), 10.0 + 5.0 * np.sin(ph))
               for ph in (2.0 * np.pi * k / 5.0 - 2.0 * np.pi / 3.0
                          for k in range(5))]
    segs = []
    chains = []
    for k, c in enumerate(centers):
        s0 = len(segs)
        segs += circle_boundary(np.asarray(c), obstacle_radius, False,
                                f"disc{k}")
        chains.append([s0, s0 + 1, s0 + 2, s0 + 3, s0])

    def inside(pts):
        ok = np.ones(len(pts), bool)
        for c in centers:
            ok &= np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1]) \
                >= obstacle_radius
        return ok

    boundary = Boundary(segs, inside, chains=chains)
    bcoef = math.log(2.0) / 0.2 ** 2

    def ic(pts):
        r2 = (pts[..., 0] - 10.0) ** 2 + (pts[..., 1] - 10.0) ** 2
        P = 1.0 / gamma + 1e-4 * np.exp(-bcoef * r2)
        rho = 1.0 - 1.0 / gamma + P
        z = np.zeros_like(P)
        return euler.conserved(rho, z, z, P, gamma)

    law = EulerLaw(gamma)
    bcs = {f"boundary:disc{k}": BCSpec("reflect") for k in range(5)}
    for side in ("left", "right", "bottom", "top"):
        bcs[f"domain:{side}"] = quiescent_bc(gamma)

    return ProblemSpec(
        name="pressure_pulse",
        law=law,
        domain=(0.0, 0.0, 20.0, 20.0),
        boundary=boundary,
        bcs=bcs,
        ic=ic,
        t_final=6.0,
        flux="roe",
        notes={"obstacle_centers": centers,
               "obstacle_radius": obstacle_radius},
    )


# ---------------------------------------------------------------------------
# double Mach reflection

DMR_ANGLE = np.pi / 6.0
DMR_X0 = 1.0 / 6.0


def dmr_states(gamma=1.4):
    left = euler.conserved(8.0, 8.25, 0.0, 116.5, gamma)
    right = euler.conserved(1.4, 0.0, 0.0, 1.0, gamma)
    return left, right


def double_mach(gamma=1.4):
    tan_a = np.tan(DMR_ANGLE)
    x1 = 2.5
    exit_y = (x1 - DMR_X0) * tan_a
    ramp = LineSegmentGeom((DMR_X0, 0.0), (x1, exit_y), name="wedge")

    def inside(pts):
        return pts[:, 1] >= (pts[:, 0] - DMR_X0) * tan_a

    boundary = Boundary([ramp], inside)
    left, right = dmr_states(gamma)

    def ic(pts):
        mask = pts[..., 0] < DMR_X0
        out = np.where(mask[..., None], left, right)
        return out

    def bj_direction(centroids):
        d = np.tile(np.array([1.0, 0.0]), (len(centroids), 1))
        on_ramp = centroids[:, 0] > DMR_X0
        d[on_ramp] = (np.cos(DMR_ANGLE), np.sin(DMR_ANGLE))
        return d

    return ProblemSpec(
        name="double_mach",
        law=EulerLaw(gamma),
        domain=(0.0, 0.0, 2.5, 1.75),
        boundary=boundary,
        bcs={"boundary:wedge": BCSpec("reflect"),
             "domain:left": BCSpec("prescribed", state=left),
             "domain:right": BCSpec("prescribed", state=right),
             "domain:top": BCSpec("extrapolate"),
             "domain:bottom": BCSpec("reflect")},
        ic=ic,
        t_final=0.2,
        flux="llf",
        limiter=LimiterConfig(slope=True, positivity=True, gamma=gamma,
                              bj_direction=bj_direction),
    )


# ---------------------------------------------------------------------------
# manufactured advection

def manufactured_advection(direction=(1.0, 0.5), profile=None,
                           domain=(0.0, 0.0, 1.0, 1.0), periodic=True):
    """Constant-velocity advection with a translated exact solution."""
    a = np.asarray(direction, float)
    if profile is None:
        Lx = domain[2] - domain[0]
        Ly = domain[3] - domain[1]

        def profile(pts):
            return (np.sin(2 * np.pi * pts[..., 0] / Lx)
                    * np.cos(2 * np.pi * pts[..., 1] / Ly))

    def exact(pts, t):
        shifted = pts - a * t
        return profile(shifted)[..., None]

    bcs = {}
    if not periodic:
        fn = exact
        for side in ("left", "right", "bottom", "top"):
            bcs[f"domain:{side}"] = BCSpec("exact", fn=fn)

    return ProblemSpec(
        name="manufactured_advection",
        law=AdvectionLaw(lambda pts: np.broadcast_to(
            a, pts.shape[:-1] + (2,))),
        domain=domain,
        boundary=None,
        bcs=bcs,
        ic=lambda pts: exact(pts, 0.0),
        exact=exact,
        t_final=1.0,
        flux="upwind",
        periodic_x=periodic,
        periodic_y=periodic,
    )


REGISTRY = {
    "solid_body_rotation": solid_body_rotation,
    "ringleb": ringleb,
    "pressure_pulse": pressure_pulse,
    "double_mach": double_mach,
    "advection": manufactured_advection,
}
