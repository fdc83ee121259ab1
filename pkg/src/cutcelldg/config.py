"""Run configuration: a single JSON document, flags override file keys."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geometry import Boundary, CircleArc, LineSegmentGeom

DEFAULTS = {
    "problem": None,
    "problem_args": {},
    "geometry": None,
    "p": 1,
    "q": None,               # pairing policy: p=1 -> q=2, else q=p
    "N": None,
    "cfl": 0.9,
    "flux": None,            # problem default when null
    "t_final": None,
    "steady_tol": 1e-13,
    "max_steps": 2_000_000,
    "quad_degree": None,
    "limiter": None,         # {"slope":…, "positivity":…, "characteristic":…}
    "seed": 0,
    "output_dir": None,      # default: env CUTCELLDG_OUTPUT or "."
    "vtk": True,
    "vtk_every": 0,
    "boundary_trace": True,
    "checkpoint_every": 0,
    "mass_cadence": 10,
    "threads": None,
}


def q_for(p, q=None):
    """Boundary-interpolant degree pairing: p=1 uses q=2, otherwise q=p."""
    if q is not None:
        return int(q)
    return 2 if int(p) == 1 else int(p)


def load_config(path=None, overrides=None):
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path) as f:
                doc = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path!r}: {e}")
        unknown = set(doc) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(doc)
    for k, v in (overrides or {}).items():
        if k not in DEFAULTS:
            raise ConfigError(f"unknown config key {k!r}")
        cfg[k] = v
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    p = cfg["p"]
    if not isinstance(p, int) or p < 1:
        raise ConfigError("p must be an integer >= 1 for 2D runs")
    q = q_for(p, cfg["q"])
    if p == 1 and q < 2:
        raise ConfigError("p=1 must be paired with q >= 2")
    if q < 1:
        raise ConfigError("q must be >= 1")
    if cfg["cfl"] <= 0:
        raise ConfigError("cfl must be positive")
    return cfg


# ---------------------------------------------------------------------------
# geometry from a JSON description (closed polyline+arc chains; fluid on the
# left of each oriented segment, inside/outside decided by winding number)

def geometry_from_json(doc):
    segs = []
    for rec in doc["segments"]:
        kind = rec["type"]
        name = rec.get("name", f"seg{len(segs)}")
        if kind == "line":
            segs.append(LineSegmentGeom(rec["a"], rec["b"], name=name))
        elif kind == "arc":
            segs.append(CircleArc(rec["center"], rec["radius"],
                                  rec["theta_start"], rec["theta_end"],
                                  name=name))
        else:
            raise ConfigError(f"unknown segment type {kind!r}")
    chains = doc.get("chains")
    if chains is None:
        chains = [list(range(len(segs))) + [0]]
    for ch in chains:
        if ch[0] != ch[-1]:
            raise ConfigError("JSON geometry chains must be closed"
                              " (first segment repeated last)")

    # dense polylines for the winding-number predicate
    polys = []
    for ch in chains:
        pts = []
        for sid in ch[:-1]:
            seg = segs[sid]
            ss = np.linspace(seg.s_lo, seg.s_hi, 512, endpoint=False)
            pts.append(seg.point(ss))
        polys.append(np.concatenate(pts))

    def inside(pts):
        pts = np.asarray(pts, float)
        wind = np.zeros(len(pts))
        for poly in polys:
            a = poly[None, :, :] - pts[:, None, :]
            b = np.roll(poly, -1, axis=0)[None, :, :] - pts[:, None, :]
            cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
            dot = a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1]
            wind += np.arctan2(cross, dot).sum(axis=1) / (2 * np.pi)
        return np.round(wind) >= 1

    return Boundary(segs, inside, chains=chains)
