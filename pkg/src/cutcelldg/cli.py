"""Batch front door: mesh / run / converge / oned subcommands.

Exit codes: 0 ok, 2 config error, 3 mesh error, 4 solver blowup.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__, diagnostics, io_out, oned
from .config import geometry_from_json, load_config, q_for
from .errors import (
    ConfigError,
    CutCellDGError,
    GeometryError,
    MeshError,
    PositivityFailure,
    SolverBlowup,
)
from .limiters import LimiterConfig, make_postprocess
from .mesh import generate_mesh, mesh_report, mesh_to_json, save_mesh
from .problems import REGISTRY
from .solver import DGContext, run


def _parse_set(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _output_dir(cfg):
    d = cfg["output_dir"] or os.environ.get("CUTCELLDG_OUTPUT", ".")
    os.makedirs(d, exist_ok=True)
    return d


def _mesh_hash(mesh):
    doc = json.dumps(mesh_to_json(mesh), sort_keys=True).encode()
    return hashlib.sha256(doc).hexdigest()


def _manifest(cfg, mesh, outdir, name, extra=None):
    doc = {
        "config": {k: v for k, v in cfg.items() if k != "problem_args"
                   or v},
        "version": __version__,
        "numpy": np.__version__,
        "mesh_sha256": _mesh_hash(mesh),
    }
    doc.update(extra or {})
    path = os.path.join(outdir, f"{name}_manifest.json")
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
    return path


def _build_problem(cfg):
    if cfg["problem"] is None:
        raise ConfigError("config needs a 'problem' name")
    if cfg["problem"] not in REGISTRY:
        raise ConfigError(
            f"unknown problem {cfg['problem']!r}; available: "
            f"{sorted(REGISTRY)}")
    prob = REGISTRY[cfg["problem"]](**cfg["problem_args"])
    if cfg["t_final"] is not None:
        prob.t_final = cfg["t_final"]
    if cfg["flux"] is not None:
        prob.flux = cfg["flux"]
    if cfg["limiter"] is not None:
        base = prob.limiter or LimiterConfig(
            gamma=getattr(prob.law, "gamma", 1.4))
        for k, v in cfg["limiter"].items():
            if not hasattr(base, k):
                raise ConfigError(f"unknown limiter option {k!r}")
            setattr(base, k, v)
        prob.limiter = base
    return prob


def _make_mesh(prob, cfg, N):
    q = q_for(cfg["p"], cfg["q"])
    return generate_mesh(prob.boundary, prob.domain, N, N, q,
                         periodic_x=prob.periodic_x,
                         periodic_y=prob.periodic_y)


def cmd_mesh(cfg):
    outdir = _output_dir(cfg)
    if cfg["geometry"] is not None:
        boundary = geometry_from_json(cfg["geometry"])
        domain = cfg["geometry"]["domain"]
        name = cfg["geometry"].get("name", "custom")
        q = q_for(cfg["p"], cfg["q"])
        mesh = generate_mesh(boundary, domain, cfg["N"], cfg["N"], q)
    else:
        prob = _build_problem(cfg)
        name = prob.name
        mesh = _make_mesh(prob, cfg, cfg["N"])
    rep = mesh_report(mesh)
    save_mesh(mesh, os.path.join(outdir, f"{name}_N{cfg['N']}_mesh.json"))
    io_out.write_vtk_cells(
        os.path.join(outdir, f"{name}_N{cfg['N']}_mesh.vtk"), mesh,
        cell_data={"volume_fraction": mesh.volume_fractions()})
    with open(os.path.join(outdir, f"{name}_N{cfg['N']}_report.json"),
              "w") as f:
        json.dump(rep, f, indent=2)
    _manifest(cfg, mesh, outdir, f"{name}_N{cfg['N']}_mesh",
              {"report": {k: v for k, v in rep.items() if k != "histogram"}})
    print(f"mesh: {rep['n_cells']} cells ({rep['n_cut']} cut), "
          f"min volume fraction {rep['min_volume_fraction']:.3e}")
    return 0


def _run_single(prob, cfg, N, outdir, tag, write_outputs=True):
    mesh = _make_mesh(prob, cfg, N)
    ctx = DGContext(mesh, cfg["p"], prob.bcs,
                    quad_degree_override=cfg["quad_degree"])
    post = make_postprocess(ctx, prob.law, prob.limiter)
    C0 = ctx.project(prob.ic)
    mass0 = ctx.mass(C0)

    steps_box = []

    def on_step(nstep, t, C, resid):
        if write_outputs and cfg["vtk_every"] and nstep % cfg["vtk_every"] == 0:
            io_out.write_field_vtk(
                os.path.join(outdir, f"{tag}_step{nstep:07d}.vtk"),
                ctx, C, prob.law)
        if write_outputs and cfg["checkpoint_every"] \
                and nstep % cfg["checkpoint_every"] == 0:
            io_out.save_checkpoint(
                os.path.join(outdir, f"{tag}_step{nstep:07d}.npz"),
                C, t, cfg["p"], {"problem": prob.name, "N": N})
        steps_box.append(nstep)

    res = run(ctx, prob.law, prob.flux, C0,
              t_final=None if prob.steady else prob.t_final,
              steady_tol=cfg["steady_tol"] if prob.steady else None,
              cfl=cfg["cfl"], max_steps=cfg["max_steps"], post=post,
              mass_cadence=cfg["mass_cadence"], on_step=on_step)

    row = {"N": N, "steps": res.steps, "t": res.t,
           "steady_residual": res.steady_residual}
    massT = ctx.mass(res.C)
    row["mass_drift"] = float(np.max(np.abs(massT - mass0)
                                     / np.maximum(np.abs(mass0), 1e-300)))
    if prob.exact is not None:
        L1, Li = diagnostics.l1_linf(ctx, res.C, prob.exact, res.t,
                                     error_map=prob.error_map)
        Ed, Eb = diagnostics.fv_style_errors(ctx, res.C, prob.exact, res.t,
                                             error_map=prob.error_map)
        row.update({"L1": float(L1[0]), "Linf": float(Li[0]), "E_d": Ed})
        for name, v in Eb.items():
            row[f"E_b_{name}"] = v
    if write_outputs:
        io_out.write_field_vtk(os.path.join(outdir, f"{tag}_final.vtk"),
                               ctx, res.C, prob.law)
        if cfg["boundary_trace"] and prob.boundary is not None:
            io_out.write_boundary_trace_csv(
                os.path.join(outdir, f"{tag}_boundary.csv"), ctx, res.C,
                prob.law, coord_fn=prob.notes.get("trace_coord"))
        if res.mass_history:
            with open(os.path.join(outdir, f"{tag}_mass.csv"), "w",
                      newline="") as f:
                w = csv.writer(f)
                w.writerow(["t"] + [f"var{i}" for i in
                                    range(len(res.mass_history[0][1]))])
                for t, mass in res.mass_history:
                    w.writerow([f"{t:.16g}"] + [f"{v:.16g}" for v in mass])
        if prob.exact is not None:
            with open(os.path.join(outdir, f"{tag}_errors.csv"), "w",
                      newline="") as f:
                w = csv.writer(f)
                keys = sorted(row)
                w.writerow(keys)
                w.writerow([row[k] for k in keys])
        _manifest(cfg, mesh, outdir, tag, {"result": row})
    return row


def cmd_run(cfg):
    prob = _build_problem(cfg)
    outdir = _output_dir(cfg)
    if cfg["N"] is None:
        raise ConfigError("run needs N")
    N = int(cfg["N"]) if not isinstance(cfg["N"], list) else int(cfg["N"][0])
    tag = f"{prob.name}_p{cfg['p']}_N{N}"
    row = _run_single(prob, cfg, N, outdir, tag)
    print(json.dumps(row, indent=2, default=float))
    return 0


def cmd_converge(cfg):
    prob = _build_problem(cfg)
    outdir = _output_dir(cfg)
    Ns = cfg["N"]
    if not isinstance(Ns, list) or len(Ns) < 2:
        raise ConfigError("converge needs N as a list of at least 2 grids")
    rows = []
    for N in Ns:
        tag = f"{prob.name}_p{cfg['p']}_N{N}"
        row = _run_single(prob, cfg, int(N), outdir, tag,
                          write_outputs=cfg["vtk"])
        print(json.dumps(row, default=float))
        rows.append(row)
    table = os.path.join(outdir, f"{prob.name}_p{cfg['p']}_convergence.csv")
    diagnostics.write_convergence_csv(table, rows)
    l1_rate = diagnostics.convergence_rates(
        [(r["N"], r["L1"]) for r in rows])
    linf_rate = diagnostics.convergence_rates(
        [(r["N"], r["Linf"]) for r in rows])
    print(f"fitted rates: L1 {l1_rate:.3f}, Linf {linf_rate:.3f}")
    print(f"table: {table}")
    return 0


def cmd_oned(cfg):
    outdir = _output_dir(cfg)
    p = cfg["p"]
    Ms = cfg["N"] or [40, 80, 160, 320]
    rows = oned.convergence_study(p, Ms, seed=cfg["seed"] or 1234)
    path = os.path.join(outdir, f"oned_p{p}_convergence.csv")
    diagnostics.write_convergence_csv(path, rows)
    l1_rate = diagnostics.convergence_rates([(r["N"], r["L1"]) for r in rows])
    linf_rate = diagnostics.convergence_rates(
        [(r["N"], r["Linf"]) for r in rows])
    print(f"1D p={p}: L1 rate {l1_rate:.3f}, Linf rate {linf_rate:.3f}")
    print(f"table: {path}")
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="cutcelldg",
        description="Cut-cell DG solver with state redistribution")
    ap.add_argument("command", choices=["mesh", "run", "converge", "oned"])
    ap.add_argument("-c", "--config", help="JSON config file")
    ap.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override a config key (value parsed as JSON)")
    ap.add_argument("--threads", type=int, default=None,
                    help="BLAS/OpenMP thread count (exported to env)")
    args = ap.parse_args(argv)

    try:
        overrides = _parse_set(args.set)
        if args.threads:
            for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                        "MKL_NUM_THREADS"):
                os.environ[var] = str(args.threads)
        cfg = load_config(args.config, overrides)
        return {"mesh": cmd_mesh, "run": cmd_run,
                "converge": cmd_converge, "oned": cmd_oned}[args.command](cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (MeshError, GeometryError) as e:
        print(f"mesh error: {e}", file=sys.stderr)
        return 3
    except (SolverBlowup, PositivityFailure) as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return 4
    except CutCellDGError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
