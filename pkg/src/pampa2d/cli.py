"""Command-line driver: run, convergence, steady-check, compare."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import cases, model
from .config import ConfigError, RunConfig, inline_scenario, output_dir, parse_config, serialize, validate
from .gmsh_io import GmshError, read_gmsh
from .mesh import Mesh, MeshError
from .meshgen import rectangle_mesh
from .timestepping import RunOptions, advance
from .vtk_io import (
    write_convergence_tables,
    write_diagnostics,
    write_steady_table,
    write_vtk,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_RUNTIME = 4


class CliError(Exception):
    def __init__(self, category, message, code):
        self.category = category
        self.code = code
        super().__init__(message)


def _load_config(args):
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = parse_config(fh.read())
        except FileNotFoundError:
            raise CliError("config", f"config file not found: {args.config}", EXIT_CONFIG)
        except ConfigError as err:
            raise CliError("config", "\n".join(err.errors), EXIT_CONFIG)
    overrides = {
        "scenario": "scenario",
        "mesh": "mesh",
        "mesh_size": "mesh_size",
        "mesh_kind": "mesh_kind",
        "mesh_seed": "mesh_seed",
        "wb_mode": "wb_mode",
        "variable_set": "variable_set",
        "cfl": "cfl",
        "t_final": "t_final",
        "output_dir": "output_dir",
        "output_every": "output_every",
        "plateau_eps": "plateau_eps",
        "avg_init": "avg_init",
    }
    for arg_name, key in overrides.items():
        val = getattr(args, arg_name, None)
        if val is not None:
            setattr(cfg, key, val)
    if getattr(args, "no_mood", False):
        cfg.mood = False
    if getattr(args, "no_dmp", False):
        cfg.dmp = False
    errs = validate(cfg)
    if errs:
        raise CliError("config", "\n".join(errs), EXIT_CONFIG)
    return cfg


def _scenario(cfg):
    if cfg.scenario == "inline":
        return inline_scenario(cfg)
    try:
        return cases.builtin_scenario(cfg.scenario)
    except KeyError as err:
        raise CliError("config", str(err), EXIT_CONFIG)


def _mesh(cfg, scenario):
    if cfg.mesh:
        try:
            verts, tris, blines = read_gmsh(cfg.mesh)
            return Mesh(verts, tris, blines)
        except FileNotFoundError:
            raise CliError("io", f"mesh file not found: {cfg.mesh}", EXIT_IO)
        except (GmshError, MeshError) as err:
            raise CliError("io", f"mesh error: {err}", EXIT_IO)
    return rectangle_mesh(
        scenario.bounds, cfg.mesh_size, kind=cfg.mesh_kind, seed=cfg.mesh_seed
    )


def _options(cfg, checkpoints=()):
    t_final = None if cfg.t_final < 0 else cfg.t_final
    return RunOptions(
        wb_mode=cfg.wb_mode,
        variable_set=cfg.variable_set,
        cfl=cfg.cfl,
        mood=cfg.mood,
        dmp=cfg.dmp,
        t_final=t_final,
        plateau_eps=cfg.plateau_eps,
        avg_init=cfg.avg_init,
        checkpoint_times=tuple(checkpoints),
    )


def _outdir(cfg):
    out = output_dir(cfg)
    os.makedirs(out, exist_ok=True)
    return out


def _write_checkpoint(out, cfg, mesh, scenario, tag, field, z_dof, flags=None):
    path = os.path.join(out, f"{scenario.name}_{tag}.vtk")
    write_vtk(path, mesh, field, z_dof, variable_set=cfg.variable_set, flags=flags)
    return path


def cmd_run(args):
    cfg = _load_config(args)
    scenario = _scenario(cfg)
    mesh = _mesh(cfg, scenario)
    out = _outdir(cfg)

    t_final = cfg.t_final if cfg.t_final >= 0 else scenario.t_final
    checkpoints = set(scenario.checkpoints)
    if cfg.output_every > 0:
        k = 1
        while k * cfg.output_every < t_final * (1 + 1e-12):
            checkpoints.add(round(k * cfg.output_every, 12))
            k += 1
    opts = _options(cfg, sorted(checkpoints))

    field = cases.initialize_field(scenario, mesh, cfg.variable_set, cfg.avg_init)
    try:
        res = advance(field, mesh, scenario, opts)
    except RuntimeError as err:
        raise CliError("runtime", str(err), EXIT_RUNTIME)

    from .bathymetry import Bathymetry

    bathy = Bathymetry.from_function(mesh, scenario.z, avg_mode=cfg.avg_init)
    write_diagnostics(os.path.join(out, f"{scenario.name}_diagnostics.csv"), res.diagnostics)
    for tc, fld in sorted(res.checkpoints.items()):
        _write_checkpoint(out, cfg, mesh, scenario, f"t{tc:g}", fld, bathy.z_dof)
    with open(os.path.join(out, f"{scenario.name}_config.txt"), "w") as fh:
        fh.write(serialize(cfg))
    print(
        f"{scenario.name}: {res.n_steps} steps to t={res.t:g} on "
        f"{mesh.n_elements} elements; edge rules {res.rule_counts}; "
        f"outputs in {out}"
    )
    return EXIT_OK


def cmd_convergence(args):
    cfg = _load_config(args)
    scenario = _scenario(cfg)
    sizes = [float(s) for s in args.sizes]
    out = _outdir(cfg)
    opts = _options(cfg)
    study = cases.convergence_study(
        scenario, sizes, opts, mesh_kind=cfg.mesh_kind, seed=cfg.mesh_seed
    )
    prefix = os.path.join(out, f"{scenario.name}_convergence")
    write_convergence_tables(prefix, study)
    rates_avg = study.rates("avg_l1")
    rates_pts = study.rates("point_l1")
    print(f"{scenario.name}: convergence on meshes {sizes}")
    for i, row in enumerate(study.rows):
        print(
            f"  size={row.size_metric_avg:.4f} elements={row.n_elements} "
            f"h_L1={row.errors.avg_l1[0]:.3e}"
        )
    if len(study.rows) > 1:
        print(f"  last avg rates (h,hu,hv): {np.round(rates_avg[-1][:3], 2)}")
        print(f"  last point rates (h,hu,hv): {np.round(rates_pts[-1][:3], 2)}")
    print(f"  tables: {prefix}_averages.csv, {prefix}_points.csv")
    return EXIT_OK


def cmd_steady_check(args):
    cfg = _load_config(args)
    scenario = _scenario(cfg)
    mesh = _mesh(cfg, scenario)
    out = _outdir(cfg)
    opts = _options(cfg)
    report = cases.steady_state_check(scenario, mesh, opts)
    path = os.path.join(out, f"{scenario.name}_steady_{cfg.wb_mode}.csv")
    write_steady_table(path, [(cfg.wb_mode, report.norms)])
    print(f"{scenario.name} ({cfg.wb_mode}): drift over t={scenario.t_final:g}")
    for label, arr in (
        ("L1 avg   ", report.norms.avg_l1),
        ("Linf avg ", report.norms.avg_linf),
        ("L1 point ", report.norms.point_l1),
        ("Linf pt  ", report.norms.point_linf),
    ):
        print(f"  {label} h={arr[0]:.3e} hu={arr[1]:.3e} hv={arr[2]:.3e} hth={arr[3]:.3e}")
    print(f"  table: {path}")
    return EXIT_OK


def cmd_compare(args):
    cfg = _load_config(args)
    scenario = _scenario(cfg)
    mesh = _mesh(cfg, scenario)
    out = _outdir(cfg)
    modes = args.modes
    reports = []
    for mode in modes:
        cfg.wb_mode = mode
        errs = validate(cfg)
        if errs:
            raise CliError("config", "\n".join(errs), EXIT_CONFIG)
        opts = _options(cfg)
        report = cases.steady_state_check(scenario, mesh, opts)
        reports.append((mode, report.norms))
        print(
            f"{scenario.name} [{mode}]: h Linf avg drift "
            f"{report.norms.avg_linf[0]:.3e}"
        )
    path = os.path.join(out, f"{scenario.name}_compare.csv")
    write_steady_table(path, reports)
    print(f"  paired table: {path}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pampa2d",
        description="Well-balanced third-order PAMPA solver for the 2-D "
        "shallow water equations with temperature gradients.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="path to a key=value config file")
        p.add_argument("--scenario", help="built-in scenario name or 'inline'")
        p.add_argument("--mesh", help="GMSH .msh file (overrides generator)")
        p.add_argument("--mesh-size", dest="mesh_size", type=float)
        p.add_argument("--mesh-kind", dest="mesh_kind", choices=["jittered", "structured"])
        p.add_argument("--mesh-seed", dest="mesh_seed", type=int)
        p.add_argument("--wb-mode", dest="wb_mode",
                       choices=["adaptive", "lobatto_only", "legendre_only"])
        p.add_argument("--variable-set", dest="variable_set", choices=["pmt", "prim"])
        p.add_argument("--cfl", type=float)
        p.add_argument("--t-final", dest="t_final", type=float)
        p.add_argument("--plateau-eps", dest="plateau_eps", type=float)
        p.add_argument("--avg-init", dest="avg_init",
                       choices=["interpolation", "quadrature"])
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--no-mood", action="store_true")
        p.add_argument("--no-dmp", action="store_true")

    p_run = sub.add_parser("run", help="integrate a scenario and write outputs")
    common(p_run)
    p_run.add_argument("--output-every", dest="output_every", type=float)
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("convergence", help="mesh-refinement error study")
    common(p_conv)
    p_conv.add_argument("--sizes", nargs="+", required=True,
                        help="decreasing characteristic lengths")
    p_conv.set_defaults(func=cmd_convergence)

    p_steady = sub.add_parser("steady-check", help="equilibrium drift report")
    common(p_steady)
    p_steady.set_defaults(func=cmd_steady_check)

    p_cmp = sub.add_parser("compare", help="WB vs forced-rule drift comparison")
    common(p_cmp)
    p_cmp.add_argument("--modes", nargs="+",
                       default=["adaptive", "lobatto_only"],
                       help="wb modes to compare on the same mesh")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error [{err.category}]: {err}", file=sys.stderr)
        return err.code
    except ConfigError as err:
        print(f"error [config]: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
