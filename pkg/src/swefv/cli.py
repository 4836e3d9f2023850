"""Batch front-end: config parsing, run driver, convergence harness.

Runs are seed-free and deterministic: identical configs produce
byte-identical delimited output.
"""

import argparse
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import output
from .quadrature import gauss_legendre
from .scenarios import (CATALOG, channel_deviation, channel_steady_init,
                        convergence_orders, error_norms, get_scenario,
                        steady_height, setup)
from .semidiscretization import Discretization
from .timeint import Simulation, StepFailure, build_dec_tableau
from .weno_gen import generate_table

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    scenario: Optional[str] = None
    nx: Optional[int] = None
    ny: Optional[int] = None
    cfl: Optional[float] = None
    tf: Optional[float] = None
    wb: str = "on"
    M: int = 3
    P: int = 5
    out: str = "out"
    every_steps: Optional[int] = None
    every_time: Optional[float] = None
    writer: str = "csv"
    figures: bool = True


def _parse_positive_int(s):
    v = int(s)
    if v <= 0:
        raise ValueError("must be positive")
    return v


def _parse_positive_float(s):
    v = float(s)
    if v <= 0.0:
        raise ValueError("must be positive")
    return v


def _parse_cfl(s):
    v = float(s)
    if not 0.0 < v <= 1.0:
        raise ValueError("CFL must lie in (0, 1]")
    return v


def _parse_choice(*choices):
    def parse(s):
        if s not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}")
        return s
    return parse


def _parse_onoff(s):
    if s not in ("on", "off"):
        raise ValueError("expected on or off")
    return s == "on"


_PARSERS = {
    "scenario": str,
    "nx": _parse_positive_int,
    "ny": _parse_positive_int,
    "cfl": _parse_cfl,
    "tf": _parse_positive_float,
    "wb": _parse_choice("on", "off"),
    "M": _parse_positive_int,
    "P": _parse_positive_int,
    "out": str,
    "every_steps": _parse_positive_int,
    "every_time": _parse_positive_float,
    "writer": _parse_choice("csv", "vtk", "both"),
    "figures": _parse_onoff,
}


def parse_config_file(path):
    """Line-oriented `key = value` text with `#` comments."""
    values = {}
    try:
        f = open(path)
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    with f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected `key = value`")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in _PARSERS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _PARSERS[key](val)
            except ValueError as e:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {e}") from None
    return values


def build_config(args):
    """File values first, command-line flags override."""
    cfg = RunConfig()
    if args.config is not None:
        for key, val in parse_config_file(args.config).items():
            setattr(cfg, key, val)
    for key in ("scenario", "nx", "ny", "cfl", "tf", "wb", "out", "writer"):
        val = getattr(args, key, None)
        if val is not None:
            try:
                setattr(cfg, key, _PARSERS[key](str(val)))
            except ValueError as e:
                raise UsageError(f"--{key}: {e}") from None
    if getattr(args, "figures", None) is not None:
        cfg.figures = args.figures == "on"
    if cfg.scenario is None:
        raise UsageError("scenario required")
    if cfg.scenario not in CATALOG:
        known = ", ".join(sorted(CATALOG))
        raise UsageError(f"unknown scenario {cfg.scenario!r}; available: {known}")
    return cfg


def _make_sim(cfg, rule):
    scn = get_scenario(cfg.scenario)
    if cfg.tf is not None:
        scn.t_final = cfg.tf
    if cfg.cfl is not None:
        scn.cfl = cfg.cfl
    grid, bath, fld = setup(scn, nx=cfg.nx, ny=cfg.ny, rule=rule)
    mode = scn.wb_mode if cfg.wb == "on" else "off"
    disc = Discretization(grid, scn.bc, bath, g=scn.g, rule=rule)
    tableau = build_dec_tableau(cfg.M, cfg.P)
    sim = Simulation(disc, fld, cfl=scn.cfl, mode=mode, tableau=tableau)
    return scn, grid, bath, sim


def cmd_run(cfg):
    rule = gauss_legendre(4)
    scn, grid, bath, sim = _make_sim(cfg, rule)
    os.makedirs(cfg.out, exist_ok=True)

    if cfg.figures:
        from .figures import save_field_figure
    else:
        save_field_figure = None

    def snapshot(step):
        output.write_snapshot(cfg.out, step, cfg.writer, grid, bath, sim.fld)
        if save_field_figure is not None:
            save_field_figure(
                os.path.join(cfg.out, output.snapshot_name("png", step)),
                grid, bath, sim.fld, sim.t,
            )

    U0 = sim.fld.interior().copy()
    mass0 = sim.fld.mass()
    state = {"next_snap": cfg.every_time if cfg.every_time is not None else None}

    def on_step(s, diag):
        log.record(diag)
        due = cfg.every_steps is not None and diag.step % cfg.every_steps == 0
        if state["next_snap"] is not None and diag.t >= state["next_snap"] * (1 - 1e-12):
            due = True
            while state["next_snap"] <= diag.t * (1 + 1e-12):
                state["next_snap"] += cfg.every_time
        if due:
            snapshot(diag.step)

    wall0 = time.perf_counter()
    with output.RunLog(os.path.join(cfg.out, "run.log")) as log:
        snapshot(0)
        try:
            sim.run(scn.t_final, on_step=on_step)
        except StepFailure as e:
            print(f"solver failure: {e}", file=sys.stderr)
            return EXIT_SOLVER
        snapshot(sim.steps)
    wall = time.perf_counter() - wall0

    mass = sim.fld.mass()
    entries = {
        "scenario": cfg.scenario,
        "nx": grid.nx,
        "ny": grid.ny,
        "wb": cfg.wb,
        "final_time": sim.t,
        "steps": sim.steps,
        "min_h": sim.min_h_run,
        "mass_initial": mass0,
        "mass_final": mass,
        "mass_drift": mass - mass0,
        "mass_drift_rel": (mass - mass0) / mass0 if mass0 != 0.0 else 0.0,
        "max_change": float(np.max(np.abs(sim.fld.interior() - U0))),
        "wall_time": wall,
    }
    if scn.exact_fn is not None:
        errs = error_norms(sim.fld, scn.exact_fn(grid, rule, sim.t), grid)
        entries["l1_h"], entries["l1_qx"], entries["l1_qy"] = map(float, errs)
        print(f"L1 errors vs analytic: h {errs[0]:.6e}  qx {errs[1]:.6e}  "
              f"qy {errs[2]:.6e}")
    if scn.steady is not None:
        dq, dE = channel_deviation(sim.fld, bath, scn)
        entries["max_dev_qx"] = dq
        entries["max_dev_E"] = dE
        print(f"steady deviation: qx {dq:.6e}  E {dE:.6e}")
    output.write_summary(os.path.join(cfg.out, "summary.txt"), entries)
    print(f"completed {cfg.scenario}: t={sim.t:.6g} steps={sim.steps} "
          f"min_h={sim.min_h_run:.3e} wall={wall:.1f}s -> {cfg.out}")
    return EXIT_OK


def _order_str(e_coarse, e_fine, n_coarse, n_fine):
    # below the round-off floor an order is meaningless
    if e_fine < 1e-12 or e_coarse <= 0.0 or e_fine <= 0.0:
        return "—"
    p = np.log(e_coarse / e_fine) / np.log(n_fine / n_coarse)
    return f"{p:.2f}"


def cmd_convergence(cfg, meshes):
    rule = gauss_legendre(4)
    scn0 = get_scenario(cfg.scenario)
    square = scn0.nx == scn0.ny

    if scn0.steady is not None:
        rows = []
        for n in meshes:
            cfg_n = RunConfig(**{**cfg.__dict__, "nx": n, "ny": scn0.ny})
            scn, grid, bath, sim = _make_sim(cfg_n, rule)
            sim.fld = channel_steady_init(scn, grid, bath)
            sim.fld = sim.run(scn.t_final, max_steps=100)
            dq, dE = channel_deviation(sim.fld, bath, scn)
            h_eq = steady_height(
                scn.steady, bath.cell_avg[grid.interior_x, grid.interior_y])
            dh = float(np.max(np.abs(sim.fld.interior()[0] - h_eq)))
            rows.append((n, dq, dE, dh))
        lines = [f"{'Nx':>5}  {'max|qx-q0|':>13}  {'max|E-E0|':>13}  "
                 f"{'max|h-h_eq|':>13}"]
        for n, dq, dE, dh in rows:
            lines.append(f"{n:>5}  {dq:>13.4e}  {dE:>13.4e}  {dh:>13.4e}")
        table = "\n".join(lines)
        print(table)
        return EXIT_OK, table

    if scn0.exact_fn is None and "lake-at-rest" not in cfg.scenario:
        raise UsageError(f"scenario {cfg.scenario!r} has no reference solution")

    errs = []
    for n in meshes:
        ny = n if square else None
        cfg_n = RunConfig(**{**cfg.__dict__, "nx": n, "ny": ny})
        scn, grid, bath, sim = _make_sim(cfg_n, rule)
        if scn.exact_fn is not None:
            ref_fn = lambda: scn.exact_fn(grid, rule, sim.t)
        else:
            ref0 = sim.fld.interior().copy()
            ref_fn = lambda r=ref0: r
        sim.run(scn.t_final)
        errs.append(error_norms(sim.fld, ref_fn(), grid))
    errs = np.asarray(errs)

    head = f"{'Nx':>5}"
    for lab in ("h", "qx", "qy"):
        head += f"  {'L1 ' + lab:>12}  {'ord':>6}"
    lines = [head]
    for i, n in enumerate(meshes):
        row = f"{n:>5}"
        for k in range(3):
            row += f"  {errs[i, k]:>12.4e}"
            if i == 0:
                row += f"  {'':>6}"
            else:
                o = _order_str(errs[i - 1, k], errs[i, k], meshes[i - 1], n)
                row += f"  {o:>6}"
        lines.append(row)
    table = "\n".join(lines)
    print(table)

    if cfg.figures and len(meshes) >= 2 and np.all(errs > 0):
        from .figures import save_convergence_figure
        os.makedirs(cfg.out, exist_ok=True)
        save_convergence_figure(
            os.path.join(cfg.out, "convergence.png"),
            meshes, errs, ("h", "qx", "qy"))
    return EXIT_OK, table


def _parse_points_spec(spec):
    pts = []
    for tok in spec.split(","):
        tok = tok.strip()
        if tok == "interfaces":
            pts.extend([Fraction(-1, 2), Fraction(1, 2)])
        elif tok.startswith("gauss"):
            try:
                npt = int(tok[len("gauss"):])
            except ValueError:
                raise UsageError(f"bad points token {tok!r}") from None
            pts.extend(float(x) for x in gauss_legendre(npt).nodes)
        else:
            try:
                pts.append(Fraction(tok))
            except ValueError:
                raise UsageError(f"bad points token {tok!r}") from None
    if not pts:
        raise UsageError("no evaluation points given")
    return pts


def cmd_gen_weno(r, points_spec):
    pts = _parse_points_spec(points_spec)
    try:
        table = generate_table(r, pts)
    except ValueError as e:
        raise UsageError(str(e)) from None
    print(f"# reconstruction table, radius r={r}, {table.npoints} points")
    for p in range(table.npoints):
        print(f"point {table.points[p]:+.17g}")
        print("  d      " + "  ".join("%.17g" % v for v in table.d[p]))
        for j in range(table.r):
            print(f"  S{j}     "
                  + "  ".join("%.17g" % v for v in table.c_lo[p, j]))
        print("  wide   " + "  ".join("%.17g" % v for v in table.c_ho[p]))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the contract reserves 2 for solver
    failures, so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser():
    ap = _Parser(prog="swe", description="finite-volume shallow water runs")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--config", help="key = value config file")
    run.add_argument("--nx", type=int)
    run.add_argument("--ny", type=int)
    run.add_argument("--cfl", type=float)
    run.add_argument("--tf", type=float)
    run.add_argument("--wb", choices=("on", "off"))
    run.add_argument("--out")
    run.add_argument("--writer", choices=("csv", "vtk", "both"))
    run.add_argument("--figures", choices=("on", "off"))
    run.add_argument("--scenario", help="scenario name (else from config)")

    conv = sub.add_parser("convergence", help="error table over mesh sizes")
    conv.add_argument("--config", help="key = value config file")
    conv.add_argument("--meshes", default="25,50,100",
                      help="comma-separated cell counts")
    conv.add_argument("--scenario")
    conv.add_argument("--wb", choices=("on", "off"))
    conv.add_argument("--out")
    conv.add_argument("--figures", choices=("on", "off"))

    gen = sub.add_parser("gen-weno", help="print a reconstruction table")
    gen.add_argument("--r", type=int, default=3)
    gen.add_argument("--points", default="interfaces,gauss4")
    return ap


def main(argv=None):
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(build_config(args))
        if args.command == "convergence":
            cfg = build_config(args)
            try:
                meshes = [int(t) for t in args.meshes.split(",") if t.strip()]
            except ValueError:
                raise UsageError(f"bad mesh list {args.meshes!r}") from None
            if not meshes or any(m <= 0 for m in meshes):
                raise UsageError(f"bad mesh list {args.meshes!r}")
            code, _ = cmd_convergence(cfg, meshes)
            return code
        if args.command == "gen-weno":
            return cmd_gen_weno(args.r, args.points)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as e:
        print(f"swe: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
