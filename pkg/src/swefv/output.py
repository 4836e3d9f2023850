"""Field writers: delimited snapshots, legacy VTK, run log, summary.

All numeric text uses 17 significant digits so a re-read reproduces the
binary doubles exactly, and identical runs produce byte-identical files.
"""

import os

import numpy as np

from .grid import BathymetryData, GridSpec, StateField

CSV_HEADER = "x,y,h,qx,qy,b,eta"


def _fmt(v):
    return "%.17g" % v


def _snapshot_columns(grid: GridSpec, bath: BathymetryData, fld: StateField):
    xc, yc = grid.centers()
    X, Y = np.meshgrid(xc, yc, indexing="ij")
    h, qx, qy = fld.interior()
    b = bath.cell_avg[grid.interior_x, grid.interior_y]
    return X, Y, h, qx, qy, b, h + b


def write_csv(path, grid: GridSpec, bath: BathymetryData, fld: StateField):
    """One row per interior cell, x varying over the outer loop."""
    cols = _snapshot_columns(grid, bath, fld)
    flat = [c.reshape(-1) for c in cols]  # C order: x outer, y inner
    lines = [CSV_HEADER]
    for k in range(flat[0].size):
        lines.append(",".join(_fmt(c[k]) for c in flat))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_csv(path):
    """Columns of a snapshot file as flat float arrays keyed by header name."""
    with open(path) as f:
        header = f.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header!r}")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    names = CSV_HEADER.split(",")
    if data.shape[1] != len(names):
        raise ValueError(f"expected {len(names)} columns, found {data.shape[1]}")
    return {name: data[:, k].copy() for k, name in enumerate(names)}


def write_vtk(path, grid: GridSpec, bath: BathymetryData, fld: StateField):
    """Legacy structured-points file with the fields as cell data."""
    _, _, h, qx, qy, b, eta = _snapshot_columns(grid, bath, fld)
    parts = [
        "# vtk DataFile Version 3.0",
        "shallow water snapshot",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {grid.nx + 1} {grid.ny + 1} 1",
        f"ORIGIN {_fmt(grid.x0)} {_fmt(grid.y0)} 0",
        f"SPACING {_fmt(grid.dx)} {_fmt(grid.dy)} 1",
        f"CELL_DATA {grid.nx * grid.ny}",
    ]
    for name, arr in (("h", h), ("qx", qx), ("qy", qy), ("b", b), ("eta", eta)):
        parts.append(f"SCALARS {name} double 1")
        parts.append("LOOKUP_TABLE default")
        # VTK cell ordering: x fastest, then y
        parts.extend(_fmt(v) for v in arr.T.reshape(-1))
    with open(path, "w") as f:
        f.write("\n".join(parts) + "\n")


class RunLog:
    """Per-step text log: step, t, dt, min h, mass, max blending theta."""

    def __init__(self, path):
        self._f = open(path, "w")
        self._f.write("# step t dt min_h mass theta_max\n")

    def record(self, diag):
        self._f.write(
            f"{diag.step} {_fmt(diag.t)} {_fmt(diag.dt)} {_fmt(diag.min_h)} "
            f"{_fmt(diag.mass)} {_fmt(diag.theta_max)}\n"
        )

    def close(self):
        self._f.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def write_summary(path, entries):
    """Key = value lines, insertion order preserved."""
    with open(path, "w") as f:
        for key, val in entries.items():
            if isinstance(val, float):
                val = _fmt(val)
            f.write(f"{key} = {val}\n")


def snapshot_name(kind, step):
    ext = {"csv": "csv", "vtk": "vtk", "png": "png"}[kind]
    return f"state_{step:06d}.{ext}"


def write_snapshot(out_dir, step, writer, grid, bath, fld):
    """Write the configured snapshot formats; returns the paths written."""
    paths = []
    if writer in ("csv", "both"):
        p = os.path.join(out_dir, snapshot_name("csv", step))
        write_csv(p, grid, bath, fld)
        paths.append(p)
    if writer in ("vtk", "both"):
        p = os.path.join(out_dir, snapshot_name("vtk", step))
        write_vtk(p, grid, bath, fld)
        paths.append(p)
    return paths
