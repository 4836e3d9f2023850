"""Snapshot figures rendered to PNG next to the delimited output."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .grid import BathymetryData, GridSpec, StateField

DRY_TOL = 1e-8


def save_field_figure(path, grid: GridSpec, bath: BathymetryData,
                      fld: StateField, t, dry_tol=DRY_TOL):
    """Water surface over shaded topography; dry cells show the bottom only."""
    xc, yc = grid.centers()
    h, qx, qy = fld.interior()
    b = bath.cell_avg[grid.interior_x, grid.interior_y]
    eta = np.ma.masked_where(h <= dry_tol, h + b)

    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    if np.ptp(b) > 0:
        ax.pcolormesh(xc, yc, b.T, cmap="Greys", shading="nearest", alpha=0.6)
    pm = ax.pcolormesh(xc, yc, eta.T, cmap="viridis", shading="nearest")
    fig.colorbar(pm, ax=ax, label="surface elevation")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"t = {t:.4f}")
    ax.set_aspect("equal", adjustable="box")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_convergence_figure(path, sizes, errors, labels):
    """Log-log error decay per variable with a fifth-order guide line."""
    sizes = np.asarray(sizes, dtype=float)
    errors = np.asarray(errors, dtype=float)
    fig, ax = plt.subplots(figsize=(5.4, 4.2))
    for k, lab in enumerate(labels):
        ax.loglog(sizes, errors[:, k], "o-", label=lab)
    guide = errors[0].max() * (sizes / sizes[0]) ** -5.0
    ax.loglog(sizes, guide, "k--", lw=0.8, label="order 5")
    ax.set_xlabel("cells per side")
    ax.set_ylabel("L1 error")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
