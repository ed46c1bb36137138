"""Static figures for run reports (SVG via matplotlib's Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# stable SVG element ids and no timestamp, so reruns write identical files
plt.rcParams["svg.hashsalt"] = "jamswarm"
SVG_METADATA = {"Date": None}

BEAM_ARROW = 6.0  # meters


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)


def plot_topology(path, grid, positions, beams, jammer, routing=None, title=""):
    """Deployment area, grid points, UAVs with beam arrows, jammer and used links."""
    positions = np.asarray(positions, dtype=float)
    fig, ax = plt.subplots(figsize=(7, 6))

    nx, ny = grid.shape
    gx, gy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    pts = grid.to_xy(np.stack([gx.ravel(), gy.ravel()], axis=1))
    ax.plot(pts[:, 0], pts[:, 1], ".", color="0.8", ms=3, zorder=1)
    ax.add_patch(
        plt.Rectangle(
            (grid.origin.x, grid.origin.y), grid.width, grid.height,
            fill=False, ls="--", color="0.5", zorder=1,
        )
    )

    if routing is not None:
        used = set()
        for row in routing.paths:
            for p in row:
                used.update(zip(p, p[1:]))
        for a, b in sorted(used):
            ax.annotate(
                "", xy=positions[b], xytext=positions[a],
                arrowprops=dict(arrowstyle="->", color="tab:green", lw=0.8, alpha=0.7),
                zorder=2,
            )

    ax.plot(positions[:, 0], positions[:, 1], "o", color="tab:blue", ms=9, zorder=3)
    rad = np.radians(np.asarray(beams, dtype=float))
    ax.quiver(
        positions[:, 0], positions[:, 1],
        BEAM_ARROW * np.cos(rad), BEAM_ARROW * np.sin(rad),
        angles="xy", scale_units="xy", scale=1, color="tab:blue", width=0.005, zorder=4,
    )
    for i, (x, y) in enumerate(positions):
        ax.annotate(f"UAV{i}", (x, y), xytext=(5, 5), textcoords="offset points", fontsize=8)

    jx, jy = jammer.position.as_tuple()
    ax.plot([jx], [jy], "X", color="tab:red", ms=12, zorder=3)
    ax.annotate("jammer", (jx, jy), xytext=(6, -10), textcoords="offset points",
                fontsize=8, color="tab:red")

    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    if title:
        ax.set_title(title)
    ax.margins(0.1)
    _save(fig, path)


def plot_convergence(path, rows, baseline=None):
    """Best and mean objective per generation; one best-curve per window.

    rows: iterable of (window, generation, best_of, avg_of).
    """
    rows = list(rows)
    fig, ax = plt.subplots(figsize=(7, 4))
    windows = sorted({r[0] for r in rows})
    offset = 0
    for w in windows:
        wr = [r for r in rows if r[0] == w]
        x = offset + np.array([r[1] for r in wr])
        ax.plot(x, [r[2] for r in wr], "-", color="tab:blue", label="best" if w == 0 else None)
        ax.plot(x, [r[3] for r in wr], ":", color="tab:gray", label="mean" if w == 0 else None)
        offset = x[-1] + 1
    if baseline is not None:
        ax.axhline(baseline, color="tab:red", ls="--", label="omnidirectional baseline")
    values = [v for r in rows for v in r[2:4] if v > 0]
    if values and max(values) / min(values) > 100:
        ax.set_yscale("log")
    ax.set_xlabel("generation")
    ax.set_ylabel("objective")
    ax.legend(loc="lower right")
    _save(fig, path)
