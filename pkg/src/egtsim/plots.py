"""Figure rendering for the run report path (PNG files next to the CSVs)."""

from __future__ import annotations

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["time_series_figure", "phase_portrait_figure"]

_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple", "tab:brown")


def time_series_figure(trajectories, labels, path: str | os.PathLike, title: str = "") -> Path:
    """Overlay the strategy components (solid) and n (dashed) of each trajectory."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    n_strat = len(labels) - 1
    for k, traj in enumerate(trajectories):
        color = _COLORS[k % len(_COLORS)]
        for j in range(n_strat):
            style = "-" if j == 0 else "-."
            name = f"{labels[j]} (ic{k + 1})"
            ax.plot(traj.t, traj.y[:, j], style, color=color, lw=1.2, label=name)
        ax.plot(traj.t, traj.y[:, -1], "--", color=color, lw=0.9, alpha=0.7,
                label=f"n (ic{k + 1})")
    ax.set_xlabel("t")
    ax.set_ylabel("fraction / environment")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=7, ncol=2, loc="best")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def phase_portrait_figure(grid_pairs, trajectories, labels, path: str | os.PathLike,
                          title: str = "") -> Path:
    """Quiver of the field with the trajectories overlaid.

    Two-dimensional states are drawn in the (x1, n) plane; three-dimensional
    ones in a 3-D (x1, x2, n) view with normalized arrows.
    """
    dim = len(labels)
    points = np.array([p for p, _ in grid_pairs])
    derivs = np.array([d for _, d in grid_pairs])
    path = Path(path)
    if dim == 2:
        fig, ax = plt.subplots(figsize=(5.6, 5.0))
        norms = np.hypot(derivs[:, 0], derivs[:, 1])
        norms[norms == 0.0] = 1.0
        ax.quiver(points[:, 0], points[:, 1], derivs[:, 0] / norms, derivs[:, 1] / norms,
                  angles="xy", color="steelblue", alpha=0.6, width=0.003)
        for k, traj in enumerate(trajectories):
            ax.plot(traj.y[:, 0], traj.y[:, 1], color=_COLORS[k % len(_COLORS)], lw=1.1)
            ax.plot(traj.y[0, 0], traj.y[0, 1], "o", color=_COLORS[k % len(_COLORS)], ms=4)
        ax.set_xlabel(labels[0])
        ax.set_ylabel(labels[1])
        ax.set_xlim(-0.02, 1.02)
        ax.set_ylim(-0.02, 1.02)
    else:
        fig = plt.figure(figsize=(6.0, 5.2))
        ax = fig.add_subplot(projection="3d")
        norms = np.linalg.norm(derivs, axis=1)
        keep = norms > 0
        ax.quiver(points[keep, 0], points[keep, 1], points[keep, 2],
                  derivs[keep, 0], derivs[keep, 1], derivs[keep, 2],
                  length=0.06, normalize=True, color="steelblue", alpha=0.5, lw=0.6)
        for k, traj in enumerate(trajectories):
            ax.plot(traj.y[:, 0], traj.y[:, 1], traj.y[:, 2],
                    color=_COLORS[k % len(_COLORS)], lw=1.0)
        ax.set_xlabel(labels[0])
        ax.set_ylabel(labels[1])
        ax.set_zlabel(labels[2])
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
