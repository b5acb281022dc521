"""Rendering: rate/reward heatmaps and experiment report figures.

Heatmaps are written as exact-pixel bitmaps (one pixel per grid sample,
linear value -> intensity) with a sidecar text file recording the sampled
min/max, plus an optional CSV of the raw samples. Report figures
(step-count bars, convergence curves, trajectories colored by dominant
scale) are conventional matplotlib plots saved next to the CSV output.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Callable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .world import EnvironmentSpec


def sample_field(
    field: Callable[[tuple[float, float]], float],
    env: EnvironmentSpec,
    resolution: int,
) -> np.ndarray:
    """Evaluate a position -> scalar field at grid cell centers.

    Returns (resolution, resolution) indexed [iy, ix] with y increasing
    with iy (row 0 is the arena's south edge).
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    xs = (np.arange(resolution) + 0.5) * env.width / resolution
    ys = (np.arange(resolution) + 0.5) * env.height / resolution
    out = np.empty((resolution, resolution))
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            out[iy, ix] = field((x, y))
    return out


def render_heatmap(
    field: Callable[[tuple[float, float]], float],
    env: EnvironmentSpec,
    resolution: int,
    out_path: str | Path,
    cmap: str = "viridis",
    csv_path: str | Path | None = None,
) -> np.ndarray:
    """Sample a field and write an exact-pixel heatmap plus sidecar.

    The image has exactly resolution x resolution pixels with a linear
    value -> intensity mapping; the sidecar '<out>.txt' records the value
    range. A constant field renders as a uniform image. Returns the
    sampled array.
    """
    values = sample_field(field, env, resolution)
    vmin, vmax = float(values.min()), float(values.max())
    span = vmax - vmin if vmax > vmin else 1.0
    out_path = Path(out_path)
    plt.imsave(out_path, values, cmap=cmap, vmin=vmin, vmax=vmin + span, origin="lower")
    sidecar = out_path.with_suffix(out_path.suffix + ".txt")
    sidecar.write_text(
        f"min {vmin!r}\nmax {vmax!r}\nresolution {resolution}\n"
        f"arena {env.width!r} x {env.height!r}\n"
    )
    if csv_path is not None:
        export_field_csv(values, env, csv_path)
    return values


def export_field_csv(values: np.ndarray, env: EnvironmentSpec, path: str | Path) -> None:
    """Write sampled (x, y, value) rows for a grid produced by sample_field."""
    res_y, res_x = values.shape
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "value"])
        for iy in range(res_y):
            y = (iy + 0.5) * env.height / res_y
            for ix in range(res_x):
                x = (ix + 0.5) * env.width / res_x
                writer.writerow([repr(float(x)), repr(float(y)), repr(float(values[iy, ix]))])


def _draw_environment(ax, env: EnvironmentSpec) -> None:
    ax.set_xlim(0, env.width)
    ax.set_ylim(0, env.height)
    ax.set_aspect("equal")
    for seg in env.all_segments():
        ax.plot([seg[0], seg[2]], [seg[1], seg[3]], color="black", lw=1.5)
    goal = plt.Circle(env.goal_center, env.goal_radius, color="tab:green", alpha=0.5)
    ax.add_patch(goal)
    ax.plot(*env.start_pose[:2], marker="o", color="tab:red", ms=6)


def trajectory_figure(
    env: EnvironmentSpec,
    positions: Sequence[tuple[float, float]],
    dominant_scales: Sequence[int],
    scale_names: Sequence[str],
    out_path: str | Path,
) -> None:
    """Path plot with each segment colored by the scale dominating it."""
    fig, ax = plt.subplots(figsize=(6, 6))
    _draw_environment(ax, env)
    colors = plt.cm.tab10(np.linspace(0, 1, max(len(scale_names), 1) + 1))
    pts = np.asarray(positions, dtype=float)
    for i in range(len(pts) - 1):
        k = dominant_scales[i]
        color = colors[k] if 0 <= k < len(scale_names) else "0.6"
        ax.plot(pts[i : i + 2, 0], pts[i : i + 2, 1], color=color, lw=1.2)
    handles = [plt.Line2D([0], [0], color=colors[i], lw=2) for i in range(len(scale_names))]
    handles.append(plt.Line2D([0], [0], color="0.6", lw=2))
    ax.legend(handles, list(scale_names) + ["exploring"], loc="upper left", fontsize=8)
    ax.set_title("trajectory (color = dominant scale)")
    fig.savefig(out_path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def exp1_step_count_figure(records, out_path: str | Path) -> None:
    """Grouped bars: mean step count +- SEM per environment and strategy."""
    groups: dict[str, dict[str, list[int]]] = {}
    for r in records:
        groups.setdefault(r.environment, {}).setdefault(r.strategy, []).append(r.step_count)
    envs = sorted(groups)
    strategies = sorted({s for g in groups.values() for s in g})
    fig, ax = plt.subplots(figsize=(1.8 + 1.6 * len(envs), 4))
    width = 0.8 / len(strategies)
    for j, strategy in enumerate(strategies):
        means, sems, xs = [], [], []
        for i, env_name in enumerate(envs):
            values = np.asarray(groups[env_name].get(strategy, [np.nan]), dtype=float)
            means.append(values.mean())
            sems.append(values.std(ddof=1) / np.sqrt(len(values)) if len(values) > 1 else 0.0)
            xs.append(i + (j - (len(strategies) - 1) / 2) * width)
        ax.bar(xs, means, width=width * 0.95, yerr=sems, capsize=2, label=strategy)
    ax.set_xticks(range(len(envs)))
    ax.set_xticklabels(envs)
    ax.set_ylabel("steps to goal")
    ax.legend(fontsize=8)
    fig.savefig(out_path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def exp2_convergence_figure(means: dict[str, list[float]], settle_episodes: int, out_path: str | Path) -> None:
    """Learning curves and episode-wise step-count change per strategy."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
    for strategy in sorted(means):
        series = means[strategy]
        ax1.plot(range(len(series)), series, marker="o", ms=3, label=strategy)
        deltas = np.diff(series)
        ax2.plot(range(1, len(series)), deltas, marker="o", ms=3, label=strategy)
    if settle_episodes > 0:
        ax1.axvspan(0, settle_episodes - 0.5, color="0.9", zorder=0)
    ax2.axhline(0.0, color="black", lw=0.8, ls=":")
    ax1.set_ylabel("mean steps to goal")
    ax2.set_ylabel("step-count change")
    ax2.set_xlabel("episode")
    ax1.legend(fontsize=8)
    fig.savefig(out_path, dpi=120, bbox_inches="tight")
    plt.close(fig)
