"""Seeded calibration of the inhibition gains.

The membrane constants have no principled closed form, so the shipped
defaults are fixed by this procedure: run the reward-free mapping walk in
the desk open arena, sample settled place rates on a position grid, and
require the mean number of concurrently active cells per position (rate
above `active_threshold`) to land in [1, 10] at every scale. The gains in
`config.DynamicsParams` were chosen by sweeping `gamma_pb` / `gamma_pp`
until `measure_activity` satisfied that band for the default seed; the
test suite re-checks the shipped values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .scales import ScaleStack, sample_grid
from .world import EnvironmentSpec

ACTIVE_THRESHOLD = 0.2
TARGET_BAND = (1.0, 10.0)


@dataclass
class ActivityStats:
    scale_name: str
    mean_active: float          # mean active-cell count over grid positions
    occupied_fraction: float    # fraction of positions with any active cell
    peak_rate: float


def measure_activity(
    stack: ScaleStack,
    env: EnvironmentSpec,
    sim: SimConfig,
    resolution: int = 20,
    threshold: float = ACTIVE_THRESHOLD,
) -> ActivityStats:
    """Activity statistics over a uniform grid of settled positions."""
    _, _, rates = sample_grid(stack, env, resolution, sim)
    active = rates > threshold
    per_position = active.sum(axis=2)
    return ActivityStats(
        scale_name=stack.params.name,
        mean_active=float(per_position.mean()),
        occupied_fraction=float((per_position > 0).mean()),
        peak_rate=float(rates.max()),
    )


def within_band(stats: ActivityStats, band: tuple[float, float] = TARGET_BAND) -> bool:
    return band[0] <= stats.mean_active <= band[1]


def field_metrics(
    stack: ScaleStack,
    env: EnvironmentSpec,
    sim: SimConfig,
    resolution: int = 50,
    threshold: float = ACTIVE_THRESHOLD,
) -> dict:
    """Coverage/uniqueness/area metrics used by the field-formation checks.

    * coverage: fraction of grid positions where some cell fires above
      threshold;
    * peak_uniqueness: among cells whose peak exceeds the threshold, the
      fraction whose best grid position is claimed by no other such cell;
    * mean_field_area: mean area (m^2) of the above-threshold region of
      those cells' rate maps.
    """
    _, _, rates = sample_grid(stack, env, resolution, sim)
    coverage = float((rates.max(axis=2) > threshold).mean())

    peaks = rates.reshape(-1, stack.place.n_p)        # (cells_on_grid, n_p)
    peak_values = peaks.max(axis=0)
    qualified = np.nonzero(peak_values > threshold)[0]
    argmax_cells = peaks[:, qualified].argmax(axis=0)
    unique = 0
    counts: dict[int, int] = {}
    for cell in argmax_cells:
        counts[int(cell)] = counts.get(int(cell), 0) + 1
    for cell in argmax_cells:
        if counts[int(cell)] == 1:
            unique += 1
    uniqueness = unique / len(qualified) if len(qualified) else 0.0

    cell_area = (env.width / resolution) * (env.height / resolution)
    if len(qualified):
        areas = (peaks[:, qualified] > threshold).sum(axis=0) * cell_area
        mean_area = float(areas.mean())
    else:
        mean_area = 0.0
    return {
        "coverage": coverage,
        "peak_uniqueness": float(uniqueness),
        "mean_field_area": mean_area,
        "n_qualified": int(len(qualified)),
    }
