"""Boundary-vector-cell layer: Gaussian distance x bearing tuning over a scan.

Each cell prefers boundaries at a distance d_i and allocentric direction
phi_i. Its rate sums, over all beams, the product of a normalized Gaussian
in (range - d_i) and one in the wrapped bearing difference, divided by the
population norm. The radial width sigma_r is the scale knob: wider tuning
smooths the response over space, which is what makes downstream place
fields coarser.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import wrap_pi
from .world import LidarScan

DEFAULT_SIGMA_THETA = 0.2    # radians, shared across scales
DEFAULT_BVC_DIRS = 8
DEFAULT_BVC_DISTS = 12


@dataclass
class BvcLayer:
    """Boundary-vector cells on arbitrary (distance, direction) preferences."""

    preferred_dists: np.ndarray   # (n_b,) metres
    preferred_dirs: np.ndarray    # (n_b,) radians
    sigma_r: float
    sigma_theta: float
    norm: float                   # population normalization N
    rates: np.ndarray = field(init=False)

    def __post_init__(self):
        self.preferred_dists = np.asarray(self.preferred_dists, dtype=float)
        self.preferred_dirs = np.asarray(self.preferred_dirs, dtype=float)
        if self.preferred_dists.shape != self.preferred_dirs.shape:
            raise ValueError("one (distance, direction) pair per cell")
        if not (self.sigma_r > 0 and self.sigma_theta > 0):
            raise ValueError("tuning widths must be > 0")
        if not self.norm > 0:
            raise ValueError("norm must be > 0")
        self.rates = np.zeros(self.n_b)

    @property
    def n_b(self) -> int:
        return len(self.preferred_dists)


def build_bvc_grid(
    n_dirs: int = DEFAULT_BVC_DIRS,
    n_dists: int = DEFAULT_BVC_DISTS,
    max_dist: float = 10.0,
    sigma_r: float = 0.5,
    sigma_theta: float = DEFAULT_SIGMA_THETA,
    norm: float | None = None,
) -> BvcLayer:
    """Cells on the product grid of uniform directions x uniform distances.

    Distances are n_dists uniform steps in (0, max_dist]; directions are
    n_dirs uniform allocentric angles. `norm` defaults to 1 here and is
    normally overridden to the beam count so rates are independent of
    sensor resolution.
    """
    if n_dirs < 1 or n_dists < 1:
        raise ValueError("n_dirs and n_dists must be >= 1")
    dists = max_dist * np.arange(1, n_dists + 1) / n_dists
    dirs = 2.0 * math.pi * np.arange(n_dirs) / n_dirs
    grid_dists, grid_dirs = np.meshgrid(dists, dirs)
    return BvcLayer(
        preferred_dists=grid_dists.ravel(),
        preferred_dirs=grid_dirs.ravel(),
        sigma_r=sigma_r,
        sigma_theta=sigma_theta,
        norm=1.0 if norm is None else float(norm),
    )


def _gauss(x: np.ndarray, sigma: float) -> np.ndarray:
    return np.exp(-0.5 * (x / sigma) ** 2) / (math.sqrt(2.0 * math.pi) * sigma)


def bvc_rates(layer: BvcLayer, scan: LidarScan) -> np.ndarray:
    """Rates for every cell given a scan; updates `layer.rates` in place.

    The bearing difference is wrapped to (-pi, pi] before the Gaussian so
    tuning is continuous across the +-pi seam. The sum over beams makes the
    result invariant to beam ordering.
    """
    dr = scan.ranges[None, :] - layer.preferred_dists[:, None]       # (n_b, n_res)
    dtheta = wrap_pi(scan.bearings[None, :] - layer.preferred_dirs[:, None])
    contrib = _gauss(dr, layer.sigma_r) * _gauss(dtheta, layer.sigma_theta)
    layer.rates = contrib.sum(axis=1) / layer.norm
    return layer.rates
