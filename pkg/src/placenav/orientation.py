"""Head-direction population code and the canonical basis-heading set.

Eight head-direction cells at 45-degree spacing define the basis headings
used everywhere downstream (adjacency slices, preplay, fusion). A cell's
rate is the rectified projection of the agent's velocity onto its preferred
direction; rates are zero when the agent is stationary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import wrap_pi

DEFAULT_N_HD = 8


def basis_headings(n_hd: int = DEFAULT_N_HD) -> np.ndarray:
    """The canonical allocentric basis headings 2*pi*d/n_hd, d = 0..n_hd-1."""
    return 2.0 * np.pi * np.arange(n_hd) / n_hd


@dataclass
class HeadDirectionLayer:
    """Population of head-direction cells with uniformly spaced preferences.

    `anchor` is the heading of the fixed external reference cue; the
    simulated compass is perfect, so it defaults to the world x-axis.
    """

    n_hd: int = DEFAULT_N_HD
    anchor: float = 0.0
    preferred_dirs: np.ndarray = field(init=False)
    rates: np.ndarray = field(init=False)

    def __post_init__(self):
        self.preferred_dirs = basis_headings(self.n_hd)
        self.rates = np.zeros(self.n_hd)


def hd_rates(layer: HeadDirectionLayer, velocity) -> np.ndarray:
    """Rectified projection of velocity onto each preferred direction.

    The raw projection can be negative for cells pointing away from the
    motion; rates are clipped at zero so they can gate plasticity. Updates
    `layer.rates` in place and returns it.
    """
    velocity = np.asarray(velocity, dtype=float)
    angles = layer.preferred_dirs + layer.anchor
    raw = velocity[0] * np.cos(angles) + velocity[1] * np.sin(angles)
    layer.rates = np.maximum(raw, 0.0)
    return layer.rates


def nearest_basis_heading(theta: float, n_hd: int = DEFAULT_N_HD) -> int:
    """Index of the basis heading circularly closest to theta.

    Ties break toward the lower index.
    """
    dirs = basis_headings(n_hd)
    dist = np.abs(wrap_pi(theta - dirs))
    return int(np.argmin(dist))
