"""Per-scale reward cell: forward activation, reverse replay, TD refinement.

One reward cell per scale learns synapses from that scale's place cells.
Its activation is the weight-average of place activity (dot product over
L1 norm), rectified and capped, so it reads out "how goal-like is the
current place pattern" independent of overall firing magnitude.

Learning is replay-driven: when the goal is reached, the episode's stored
place snapshots are reactivated in reverse order with an exponential decay
over the replay index, accumulated into a weight update, normalized to a
unit maximum, and applied. A one-step TD rule then sharpens the prediction
at states where actual reward is observed.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .place import ActivitySnapshot

EPSILON = 1e-4          # division guard in the activation ratio
DEFAULT_CAP = 10.0      # activation ceiling B
DEFAULT_TAU_R = 10.0    # replay decay, in replay steps
DEFAULT_CAPACITY = 10_000


@dataclass
class RewardCell:
    """Synapses from one scale's place cells onto its reward cell."""

    weights: np.ndarray              # (n_p,), >= 0
    epsilon: float = EPSILON
    cap: float = DEFAULT_CAP

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)

    @classmethod
    def zeros(cls, n_p: int, **kwargs) -> "RewardCell":
        return cls(weights=np.zeros(n_p), **kwargs)


@dataclass
class TdConfig:
    """One-step temporal-difference parameters."""

    eta: float = 0.1        # learning rate
    r_next: float = 1.0     # observed reward

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be > 0")


class ReplayBuffer:
    """Chronological place-activity snapshots for the current episode."""

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        self.capacity = capacity
        self._snapshots: deque[ActivitySnapshot] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._snapshots)

    def __iter__(self):
        return iter(self._snapshots)

    def clear(self) -> None:
        self._snapshots.clear()

    def snapshots(self) -> list[ActivitySnapshot]:
        return list(self._snapshots)


def record_step(buffer: ReplayBuffer, snapshot: ActivitySnapshot) -> ReplayBuffer:
    """Append a snapshot, evicting the oldest when at capacity."""
    buffer._snapshots.append(snapshot)
    return buffer


def reward_activation(cell: RewardCell, pc_rates: np.ndarray) -> float:
    """Rectified, capped weight-average of place activity.

    a = (w . v) / max(||v||_1, eps);  v_r = clamp(a, 0, cap).
    The L1 normalization makes the value invariant to uniform scaling of
    the rates (above the guard), so it compares across activity levels.
    """
    a = raw_activation(cell.weights, pc_rates, cell.epsilon)
    return float(min(max(a, 0.0), cell.cap))


def raw_activation(weights: np.ndarray, pc_rates: np.ndarray, epsilon: float = EPSILON) -> float:
    """The uncapped activation ratio (w . v) / max(||v||_1, eps)."""
    if weights.shape != np.shape(pc_rates):
        raise ValueError("weights and rates must have equal length")
    return float(weights @ pc_rates) / max(float(np.abs(pc_rates).sum()), epsilon)


def accumulate_replay_updates(buffer: ReplayBuffer, tau_r: float) -> np.ndarray:
    """Raw replay accumulator before normalization.

    Snapshots are walked from the most recent (the goal state, replay index
    0) backwards; each contributes its per-snapshot max-normalized pattern
    weighted by exp(-t_r / tau_r). All-zero snapshots carry no trajectory
    information and are skipped without advancing the replay index.
    """
    snapshots = buffer.snapshots()
    if not snapshots:
        raise ValueError("replay buffer is empty")
    delta = np.zeros_like(snapshots[-1].rates)
    t_r = 0
    for snap in reversed(snapshots):
        peak = float(np.max(np.abs(snap.rates)))
        if peak == 0.0:
            continue
        delta += (snap.rates / peak) * np.exp(-t_r / tau_r)
        t_r += 1
    return delta


def reverse_replay(cell: RewardCell, buffer: ReplayBuffer, tau_r: float = DEFAULT_TAU_R) -> np.ndarray:
    """Apply one reverse-replay event to the reward weights.

    The accumulated update is normalized by its own max before being added,
    so every replay event contributes exactly 1 at its strongest synapse.
    An empty buffer or an all-zero accumulator is a warned no-op.
    """
    if len(buffer) == 0:
        warnings.warn("reverse_replay on empty buffer: no-op", stacklevel=2)
        return cell.weights
    delta = accumulate_replay_updates(buffer, tau_r)
    peak = float(np.max(np.abs(delta)))
    if peak == 0.0:
        warnings.warn("reverse_replay accumulated no update: no-op", stacklevel=2)
        return cell.weights
    cell.weights += delta / peak
    return cell.weights


def td_update(cell: RewardCell, pc_rates: np.ndarray, config: TdConfig) -> np.ndarray:
    """One-step TD refinement toward the observed reward.

    delta = r_next - w . v; weights move along delta * v and are clamped
    nonnegative (the rectified activation assumes excitatory synapses).
    """
    if cell.weights.shape != np.shape(pc_rates):
        raise ValueError("weights and rates must have equal length")
    delta = config.r_next - float(cell.weights @ pc_rates)
    cell.weights = np.maximum(cell.weights + config.eta * delta * pc_rates, 0.0)
    return cell.weights
