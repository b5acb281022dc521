"""Closed-loop action selection over multiscale reward predictions.

Each decision step runs a one-step internal rollout (preplay) of the
place-cell pattern expected after moving along each of the basis headings,
scores every imagined pattern with that scale's reward cell, and fuses the
per-scale directional reward profiles into a single continuous heading:

  1. preplay + reward readout give a raw profile Q_k(theta_d) per scale;
  2. scales whose best prediction clears a validity threshold participate;
  3. profiles are max-normalized so scales compete on directional shape,
     not magnitude;
  4. each valid scale is weighted by the total variation of its normalized
     profile (flat profiles carry no directional information);
  5. headings pointing into nearby obstacles are zeroed across all scales;
  6. the weighted profiles are summed and the move direction is the
     circular mean of the fused profile, which need not be a basis heading.

When no scale is valid, all headings are blocked, or the circular mean is
degenerate, the agent reverts to exploration for a fixed number of steps.
A loop guard likewise forces exploration when the recent path shows a full
turn's worth of heading change without net displacement.

Everything here is read-only over the layer stacks: deciding never mutates
weights, membranes, or traces.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .adjacency import AdjacencyTensor
from .geometry import wrap_angle, wrap_pi
from .orientation import DEFAULT_N_HD, basis_headings
from .reward import RewardCell, raw_activation
from .world import LidarScan

DEGENERATE_RESULTANT = 1e-12


@dataclass
class FusionConfig:
    """Fusion and safety parameters for the decision step."""

    validity_threshold: float = 1e-3
    d_safe: float = 0.3              # metres; obstacle-mask distance
    epsilon: float = 1e-4            # normalization guard
    n_hd: int = DEFAULT_N_HD
    variation_wraparound: bool = False   # include the profile's seam difference

    def __post_init__(self):
        if not self.validity_threshold > 0:
            raise ValueError("validity_threshold must be > 0")
        if self.d_safe < 0:
            raise ValueError("d_safe must be >= 0")


@dataclass
class ExplorationConfig:
    """Random-walk and loop-prevention parameters."""

    sigma_turn: float = math.radians(30.0)   # per-step heading noise bound
    explore_duration: int = 50               # steps spent exploring after a trigger
    n_loop: int = 100                        # loop-guard window length (steps)
    delta_loop: float = 0.5                  # metres; displacement threshold
    max_resample: int = 16                   # clearance resampling attempts


@dataclass
class FusedProfile:
    """Everything the decision step computed, for logging and tests."""

    q: np.ndarray                 # (n_scales, n_hd) raw reward predictions
    q_norm: np.ndarray            # (n_scales, n_hd) normalized profiles
    variation: np.ndarray         # (n_scales,)
    alpha: np.ndarray             # (n_scales,) mixing weights (0 outside valid set)
    valid: tuple[int, ...]        # indices of scales in the validity set
    masked: np.ndarray            # (n_hd,) True where the heading was blocked
    fused: np.ndarray             # (n_hd,) fused profile
    theta_star: Optional[float]   # continuous action heading, or None


@dataclass
class Decision:
    action: str                   # "move" or "explore"
    theta: Optional[float]
    profile: Optional[FusedProfile]
    reason: str = ""


@dataclass
class ModeState:
    """Exploration/exploitation mode plus loop-guard accumulators."""

    mode: str = "exploiting"
    explore_steps_remaining: int = 0
    turn_accumulator: float = 0.0
    displacement_window: deque = field(default_factory=deque)
    turn_window: deque = field(default_factory=deque)
    last_heading: Optional[float] = None

    def start_exploring(self, duration: int) -> None:
        self.mode = "exploring"
        self.explore_steps_remaining = duration

    def reset_guard(self) -> None:
        self.turn_window.clear()
        self.displacement_window.clear()
        self.turn_accumulator = 0.0
        self.last_heading = None


# ---------------------------------------------------------------------------
# Pipeline stages
# ---------------------------------------------------------------------------

def preplay(adjacency: AdjacencyTensor, pc_rates: np.ndarray, a: int) -> np.ndarray:
    """Imagined place-cell pattern after one step along basis heading a.

    v_hat = tanh(relu(W[a] @ v - v)): adjacency projects current activity
    onto the cells reachable along a, minus the cells already active. The
    tensor's diagonal is structurally zero, so no cell excites itself.
    Pure: nothing is mutated.
    """
    if not 0 <= a < adjacency.n_hd:
        raise ValueError(f"basis index {a} out of range")
    drive = adjacency.slice(a) @ pc_rates - pc_rates
    return np.tanh(np.maximum(drive, 0.0))


def scale_q(cell: RewardCell, preplay_rates: np.ndarray) -> float:
    """Reward estimate for an imagined pattern: the uncapped activation ratio.

    Unlike the online reward readout there is no ceiling; the following
    normalization makes any cap irrelevant.
    """
    return raw_activation(cell.weights, preplay_rates, cell.epsilon)


def normalize_profile(q: np.ndarray, epsilon: float = 1e-4) -> np.ndarray:
    """Scale a directional profile by its own maximum (plus guard)."""
    q = np.asarray(q, dtype=float)
    return q / (q.max() + epsilon)


def variation(q_norm: np.ndarray, wraparound: bool = False) -> float:
    """Total directional variation: sum of |successive differences|.

    By default only the n_hd - 1 consecutive pairs are summed (no seam
    term), so the value depends on which heading is indexed first; set
    `wraparound` to close the cycle.
    """
    q_norm = np.asarray(q_norm, dtype=float)
    if len(q_norm) < 2:
        raise ValueError("need at least two headings")
    total = float(np.abs(np.diff(q_norm)).sum())
    if wraparound:
        total += abs(float(q_norm[0]) - float(q_norm[-1]))
    return total


def mixing_weights(variations: dict[int, float], epsilon: float = 1e-4) -> dict[int, float]:
    """Normalize variation values across the valid scales into weights."""
    total = sum(variations.values()) + epsilon
    return {k: v / total for k, v in variations.items()}


def validity_set(maxima: Sequence[float], threshold: float) -> tuple[int, ...]:
    """Indices of scales whose best raw prediction exceeds the threshold."""
    return tuple(k for k, m in enumerate(maxima) if m > threshold)


def cone_min_ranges(scan: LidarScan, n_hd: int = DEFAULT_N_HD) -> np.ndarray:
    """Minimum beam range within +-pi/n_hd of each basis heading."""
    headings = basis_headings(n_hd)
    half_width = math.pi / n_hd
    diff = np.abs(wrap_pi(scan.bearings[None, :] - headings[:, None]))
    out = np.empty(n_hd)
    for d in range(n_hd):
        in_cone = diff[d] <= half_width
        out[d] = scan.ranges[in_cone].min() if in_cone.any() else np.inf
    return out


def obstacle_mask(
    profiles: np.ndarray,
    scan: LidarScan,
    d_safe: float,
    n_hd: int = DEFAULT_N_HD,
) -> tuple[np.ndarray, np.ndarray]:
    """Zero every scale's profile at headings whose cone is too close.

    Returns (masked profiles, boolean mask over headings). With d_safe = 0
    nothing is ever masked (ranges are strictly positive).
    """
    profiles = np.atleast_2d(np.asarray(profiles, dtype=float))
    mask = cone_min_ranges(scan, n_hd) < d_safe
    masked = profiles.copy()
    masked[:, mask] = 0.0
    return masked, mask


def fuse(profiles: np.ndarray, alpha: dict[int, float], valid: Sequence[int]) -> np.ndarray:
    """Weighted sum of the valid scales' profiles."""
    profiles = np.atleast_2d(np.asarray(profiles, dtype=float))
    fused = np.zeros(profiles.shape[1])
    for k in valid:
        fused += alpha.get(k, 0.0) * profiles[k]
    return fused


def action_angle(q: np.ndarray, headings: np.ndarray | None = None) -> Optional[float]:
    """Circular mean of a directional profile, in [0, 2*pi).

    Returns None when the resultant vector is degenerate (both component
    sums below 1e-12 in magnitude), e.g. for a uniform or all-zero profile.
    """
    q = np.asarray(q, dtype=float)
    if headings is None:
        headings = basis_headings(len(q))
    s = float(q @ np.sin(headings))
    c = float(q @ np.cos(headings))
    if abs(s) < DEGENERATE_RESULTANT and abs(c) < DEGENERATE_RESULTANT:
        return None
    return wrap_angle(math.atan2(s, c))


# ---------------------------------------------------------------------------
# Decision step and mode control
# ---------------------------------------------------------------------------

def decide(
    stacks: Sequence,
    scan: LidarScan,
    mode_state: ModeState,
    fusion: FusionConfig,
    exploration: ExplorationConfig,
) -> Decision:
    """Full exploitation decision over the given scale stacks.

    Each stack must expose `.adjacency`, `.place.rates`, and `.reward`.
    On any fall-through condition (empty validity set, every heading
    blocked, degenerate circular mean) the mode state is switched to
    exploration and an "explore" decision is returned; the caller draws
    the actual exploration heading.
    """
    n_hd = fusion.n_hd
    headings = basis_headings(n_hd)
    n_scales = len(stacks)

    q = np.zeros((n_scales, n_hd))
    for k, stack in enumerate(stacks):
        rates = stack.place.rates
        for a in range(n_hd):
            q[k, a] = scale_q(stack.reward, preplay(stack.adjacency, rates, a))

    valid = validity_set(q.max(axis=1), fusion.validity_threshold)
    q_norm = np.vstack([normalize_profile(q[k], fusion.epsilon) for k in range(n_scales)])

    var = np.zeros(n_scales)
    for k in valid:
        var[k] = variation(q_norm[k], fusion.variation_wraparound)
    alpha_map = mixing_weights({k: var[k] for k in valid}, fusion.epsilon) if valid else {}
    alpha = np.zeros(n_scales)
    for k, a_k in alpha_map.items():
        alpha[k] = a_k

    masked_profiles, mask = obstacle_mask(q_norm, scan, fusion.d_safe, n_hd)
    fused = fuse(masked_profiles, alpha_map, valid)
    theta = action_angle(fused, headings)

    profile = FusedProfile(
        q=q, q_norm=q_norm, variation=var, alpha=alpha, valid=valid,
        masked=mask, fused=fused, theta_star=theta,
    )

    if not valid:
        mode_state.start_exploring(exploration.explore_duration)
        return Decision("explore", None, profile, reason="no-valid-scale")
    if mask.all():
        mode_state.start_exploring(exploration.explore_duration)
        return Decision("explore", None, profile, reason="blocked")
    if theta is None:
        mode_state.start_exploring(exploration.explore_duration)
        return Decision("explore", None, profile, reason="degenerate")
    return Decision("move", theta, profile)


def _cone_range_at(scan: LidarScan, theta: float, n_hd: int) -> float:
    half_width = math.pi / n_hd
    diff = np.abs(wrap_pi(scan.bearings - theta))
    in_cone = diff <= half_width
    return float(scan.ranges[in_cone].min()) if in_cone.any() else math.inf


def explore_step(
    state,
    rng: np.random.Generator,
    scan: LidarScan,
    exploration: ExplorationConfig,
    fusion: FusionConfig,
) -> float:
    """Random-walk heading: previous heading plus bounded uniform noise.

    Candidates whose forward cone is within d_safe of an obstacle are
    rejected and resampled; if no clear heading is found the maximally
    clear basis heading is taken (ties toward the lower index).
    """
    for _ in range(exploration.max_resample):
        theta = wrap_angle(
            state.heading + rng.uniform(-exploration.sigma_turn, exploration.sigma_turn)
        )
        if _cone_range_at(scan, theta, fusion.n_hd) >= fusion.d_safe:
            return theta
    clearances = cone_min_ranges(scan, fusion.n_hd)
    return float(basis_headings(fusion.n_hd)[int(np.argmax(clearances))])


def loop_guard(
    mode_state: ModeState,
    position: np.ndarray,
    heading: float,
    exploration: ExplorationConfig,
) -> str:
    """Detect spinning in place: a full turn's heading change with little
    net displacement over the last n_loop steps.

    Returns "triggered" (and switches the mode to exploration, resetting
    the accumulators) or "ok".
    """
    turn = 0.0
    if mode_state.last_heading is not None:
        turn = abs(wrap_pi(heading - mode_state.last_heading))
    mode_state.last_heading = heading

    mode_state.turn_window.append(turn)
    mode_state.displacement_window.append(np.asarray(position, dtype=float).copy())
    if len(mode_state.turn_window) > exploration.n_loop:
        mode_state.turn_window.popleft()
        mode_state.displacement_window.popleft()
    mode_state.turn_accumulator = float(sum(mode_state.turn_window))

    if len(mode_state.turn_window) == exploration.n_loop:
        net = float(np.hypot(*(mode_state.displacement_window[-1] - mode_state.displacement_window[0])))
        if mode_state.turn_accumulator > 2.0 * math.pi and net < exploration.delta_loop:
            mode_state.start_exploring(exploration.explore_duration)
            mode_state.reset_guard()
            return "triggered"
    return "ok"
