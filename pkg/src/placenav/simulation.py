"""Closed-loop episode engine: sense, learn, decide, move.

One tick:

  1. raycast at the current position;
  2. every scale updates BVC and place rates from the scan;
  3. (plastic runs) adjacency learning pairs the fresh rates with the
     traces carried over from previous ticks, then the input weights adapt;
  4. every scale records a place-activity snapshot into its replay buffer;
  5. goal test: on success with reward learning enabled, each scale runs
     one reverse-replay event over its episode buffer followed by a TD
     refinement at the goal pattern, and the episode ends;
  6. a heading is chosen (exploitation decision or exploration step);
  7. the agent moves (collision-clamped), head-direction rates are computed
     from the realised velocity, and all traces are refreshed;
  8. the loop guard watches for spinning in place.

Mapping runs are the same loop with exploration forced on, goal detection
ignored, and reward weights frozen.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import SimConfig
from .navigator import (
    Decision,
    ModeState,
    decide,
    explore_step,
    loop_guard,
)
from .orientation import HeadDirectionLayer, hd_rates
from .reward import TdConfig, reverse_replay, td_update
from .scales import ScaleStack, learn_structure, record_snapshot, refresh_traces, sense
from .world import EnvironmentSpec, in_goal, raycast, start_state, step_agent


@dataclass
class StepLog:
    """One per-tick row of the decision log."""

    step: int
    x: float
    y: float
    heading: float
    mode: str
    valid_mask: int          # bit k set when decision scale k was valid
    alpha: tuple[float, ...]
    dominant_scale: int      # argmax alpha among decision scales; -1 if none
    theta_star: Optional[float]
    masked_mask: int         # bit d set when basis heading d was blocked


@dataclass
class EpisodeResult:
    steps: int
    reached_goal: bool
    replay_applied: bool
    trajectory: list[StepLog] = field(default_factory=list)
    positions: list[tuple[float, float]] = field(default_factory=list)


def _bitmask(indices) -> int:
    out = 0
    for i in indices:
        out |= 1 << int(i)
    return out


def _apply_reward_learning(stacks: Sequence[ScaleStack], sim: SimConfig) -> None:
    for stack in stacks:
        reverse_replay(stack.reward, stack.buffer, sim.reward.tau_r)
        td_update(stack.reward, stack.place.rates, TdConfig(eta=sim.reward.eta, r_next=1.0))


def run_episode(
    env: EnvironmentSpec,
    stacks: Sequence[ScaleStack],
    sim: SimConfig,
    rng: np.random.Generator,
    *,
    decision_scales: Sequence[int] | None = None,
    plastic: bool = True,
    reward_learning: bool = False,
    max_steps: int = 10_000,
    explore_only: bool = False,
    ignore_goal: bool = False,
    keep_log: bool = False,
) -> EpisodeResult:
    """Run one episode; returns step count, goal flag, and optional logs.

    `decision_scales` selects which stacks feed the exploitation decision
    (default: all); every stack present senses and, when `plastic`, learns.
    The episode replay buffers are cleared on entry.
    """
    if decision_scales is None:
        decision_scales = list(range(len(stacks)))
    decision_stacks = [stacks[i] for i in decision_scales]

    dt = sim.plasticity.dt
    hd_layer = HeadDirectionLayer(n_hd=sim.fusion.n_hd)
    mode = ModeState(mode="exploring" if explore_only else "exploiting")
    state = start_state(env)
    for stack in stacks:
        stack.buffer.clear()

    result = EpisodeResult(steps=max_steps, reached_goal=False, replay_applied=False)

    for step in range(max_steps):
        scan = raycast(env, state, sim.n_res, sim.max_range)
        vb_per_stack = [sense(stack, scan, dt) for stack in stacks]
        if plastic:
            for stack, vb in zip(stacks, vb_per_stack):
                learn_structure(stack, vb, dt)
        for stack in stacks:
            record_snapshot(stack, step)

        if not ignore_goal and in_goal(state, env):
            if reward_learning:
                _apply_reward_learning(stacks, sim)
                result.replay_applied = True
            result.steps = step
            result.reached_goal = True
            return result

        decision: Optional[Decision] = None
        if explore_only:
            theta = explore_step(state, rng, scan, sim.exploration, sim.fusion)
            mode.mode = "exploring"
        elif mode.mode == "exploring" and mode.explore_steps_remaining > 0:
            theta = explore_step(state, rng, scan, sim.exploration, sim.fusion)
            mode.explore_steps_remaining -= 1
            if mode.explore_steps_remaining <= 0:
                mode.mode = "exploiting"
        else:
            mode.mode = "exploiting"
            decision = decide(decision_stacks, scan, mode, sim.fusion, sim.exploration)
            if decision.action == "move":
                theta = decision.theta
            else:
                theta = explore_step(state, rng, scan, sim.exploration, sim.fusion)
                mode.explore_steps_remaining -= 1

        if keep_log:
            profile = decision.profile if decision is not None else None
            result.trajectory.append(
                StepLog(
                    step=step,
                    x=float(state.position[0]),
                    y=float(state.position[1]),
                    heading=float(theta),
                    mode=mode.mode if decision is None or decision.action != "move" else "exploiting",
                    valid_mask=_bitmask(profile.valid) if profile else 0,
                    alpha=tuple(profile.alpha) if profile else (),
                    dominant_scale=(
                        int(np.argmax(profile.alpha)) if profile is not None and profile.alpha.any() else -1
                    ),
                    theta_star=profile.theta_star if profile else None,
                    masked_mask=_bitmask(np.nonzero(profile.masked)[0]) if profile else 0,
                )
            )
            result.positions.append((float(state.position[0]), float(state.position[1])))

        state = step_agent(env, state, theta, sim.step_len, sim.collision_margin)
        hd_vec = hd_rates(hd_layer, state.velocity)
        for stack in stacks:
            refresh_traces(stack, hd_vec, dt)
        if not explore_only:
            loop_guard(mode, state.position, state.heading, sim.exploration)

    return result


def run_mapping(
    env: EnvironmentSpec,
    stacks: Sequence[ScaleStack],
    sim: SimConfig,
    steps: int,
    rng: np.random.Generator,
) -> None:
    """Reward-free structure learning: a plastic exploration random walk."""
    if not steps > 0:
        raise ValueError("mapping steps must be > 0")
    run_episode(
        env,
        stacks,
        sim,
        rng,
        plastic=True,
        reward_learning=False,
        max_steps=steps,
        explore_only=True,
        ignore_goal=True,
    )
