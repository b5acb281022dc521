"""Assembly of per-scale stacks and their per-tick update order.

A ScaleStack is the unit replicated across spatial scales: one BVC layer,
one place layer with its plasticity constants, the heading-gated adjacency
tensor, activity traces, and a reward cell with its episode replay buffer.
Stacks at different scales are independent and may be updated concurrently;
a stack is owned by exactly one simulation worker at a time.

The canonical tick ordering (see `simulation`) is: sense (BVC + place
update), then structure learning with the *previous* step's traces, then
trace refresh after the move. That way the adjacency rule sees "cell i
active now, cell j traced from just before, gated by the heading that
produced the transition".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adjacency import AdjacencyTensor, adjacency_update
from .boundary import BvcLayer, build_bvc_grid, bvc_rates
from .config import ScaleParams, SimConfig, derive_rng
from .place import (
    PlaceLayer,
    PlasticityConfig,
    TraceState,
    init_place_layer,
    oja_update,
    pc_step,
    snapshot_activity,
    trace_step,
)
from .reward import ReplayBuffer, RewardCell, record_step
from .world import AgentState, EnvironmentSpec, LidarScan, raycast


@dataclass
class ScaleStack:
    """Everything one spatial scale owns."""

    params: ScaleParams
    index: int
    bvc: BvcLayer
    place: PlaceLayer
    plasticity: PlasticityConfig
    adjacency: AdjacencyTensor
    traces: TraceState
    reward: RewardCell
    buffer: ReplayBuffer

    def reset_transient(self) -> None:
        """Clear activity state (membrane, rates, traces, buffer); keep weights."""
        self.place.reset_activity()
        self.traces.reset()
        self.buffer.clear()

    def weight_state(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Copies of all learned weights, for purity checks."""
        return self.place.w_pb.copy(), self.adjacency.w.copy(), self.reward.weights.copy()


def build_scale_stack(
    params: ScaleParams,
    sim: SimConfig,
    env: EnvironmentSpec,
    index: int,
) -> ScaleStack:
    """Construct one scale's stack with seeded sparse input weights."""
    max_dist = params.bvc_max_dist if params.bvc_max_dist is not None else env.diagonal / 2.0
    norm = params.n_bvc_norm if params.n_bvc_norm is not None else float(sim.n_res)
    bvc = build_bvc_grid(
        n_dirs=params.bvc_dirs,
        n_dists=params.bvc_dists,
        max_dist=max_dist,
        sigma_r=params.sigma_r,
        sigma_theta=params.sigma_theta,
        norm=norm,
    )
    gamma_pb = params.gamma_pb if params.gamma_pb is not None else sim.dynamics.gamma_pb
    gamma_pp = params.gamma_pp if params.gamma_pp is not None else sim.dynamics.gamma_pp
    place = init_place_layer(
        n_p=params.n_pc,
        n_b=bvc.n_b,
        config=sim.plasticity,
        seed=derive_rng(sim.seed, 101, index),
        tau_p=sim.dynamics.tau_p,
        gamma_pb=gamma_pb,
        gamma_pp=gamma_pp,
        psi=sim.dynamics.psi,
    )
    return ScaleStack(
        params=params,
        index=index,
        bvc=bvc,
        place=place,
        plasticity=sim.plasticity,
        adjacency=AdjacencyTensor(n_hd=sim.fusion.n_hd, n_p=params.n_pc, floor=sim.adjacency_floor),
        traces=TraceState.zeros(params.n_pc, sim.fusion.n_hd),
        reward=RewardCell.zeros(params.n_pc, epsilon=sim.reward.epsilon, cap=sim.reward.cap),
        buffer=ReplayBuffer(capacity=sim.reward.buffer_capacity),
    )


def build_stacks(sim: SimConfig, env: EnvironmentSpec) -> list[ScaleStack]:
    return [build_scale_stack(p, sim, env, i) for i, p in enumerate(sim.scales)]


# ---------------------------------------------------------------------------
# Per-tick stack updates
# ---------------------------------------------------------------------------

def sense(stack: ScaleStack, scan: LidarScan, dt: float) -> np.ndarray:
    """Update BVC then place rates from a scan; returns the BVC rates."""
    vb = bvc_rates(stack.bvc, scan)
    pc_step(stack.place, vb, dt)
    return vb


def learn_structure(stack: ScaleStack, vb: np.ndarray, dt: float) -> None:
    """Adjacency + input-weight plasticity for one tick.

    Must run after `sense` and before `refresh_traces`: the adjacency rule
    pairs the fresh rates with traces that still describe the recent past.
    """
    adjacency_update(
        stack.adjacency,
        stack.place.rates,
        stack.traces.pc,
        stack.traces.hd,
        dt,
        stack.plasticity.tau_w_pp,
    )
    oja_update(stack.place, vb, dt, stack.plasticity)


def record_snapshot(stack: ScaleStack, step: int) -> None:
    record_step(stack.buffer, snapshot_activity(stack.place, step))


def refresh_traces(stack: ScaleStack, hd_rate_vec: np.ndarray, dt: float) -> None:
    trace_step(stack.traces, stack.place.rates, hd_rate_vec, dt, stack.plasticity.tau_m)


# ---------------------------------------------------------------------------
# Map sampling (measurement only; restores all activity state)
# ---------------------------------------------------------------------------

def sample_rates(
    stack: ScaleStack,
    env: EnvironmentSpec,
    position,
    sim: SimConfig,
) -> np.ndarray:
    """Settled place rates at an arbitrary position, without side effects.

    Runs the sensing loop `sim.settle_iters` times from a cleared membrane
    so the recurrent inhibition reaches its fixed point, then restores the
    stack's live activity. Used for rate-map rendering and field metrics.
    """
    saved_membrane = stack.place.membrane.copy()
    saved_rates = stack.place.rates.copy()
    try:
        stack.place.reset_activity()
        state = AgentState(position=np.asarray(position, dtype=float), heading=0.0)
        scan = raycast(env, state, sim.n_res, sim.max_range)
        vb = bvc_rates(stack.bvc, scan)
        for _ in range(max(1, sim.settle_iters)):
            pc_step(stack.place, vb, stack.plasticity.dt)
        return stack.place.rates.copy()
    finally:
        stack.place.membrane = saved_membrane
        stack.place.rates = saved_rates


def sample_grid(
    stack: ScaleStack,
    env: EnvironmentSpec,
    resolution: int,
    sim: SimConfig,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Settled rates on a uniform grid of cell-center positions.

    Returns (xs, ys, rates) where rates has shape (resolution_y, resolution_x,
    n_p), indexed [iy, ix] with y increasing with iy.
    """
    xs = (np.arange(resolution) + 0.5) * env.width / resolution
    ys = (np.arange(resolution) + 0.5) * env.height / resolution
    out = np.zeros((resolution, resolution, stack.place.n_p))
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            out[iy, ix] = sample_rates(stack, env, (x, y), sim)
    return xs, ys, out
