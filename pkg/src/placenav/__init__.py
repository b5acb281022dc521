"""Multiscale place-field navigation.

Parallel boundary-vector / place / reward layers at several spatial scales,
replay-based reward learning, one-step preplay, and variation-weighted
fusion for continuous action selection, plus the experiment harness and CLI
around them.
"""

from .adjacency import AdjacencyTensor, adjacency_update
from .boundary import BvcLayer, build_bvc_grid, bvc_rates
from .config import (
    ExperimentSuite,
    ScaleParams,
    SimConfig,
    config_hash,
    derive_rng,
    desk_scale,
    load_suite,
    paper_scale,
    save_suite,
)
from .harness import (
    StrategySpec,
    TrialRecord,
    run_experiment1,
    run_experiment2,
    run_goal_seeking,
    run_mapping_phase,
    strategies_for,
    summarize_records,
)
from .navigator import (
    Decision,
    ExplorationConfig,
    FusedProfile,
    FusionConfig,
    ModeState,
    action_angle,
    decide,
    explore_step,
    fuse,
    loop_guard,
    mixing_weights,
    normalize_profile,
    obstacle_mask,
    preplay,
    scale_q,
    validity_set,
    variation,
)
from .orientation import HeadDirectionLayer, basis_headings, hd_rates, nearest_basis_heading
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
from .render import render_heatmap
from .reward import (
    ReplayBuffer,
    RewardCell,
    TdConfig,
    record_step,
    reverse_replay,
    reward_activation,
    td_update,
)
from .scales import ScaleStack, build_stacks, sample_rates
from .simulation import run_episode, run_mapping
from .snapshot import load_snapshot, save_snapshot, snapshot_hash
from .stats import StatsSummary, one_way_anova, summarize
from .world import (
    AgentState,
    EnvironmentSpec,
    LidarScan,
    bundled_environment,
    bundled_environment_names,
    in_goal,
    load_environment,
    parse_environment,
    raycast,
    resolve_environment,
    step_agent,
)

__version__ = "0.1.0"
