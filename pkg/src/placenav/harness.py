"""Experiment orchestration: mapping/goal-seek phases, protocols, persistence.

Two protocols are implemented.

Path efficiency (experiment 1): per environment, one reward-free mapping
phase trains all scales in parallel on an identical sensory stream, a
single goal-seek with learning enabled establishes the reward map through
one reverse-replay event, the weights are frozen to a snapshot, and every
strategy is then evaluated from that same snapshot. Strategies therefore
differ only in which scales feed the decision step.

Policy learning (experiment 2): per strategy and per seeded run, the agent
starts with blank weights and runs a fixed number of episodes from the
same start pose with all plasticity and reward learning active throughout;
the per-episode step count traces out the learning curve.

All randomness is derived from the config seed through labelled seed
paths, so reruns with the same config produce byte-identical CSVs.
Trial wall_time is simulated time (step count x sim_seconds_per_step):
the step cap, not the clock, is the timeout authority, which keeps
results hardware-independent.
"""

from __future__ import annotations

import csv
import dataclasses
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ExperimentSuite, SimConfig, config_hash, derive_rng
from .scales import ScaleStack, build_scale_stack, build_stacks
from .simulation import EpisodeResult, run_episode, run_mapping
from .snapshot import save_snapshot, snapshot_hash, stacks_equal
from .stats import StatsSummary, summarize
from .world import EnvironmentSpec, resolve_environment


@dataclass(frozen=True)
class StrategySpec:
    """A navigation strategy: which scale stacks feed the decision step."""

    name: str
    scales: tuple[int, ...]


@dataclass
class TrialRecord:
    strategy: str
    environment: str
    trial: int
    episode: int
    step_count: int
    reached_goal: bool
    wall_time: float        # simulated seconds
    seed: int


TRIAL_FIELDS = [f.name for f in dataclasses.fields(TrialRecord)]


def strategies_for(sim: SimConfig) -> list[StrategySpec]:
    """The single-scale strategies plus the multiscale strategy."""
    singles = [StrategySpec(p.name, (i,)) for i, p in enumerate(sim.scales)]
    return singles + [StrategySpec("multiscale", tuple(range(len(sim.scales))))]


def _record(
    sim: SimConfig,
    result: EpisodeResult,
    *,
    strategy: str,
    environment: str,
    trial: int,
    episode: int,
    seed: int,
) -> TrialRecord:
    steps = max(result.steps, 1)
    return TrialRecord(
        strategy=strategy,
        environment=environment,
        trial=trial,
        episode=episode,
        step_count=steps,
        reached_goal=result.reached_goal,
        wall_time=steps * sim.sim_seconds_per_step,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Phases
# ---------------------------------------------------------------------------

def run_mapping_phase(
    env: EnvironmentSpec,
    sim: SimConfig,
    steps: int,
    seed: int,
) -> list[ScaleStack]:
    """Build fresh stacks and run the reward-free exploration walk.

    Both the sparse weight initialization and the walk derive from `seed`,
    so identical calls produce identical trained stacks.
    """
    seeded = dataclasses.replace(sim, seed=seed)
    stacks = build_stacks(seeded, env)
    run_mapping(env, stacks, seeded, steps, derive_rng(seed, 1))
    return stacks


def run_goal_seeking(
    env: EnvironmentSpec,
    stacks: Sequence[ScaleStack],
    strategy: StrategySpec,
    sim: SimConfig,
    *,
    max_steps: int,
    learning: bool,
    seed: int,
    keep_log: bool = False,
    trial: int = 0,
    episode: int = 0,
) -> tuple[TrialRecord, EpisodeResult]:
    """One closed-loop goal-seek episode under the given strategy."""
    result = run_episode(
        env,
        stacks,
        sim,
        derive_rng(seed, 2),
        decision_scales=strategy.scales,
        plastic=learning,
        reward_learning=learning,
        max_steps=max_steps,
        keep_log=keep_log,
    )
    record = _record(
        sim, result,
        strategy=strategy.name, environment=env.name,
        trial=trial, episode=episode, seed=seed,
    )
    return record, result


# ---------------------------------------------------------------------------
# Experiment 1: path efficiency with pretraining
# ---------------------------------------------------------------------------

def run_experiment1(suite: ExperimentSuite, out_dir: str | Path) -> list[TrialRecord]:
    """Mapping + single replay per environment, then frozen evaluation trials.

    Writes results.csv (one row per evaluation trial; the config_hash column
    carries the frozen snapshot's digest for that environment), summary.csv,
    and a step-count figure. Returns the trial records.
    """
    sim = suite.sim
    cfg = suite.experiment1
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    strategies = strategies_for(sim)
    records: list[TrialRecord] = []
    hashes: list[str] = []

    for env_idx, env_name in enumerate(cfg.environments):
        env = resolve_environment(env_name)
        map_seed = _child_seed(sim.seed, 10, env_idx)
        stacks = run_mapping_phase(env, sim, cfg.mapping_steps, map_seed)

        learn_seed = _child_seed(sim.seed, 11, env_idx)
        learn_result = run_episode(
            env, stacks, sim, derive_rng(learn_seed),
            plastic=True, reward_learning=True, max_steps=cfg.learn_max_steps,
        )
        if not learn_result.reached_goal:
            warnings.warn(
                f"experiment 1: learning goal-seek timed out in {env_name}; "
                "evaluation proceeds with an empty reward map"
            )

        snap_path = out_dir / f"{env_name}_frozen.npz"
        save_snapshot(snap_path, stacks, sim, _env_text(env_name), env_name)
        frozen_hash = snapshot_hash(snap_path)

        frozen_weights = [s.weight_state() for s in stacks]
        for strat_idx, strategy in enumerate(strategies):
            for trial in range(cfg.trials):
                for stack in stacks:
                    stack.reset_transient()
                seed = _child_seed(sim.seed, 12, env_idx, strat_idx, trial)
                record, _ = run_goal_seeking(
                    env, stacks, strategy, sim,
                    max_steps=cfg.eval_max_steps, learning=False,
                    seed=seed, trial=trial,
                )
                records.append(record)
                hashes.append(frozen_hash)
        _assert_frozen(stacks, frozen_weights, env_name)

    write_records_csv(out_dir / "results.csv", records, hashes)
    write_summary_csv(out_dir / "summary.csv", records)
    _write_exp1_figure(out_dir, records)
    return records


def _assert_frozen(stacks, frozen_weights, env_name: str) -> None:
    for stack, (w_pb, adj, w_r) in zip(stacks, frozen_weights):
        ok = (
            np.array_equal(stack.place.w_pb, w_pb)
            and np.array_equal(stack.adjacency.w, adj)
            and np.array_equal(stack.reward.weights, w_r)
        )
        if not ok:
            raise AssertionError(f"evaluation mutated frozen weights in {env_name}")


# ---------------------------------------------------------------------------
# Experiment 2: online policy learning
# ---------------------------------------------------------------------------

def run_experiment2(suite: ExperimentSuite, out_dir: str | Path) -> list[TrialRecord]:
    """Tabula-rasa episodes with all plasticity active; learning curves out.

    Single-scale strategies instantiate only their own stack (the other
    scales would neither sense differently nor influence their decisions).
    Writes results.csv, episode_means.csv, delta_steps.csv, and the
    convergence figure.
    """
    sim = suite.sim
    cfg = suite.experiment2
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    env = resolve_environment(cfg.environment)
    strategies = strategies_for(sim)
    records: list[TrialRecord] = []

    for strat_idx, strategy in enumerate(strategies):
        for run in range(cfg.runs):
            run_seed = _child_seed(sim.seed, 20, strat_idx, run)
            seeded = dataclasses.replace(sim, seed=run_seed)
            stacks = [
                build_scale_stack(sim.scales[i], seeded, env, i) for i in strategy.scales
            ]
            decision_scales = list(range(len(stacks)))
            for episode in range(cfg.episodes):
                result = run_episode(
                    env, stacks, seeded, derive_rng(run_seed, 21, episode),
                    decision_scales=decision_scales,
                    plastic=True, reward_learning=True,
                    max_steps=cfg.episode_max_steps,
                )
                records.append(
                    _record(
                        sim, result,
                        strategy=strategy.name, environment=env.name,
                        trial=run, episode=episode, seed=run_seed,
                    )
                )

    cfg_hash = config_hash(suite)
    write_records_csv(out_dir / "results.csv", records, [cfg_hash] * len(records))
    means = episode_means(records)
    write_episode_means_csv(out_dir / "episode_means.csv", means)
    write_delta_steps_csv(out_dir / "delta_steps.csv", means)
    _write_exp2_figure(out_dir, means, cfg.settle_episodes)
    return records


def episode_means(records: Sequence[TrialRecord]) -> dict[str, list[float]]:
    """Mean step count per episode index, per strategy (across runs)."""
    by_strategy: dict[str, dict[int, list[int]]] = {}
    for r in records:
        by_strategy.setdefault(r.strategy, {}).setdefault(r.episode, []).append(r.step_count)
    out: dict[str, list[float]] = {}
    for strategy, eps in by_strategy.items():
        out[strategy] = [float(np.mean(eps[e])) for e in sorted(eps)]
    return out


def delta_steps(means: Sequence[float]) -> list[float]:
    """Differences between successive episode-wise means (length n-1)."""
    return [float(b - a) for a, b in zip(means, means[1:])]


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def write_records_csv(path: str | Path, records: Sequence[TrialRecord], hashes: Sequence[str]) -> None:
    """One row per trial: the TrialRecord fields plus the config hash."""
    if len(hashes) != len(records):
        raise ValueError("one hash per record required")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIAL_FIELDS + ["config_hash"])
        for record, digest in zip(records, hashes):
            row = [getattr(record, name) for name in TRIAL_FIELDS]
            writer.writerow([_fmt(v) for v in row] + [digest])


def read_records_csv(path: str | Path) -> list[TrialRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                TrialRecord(
                    strategy=row["strategy"],
                    environment=row["environment"],
                    trial=int(row["trial"]),
                    episode=int(row["episode"]),
                    step_count=int(row["step_count"]),
                    reached_goal=row["reached_goal"] == "True",
                    wall_time=float(row["wall_time"]),
                    seed=int(row["seed"]),
                )
            )
    return out


def write_summary_csv(path: str | Path, records: Sequence[TrialRecord]) -> None:
    """Per environment x strategy: n, mean/SEM step count, goal rate."""
    groups: dict[tuple[str, str], list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.environment, r.strategy), []).append(r)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["environment", "strategy", "n", "mean_steps", "sem_steps", "goal_rate"])
        for (env_name, strategy), rs in sorted(groups.items()):
            steps = np.array([r.step_count for r in rs], dtype=float)
            sem = steps.std(ddof=1) / np.sqrt(len(steps)) if len(steps) > 1 else 0.0
            goal_rate = sum(r.reached_goal for r in rs) / len(rs)
            writer.writerow(
                [env_name, strategy, len(rs), _fmt(steps.mean()), _fmt(float(sem)), _fmt(goal_rate)]
            )


def write_episode_means_csv(path: str | Path, means: dict[str, list[float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["strategy", "episode", "mean_steps"])
        for strategy in sorted(means):
            for episode, value in enumerate(means[strategy]):
                writer.writerow([strategy, episode, _fmt(value)])


def write_delta_steps_csv(path: str | Path, means: dict[str, list[float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["strategy", "episode", "delta_steps"])
        for strategy in sorted(means):
            for idx, value in enumerate(delta_steps(means[strategy]), start=1):
                writer.writerow([strategy, idx, _fmt(value)])


def summarize_records(records: Sequence[TrialRecord], by: str = "strategy") -> StatsSummary:
    """Group step counts by a record field and run the one-way ANOVA."""
    groups: dict[str, list[float]] = {}
    for r in records:
        groups.setdefault(str(getattr(r, by)), []).append(float(r.step_count))
    return summarize(groups)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _child_seed(base: int, *path: int) -> int:
    return int(np.random.SeedSequence([int(base), *map(int, path)]).generate_state(1, np.uint64)[0])


def _env_text(env_name: str) -> str:
    from importlib import resources
    from pathlib import Path as _P

    if _P(env_name).exists():
        return _P(env_name).read_text()
    return (resources.files("placenav") / "environments" / f"{env_name}.env").read_text()


def _write_exp1_figure(out_dir: Path, records: Sequence[TrialRecord]) -> None:
    from .render import exp1_step_count_figure

    exp1_step_count_figure(records, out_dir / "step_counts.png")


def _write_exp2_figure(out_dir: Path, means: dict[str, list[float]], settle: int) -> None:
    from .render import exp2_convergence_figure

    exp2_convergence_figure(means, settle, out_dir / "convergence.png")
