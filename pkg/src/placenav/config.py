"""Simulation and experiment configuration: dataclasses, YAML I/O, presets.

A single declarative document drives everything: the per-scale stacks
(sigma_r, sigma_theta, place-cell counts, BVC grid), membrane and learning
constants, fusion and exploration parameters, and the experiment protocols.
Two presets ship with the package:

* ``paper_scale()`` - the full-size protocol (20 x 20 m arenas, 720-beam
  scans, 2000/500/250 place cells, 20 evaluation trials, 51 episodes x 5
  runs) for long runs;
* ``desk_scale()``  - a reduced protocol (10 x 10 m arenas, 120 beams,
  200/80/40 place cells) sized so the full acceptance suite runs on a
  laptop in minutes.

Inhibition gains and learning time constants are not derivable from first
principles; the shipped defaults were fixed by the seeded calibration
procedure in ``calibration.py`` (see README), which requires the mean
number of concurrently active place cells per position to sit in [1, 10]
at every scale.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .navigator import ExplorationConfig, FusionConfig
from .place import PlasticityConfig


@dataclass
class ScaleParams:
    """One spatial scale: BVC tuning plus place-cell population size."""

    name: str
    sigma_r: float
    n_pc: int
    sigma_theta: float = 0.2
    bvc_dirs: int = 8
    bvc_dists: int = 12
    bvc_max_dist: float | None = None    # None: half the arena diagonal
    n_bvc_norm: float | None = None      # None: the beam count
    # Per-scale inhibition overrides; None falls back to DynamicsParams.
    # Coarser scales see flatter boundary patterns, so the firing threshold
    # that yields a sensible active-cell count differs per scale.
    gamma_pb: float | None = None
    gamma_pp: float | None = None


@dataclass
class DynamicsParams:
    """Place-cell membrane constants (time constants in steps)."""

    tau_p: float = 1.0
    psi: float = 3.0
    gamma_pb: float = 0.35      # feedforward inhibition gain
    gamma_pp: float = 0.02      # recurrent inhibition gain


@dataclass
class RewardParams:
    """Reward-cell, replay, and TD parameters."""

    tau_r: float = 10.0
    buffer_capacity: int = 10_000
    epsilon: float = 1e-4
    cap: float = 10.0
    eta: float = 0.1


@dataclass
class SimConfig:
    """Everything needed to build and run the layered model in one arena."""

    scales: list[ScaleParams] = field(default_factory=list)
    dynamics: DynamicsParams = field(default_factory=DynamicsParams)
    plasticity: PlasticityConfig = field(default_factory=PlasticityConfig)
    reward: RewardParams = field(default_factory=RewardParams)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    exploration: ExplorationConfig = field(default_factory=ExplorationConfig)
    n_res: int = 720
    max_range: float | None = None       # None: arena diagonal
    step_len: float = 0.2
    collision_margin: float = 0.1
    settle_iters: int = 5                # pc_step iterations when sampling maps
    adjacency_floor: float = 1e-6
    sim_seconds_per_step: float = 0.1    # simulated wall-time per step
    seed: int = 0


@dataclass
class Experiment1Config:
    """Pretrained path-efficiency protocol."""

    environments: list[str] = field(default_factory=lambda: ["env1", "env2", "env3", "env4"])
    mapping_steps: int = 30_000
    learn_max_steps: int = 20_000     # cap on the reward-learning goal seek
    trials: int = 20
    eval_max_steps: int = 20_000


@dataclass
class Experiment2Config:
    """Online policy-learning protocol (open arena, tabula rasa)."""

    environment: str = "env1"
    runs: int = 5
    episodes: int = 51
    episode_max_steps: int = 20_000
    settle_episodes: int = 6          # initial episodes excluded from means


@dataclass
class ExperimentSuite:
    """A full configuration document: simulation plus both protocols."""

    sim: SimConfig = field(default_factory=SimConfig)
    experiment1: Experiment1Config = field(default_factory=Experiment1Config)
    experiment2: Experiment2Config = field(default_factory=Experiment2Config)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def default_scales(paper: bool = True, n_res: int = 720) -> list[ScaleParams]:
    """The three standard scales with sigma_r = 0.5 / 2.0 / 4.0 m.

    The BVC population norm is compensated per scale (norm ~ n_res / sigma_r,
    anchored at the finest scale): per-beam Gaussian peaks fall off as
    1/sigma_r, and without compensation the coarse scales' place layers sit
    far below the firing threshold that suits the fine scale.
    """
    counts = (2000, 500, 250) if paper else (200, 80, 40)
    sigmas = (0.5, 2.0, 4.0)
    names = ("small", "medium", "large")
    return [
        ScaleParams(
            name=name,
            sigma_r=sigma,
            n_pc=count,
            n_bvc_norm=n_res * sigmas[0] / sigma,
        )
        for name, sigma, count in zip(names, sigmas, counts)
    ]


def paper_scale(seed: int = 0) -> ExperimentSuite:
    """Full-size protocol; slow, intended for overnight runs."""
    sim = SimConfig(scales=default_scales(paper=True, n_res=720), n_res=720, seed=seed)
    return ExperimentSuite(
        sim=sim,
        experiment1=Experiment1Config(),
        experiment2=Experiment2Config(),
    )


def desk_scale(seed: int = 0) -> ExperimentSuite:
    """Reduced protocol used by the acceptance suite."""
    sim = SimConfig(
        scales=default_scales(paper=False, n_res=120),
        n_res=120,
        seed=seed,
        reward=RewardParams(tau_r=20.0),
    )
    return ExperimentSuite(
        sim=sim,
        experiment1=Experiment1Config(
            environments=["desk_open", "desk_obstacle"],
            mapping_steps=5000,
            learn_max_steps=8000,
            trials=10,
            eval_max_steps=1500,
        ),
        experiment2=Experiment2Config(
            environment="desk_open",
            runs=3,
            episodes=15,
            episode_max_steps=2500,
            settle_episodes=6,
        ),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_SECTION_TYPES = {
    "dynamics": DynamicsParams,
    "plasticity": PlasticityConfig,
    "reward": RewardParams,
    "fusion": FusionConfig,
    "exploration": ExplorationConfig,
}


def _build(cls, data: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"{cls.__name__}: unknown keys {sorted(unknown)}")
    return cls(**data)


def sim_config_from_dict(data: dict) -> SimConfig:
    data = dict(data)
    scales = [_build(ScaleParams, dict(s)) for s in data.pop("scales", [])]
    sections = {}
    for key, cls in _SECTION_TYPES.items():
        if key in data:
            section = dict(data.pop(key))
            if key == "exploration" and "sigma_turn_deg" in section:
                section["sigma_turn"] = math.radians(section.pop("sigma_turn_deg"))
            sections[key] = _build(cls, section)
    cfg = _build(SimConfig, data)
    cfg.scales = scales or default_scales(paper=True)
    for key, value in sections.items():
        setattr(cfg, key, value)
    return cfg


def suite_from_dict(data: dict) -> ExperimentSuite:
    data = dict(data)
    sim = sim_config_from_dict(data.pop("sim", {}))
    exp1 = _build(Experiment1Config, dict(data.pop("experiment1", {})))
    exp2 = _build(Experiment2Config, dict(data.pop("experiment2", {})))
    if data:
        raise ValueError(f"unknown top-level config keys {sorted(data)}")
    return ExperimentSuite(sim=sim, experiment1=exp1, experiment2=exp2)


def load_suite(path: str | Path) -> ExperimentSuite:
    """Load a YAML configuration document."""
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if isinstance(data, dict) and data.get("preset"):
        preset = data.pop("preset")
        seed = data.pop("seed", 0)
        base = {"desk": desk_scale, "paper": paper_scale}[preset](seed=seed)
        if data:
            raise ValueError("preset configs accept only 'preset' and 'seed' keys")
        return base
    return suite_from_dict(data)


def suite_to_dict(suite: ExperimentSuite) -> dict:
    return dataclasses.asdict(suite)


def save_suite(suite: ExperimentSuite, path: str | Path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(suite_to_dict(suite), fh, sort_keys=False)


def config_hash(obj) -> str:
    """Stable hex digest of any dataclass/primitive structure."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = dataclasses.asdict(obj)
    canonical = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Seeding
# ---------------------------------------------------------------------------

def derive_rng(base_seed: int, *path: int) -> np.random.Generator:
    """Deterministic generator for a labelled point in the run hierarchy.

    Identical (base_seed, path) pairs always produce identical streams, and
    distinct paths are statistically independent.
    """
    return np.random.default_rng(np.random.SeedSequence([int(base_seed), *map(int, path)]))
