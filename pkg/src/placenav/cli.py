"""Command-line interface.

Subcommands:
  map     run the reward-free mapping phase and save a weight snapshot
  seek    run one goal-seek episode from a snapshot; logs and figures out
  exp1    path-efficiency protocol from a config file
  exp2    policy-learning protocol from a config file
  render  heatmap of place fields or the reward map from a snapshot
  stats   per-group mean/SEM and one-way ANOVA over a results CSV

Environments may be bundled names (env1..env4, desk_open, desk_obstacle)
or paths to .env files; configs are YAML documents (see README), or the
short form `preset: desk` / `preset: paper`.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import harness, render
from .config import desk_scale, load_suite
from .scales import sample_rates
from .snapshot import load_snapshot, save_snapshot, snapshot_hash
from .world import resolve_environment


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="placenav", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_map = sub.add_parser("map", help="reward-free mapping phase -> snapshot")
    p_map.add_argument("env", help="environment name or .env path")
    p_map.add_argument("--config", help="YAML config (default: desk preset)")
    p_map.add_argument("--steps", type=int, help="override mapping steps")
    p_map.add_argument("--seed", type=int, default=0)
    p_map.add_argument("--out", default="snapshot.npz")
    p_map.set_defaults(func=cmd_map)

    p_seek = sub.add_parser("seek", help="goal-seek episode from a snapshot")
    p_seek.add_argument("env", help="environment name or .env path")
    p_seek.add_argument("--snapshot", required=True)
    p_seek.add_argument("--strategy", required=True,
                        choices=["small", "medium", "large", "multiscale"])
    p_seek.add_argument("--learn", action="store_true",
                        help="enable plasticity and goal-triggered replay/TD")
    p_seek.add_argument("--max-steps", type=int, default=20_000)
    p_seek.add_argument("--seed", type=int, default=0)
    p_seek.add_argument("--out-dir", default="seek_out")
    p_seek.add_argument("--save-snapshot", help="write updated weights here (with --learn)")
    p_seek.set_defaults(func=cmd_seek)

    p_exp1 = sub.add_parser("exp1", help="path-efficiency experiment")
    p_exp1.add_argument("config", help="YAML config file")
    p_exp1.add_argument("--out-dir", default="exp1_out")
    p_exp1.set_defaults(func=cmd_exp1)

    p_exp2 = sub.add_parser("exp2", help="policy-learning experiment")
    p_exp2.add_argument("config", help="YAML config file")
    p_exp2.add_argument("--out-dir", default="exp2_out")
    p_exp2.set_defaults(func=cmd_exp2)

    p_render = sub.add_parser("render", help="heatmaps from a snapshot")
    p_render.add_argument("what", choices=["placefields", "rewardmap"])
    p_render.add_argument("--snapshot", required=True)
    p_render.add_argument("--scale", type=int, default=0, help="scale index")
    p_render.add_argument("--cell", type=int, help="single place cell (placefields only)")
    p_render.add_argument("--resolution", type=int, default=50)
    p_render.add_argument("--out", required=True, help="output image path (.png)")
    p_render.set_defaults(func=cmd_render)

    p_stats = sub.add_parser("stats", help="group stats + ANOVA over a results CSV")
    p_stats.add_argument("results", help="results.csv from exp1/exp2")
    p_stats.add_argument("--group-by", default="strategy",
                         choices=["strategy", "environment"])
    p_stats.set_defaults(func=cmd_stats)
    return parser


def _load_sim(args) -> "SimConfig":
    if getattr(args, "config", None):
        return load_suite(args.config).sim
    return desk_scale().sim


def cmd_map(args) -> int:
    sim = _load_sim(args)
    env = resolve_environment(args.env)
    steps = args.steps if args.steps is not None else desk_scale().experiment1.mapping_steps
    stacks = harness.run_mapping_phase(env, sim, steps, args.seed)
    env_text = Path(args.env).read_text() if Path(args.env).exists() else None
    if env_text is None:
        from importlib import resources

        env_text = (resources.files("placenav") / "environments" / f"{args.env}.env").read_text()
    save_snapshot(args.out, stacks, sim, env_text, env.name)
    print(f"mapped {env.name} for {steps} steps -> {args.out} ({snapshot_hash(args.out)})")
    return 0


def cmd_seek(args) -> int:
    stacks, sim, snap_env = load_snapshot(args.snapshot)
    env = resolve_environment(args.env)
    strategy = next(s for s in harness.strategies_for(sim) if s.name == args.strategy)
    record, result = harness.run_goal_seeking(
        env, stacks, strategy, sim,
        max_steps=args.max_steps, learning=args.learn, seed=args.seed, keep_log=True,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_decision_log(out_dir / "decisions.csv", result, sim)
    scale_names = [sim.scales[i].name for i in strategy.scales]
    dominant = [
        strategy.scales[log.dominant_scale] if log.dominant_scale >= 0 else -1
        for log in result.trajectory
    ]
    render.trajectory_figure(
        env, result.positions, dominant, [p.name for p in sim.scales], out_dir / "trajectory.png"
    )
    if args.learn and args.save_snapshot:
        env_text = Path(args.env).read_text() if Path(args.env).exists() else None
        if env_text is None:
            from importlib import resources

            env_text = (resources.files("placenav") / "environments" / f"{args.env}.env").read_text()
        save_snapshot(args.save_snapshot, stacks, sim, env_text, env.name)
    status = "reached goal" if record.reached_goal else "timed out"
    print(
        f"{args.strategy} in {env.name} ({', '.join(scale_names)} deciding): "
        f"{status} after {record.step_count} steps"
    )
    return 0 if record.reached_goal else 1


def _write_decision_log(path: Path, result, sim) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["step", "x", "y", "heading", "mode", "valid_mask", "alpha",
             "dominant_scale", "theta_star", "masked_mask"]
        )
        for log in result.trajectory:
            writer.writerow(
                [
                    log.step, repr(log.x), repr(log.y), repr(log.heading), log.mode,
                    log.valid_mask,
                    "|".join(repr(a) for a in log.alpha),
                    log.dominant_scale,
                    "" if log.theta_star is None else repr(log.theta_star),
                    log.masked_mask,
                ]
            )


def cmd_exp1(args) -> int:
    suite = load_suite(args.config)
    records = harness.run_experiment1(suite, args.out_dir)
    print(f"experiment 1: {len(records)} evaluation trials -> {args.out_dir}/results.csv")
    return 0


def cmd_exp2(args) -> int:
    suite = load_suite(args.config)
    records = harness.run_experiment2(suite, args.out_dir)
    print(f"experiment 2: {len(records)} episodes -> {args.out_dir}/results.csv")
    return 0


def cmd_render(args) -> int:
    stacks, sim, env = load_snapshot(args.snapshot)
    if not 0 <= args.scale < len(stacks):
        print(f"scale index {args.scale} out of range", file=sys.stderr)
        return 2
    stack = stacks[args.scale]
    if args.what == "placefields":
        if args.cell is not None:
            field = lambda pos: float(sample_rates(stack, env, pos, sim)[args.cell])
        else:
            field = lambda pos: float(sample_rates(stack, env, pos, sim).max())
    else:
        from .reward import reward_activation

        field = lambda pos: reward_activation(stack.reward, sample_rates(stack, env, pos, sim))
    out = Path(args.out)
    render.render_heatmap(
        field, env, args.resolution, out, csv_path=out.with_suffix(".csv")
    )
    print(f"rendered {args.what} (scale {args.scale}) -> {out}")
    return 0


def cmd_stats(args) -> int:
    records = harness.read_records_csv(args.results)
    summary = harness.summarize_records(records, by=args.group_by)
    for group in summary.groups:
        print(f"{group.name:12s} n={group.n:4d} mean={group.mean:10.2f} sem={group.sem:8.2f}")
    if summary.f_stat is None:
        print("ANOVA: undefined (degenerate within-group variance)")
    else:
        print(
            f"ANOVA: F({summary.df_between}, {summary.df_within}) = "
            f"{summary.f_stat:.4f}, p = {summary.p_value:.4g}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
