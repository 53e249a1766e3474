"""Command-line surface: train, test, plot, inspect-checkpoint."""

import argparse
import os
import sys

from aclab.agents import load_agent
from aclab.envs.agar import GRID_FEATURES
from aclab.errors import AclabError
from aclab.harness.config import load_config
from aclab.harness.runner import run_test, run_training
from aclab.harness.svgplot import emit_curves
from aclab.nn.checkpoint import load_network
from aclab.nn.network import distinct_param_count

OUTPUT_DIR_ENV = "ACLAB_OUTPUT_DIR"


def _output_dir(flag_value):
    if flag_value:
        return flag_value
    return os.environ.get(OUTPUT_DIR_ENV, "aclab-out")


def _parse_set_flags(pairs):
    overrides = {}
    for pair in pairs:
        if "=" not in pair:
            raise AclabError(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _cmd_train(args):
    overrides = _parse_set_flags(args.set)
    for key, value in (
        ("algorithm", args.algorithm),
        ("environment", args.environment),
        ("task", args.task),
        ("total_steps", args.total_steps),
        ("n_runs", args.runs),
        ("base_seed", args.seed),
    ):
        if value is not None:
            overrides[key] = value
    config = load_config(args.config, overrides, preset=args.preset)
    out_dir = _output_dir(args.out)
    progress = None if args.quiet else print
    metrics_path, records, paths = run_training(config, out_dir, progress)
    print(f"wrote {len(records)} metric rows to {metrics_path}")
    print(f"saved {len(paths)} checkpoints under {out_dir}")
    return 0


def _infer_environment(checkpoint_path):
    bundle = load_agent(checkpoint_path)
    if bundle.pixel:
        return "agar-pixel"
    if bundle.obs_dim == GRID_FEATURES:
        return "agar-grid"
    return "pointmass"


def _cmd_test(args):
    environment = args.environment
    if environment is None and args.config is None:
        environment = _infer_environment(args.checkpoint)
    overrides = {} if environment is None else {"environment": environment}
    config = load_config(args.config, overrides)
    seeds = [args.seed + i for i in range(args.episodes)]
    records = run_test(args.checkpoint, config, seeds)
    for r in records:
        line = f"episode {r.test_episode}: return {r.episode_return:.4f}"
        if r.final_mass is not None:
            line += f", final mass {r.final_mass:.4f}"
        print(line)
    mean_return = sum(r.episode_return for r in records) / len(records)
    print(f"mean return over {len(records)} episodes: {mean_return:.4f}")
    if records[0].final_mass is not None:
        mean_mass = sum(r.final_mass for r in records) / len(records)
        print(f"mean final mass: {mean_mass:.4f}")
    return 0


def _cmd_plot(args):
    series = emit_curves(args.metrics, args.out)
    for s in series:
        last = s["means"][-1]
        print(f"{s['label']}: {len(s['pcts'])} checkpoints, final mean {last:.4f}")
    print(f"wrote {args.out}")
    return 0


def _describe_layers(layers, indent="    "):
    lines = []
    for layer in layers:
        if layer.kind == "dense":
            lines.append(f"{indent}dense {layer.in_units} -> {layer.out_units}")
        elif layer.kind == "conv2d":
            lines.append(
                f"{indent}conv2d {layer.in_channels} -> {layer.out_channels} "
                f"kernel {layer.kernel} stride {layer.stride}"
            )
        else:
            lines.append(f"{indent}{layer.kind}")
    return lines


def _cmd_inspect(args):
    with open(args.path, "rb") as f:
        magic = f.read(4)
    if magic == b"ACAG":
        bundle = load_agent(args.path)
        arch = "pixel (shared conv trunk)" if bundle.pixel else f"vector ({bundle.obs_dim} inputs)"
        print(f"agent checkpoint: {bundle.algorithm}, {arch}, {bundle.action_squash} actions")
        print(f"step counter {bundle.step_counter}, exploration sd {bundle.current_sd:.6g}")
        print(
            f"actor_lr {bundle.actor_lr:g}, critic_lr {bundle.critic_lr:g}, "
            f"discount {bundle.discount:g}"
        )
        print(
            f"target update interval {bundle.target_update_interval}, "
            f"spg samples {bundle.spg_sample_count}"
        )
        for name in ("actor", "critic", "actor_target", "critic_target"):
            net = getattr(bundle, name)
            print(f"  {name}: {net.param_count()} parameters")
            for line in _describe_layers(net.layers):
                print(line)
        print(
            "distinct parameters (actor + critic): "
            f"{distinct_param_count(bundle.actor, bundle.critic)}"
        )
    elif magic == b"ACNN":
        net = load_network(args.path)
        print(f"network checkpoint: {len(net.layers)} layers, {net.param_count()} parameters")
        for line in _describe_layers(net.layers, indent="  "):
            print(line)
    else:
        raise AclabError(f"unrecognized checkpoint magic {magic!r}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aclab",
        description="Actor-critic experiments: train, test, plot, inspect.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="run the training protocol for a config")
    train.add_argument("--config", help="key=value config file")
    train.add_argument("--preset", choices=["quick"], help="apply a preset after the config")
    train.add_argument("--seed", type=int, help="base seed (overrides config)")
    train.add_argument("--algorithm", choices=["cacla", "dpg", "spg"])
    train.add_argument("--environment", choices=["agar-grid", "agar-pixel", "pointmass"])
    train.add_argument("--task", choices=["replay", "onpolicy"])
    train.add_argument("--total-steps", type=int, dest="total_steps")
    train.add_argument("--runs", type=int, help="number of independent runs")
    train.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./aclab-out)")
    train.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key; repeatable",
    )
    train.add_argument("--quiet", action="store_true", help="suppress progress lines")
    train.set_defaults(func=_cmd_train)

    test = sub.add_parser("test", help="run noise-free episodes from a checkpoint")
    test.add_argument("--checkpoint", required=True)
    test.add_argument("--episodes", type=int, default=5)
    test.add_argument("--environment", choices=["agar-grid", "agar-pixel", "pointmass"])
    test.add_argument("--config", help="config file naming the environment")
    test.add_argument("--seed", type=int, default=0, help="first episode seed")
    test.set_defaults(func=_cmd_test)

    plot = sub.add_parser("plot", help="emit learning curves as SVG")
    plot.add_argument("--out", required=True, help="output .svg path")
    plot.add_argument("metrics", nargs="+", help="metrics CSV files, one curve each")
    plot.set_defaults(func=_cmd_plot)

    inspect = sub.add_parser("inspect-checkpoint", help="describe a checkpoint file")
    inspect.add_argument("path")
    inspect.set_defaults(func=_cmd_inspect)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AclabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
