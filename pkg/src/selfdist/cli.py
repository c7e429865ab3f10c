"""Command-line interface.

Exit codes: 0 ok, 1 config error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import contingency, mdn, simworld
from .harness import (
    ConfigError,
    emit_plots,
    load_config,
    read_trace,
    run_suite,
    run_trial,
    write_trace,
)
from .harness.session import serve_session
from .harness.trial import make_classifier
from .optim import AdamConfig


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--scenario", help="scenario kind override")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument(
        "--gradient-variant",
        choices=("jacobian", "likelihood"),
        help="visual gradient used by the belief/action update",
    )


def _config_from(args) -> "ScenarioConfig":
    overrides = {
        "seed": args.seed,
        "kind": args.scenario,
        "gradient_variant": getattr(args, "gradient_variant", None),
    }
    return load_config(args.config, overrides)


def _write_losses(losses: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("epoch,loss\n")
        for i, v in enumerate(losses):
            f.write(f"{i},{v:.9g}\n")


def cmd_run(args) -> int:
    config = _config_from(args)
    os.makedirs(args.out, exist_ok=True)
    trace, summary = run_trial(config)
    trace_path = os.path.join(args.out, "trace.csv")
    write_trace(trace, trace_path)
    if args.plots:
        emit_plots(trace, args.out)
    print(f"status={summary.status} decided_at_s={summary.decided_at_s} "
          f"mean_p_self={summary.mean_p_self_eval:.4f} samples={summary.samples_collected} "
          f"trained={summary.mdn_trained}")
    print(f"trace written to {trace_path}")
    return 0


def cmd_suite(args) -> int:
    config = _config_from(args)
    os.makedirs(args.out, exist_ok=True)
    report = run_suite(config, positions=args.positions, repeats=args.repeats)
    path = os.path.join(args.out, "suite_report.txt")
    text = report.to_text()
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    sys.stdout.write(text)
    print(f"report written to {path}")
    return 0


def cmd_train_mdn(args) -> int:
    config = _config_from(args)
    os.makedirs(args.out, exist_ok=True)
    # record a waving run in the mirror and fit the forward model to it
    from .harness.trial import build_world

    rng = np.random.default_rng(config.seed)
    world = build_world(config.replace(kind="mirror"), rng)
    policy = simworld.WavePolicy(
        pattern=simworld.default_wave_pattern(),
        speed=config.wave_speed_rad_s,
        stroke_s=config.wave_stroke_s,
        delay_range_s=(config.wave_delay_min_s, config.wave_delay_max_s),
    )
    player = simworld.SegmentPlayer(policy.schedule(np.random.default_rng(config.seed + 1)))
    inputs, targets = [], []
    while len(inputs) < config.mdn_batch_samples:
        a = player.velocity(config.dt_s)
        world.step(a, config.dt_s)
        frame = world.synthesize_observation(config.dt_s)
        if frame.centroid is not None:
            inputs.append(world.observe_proprio())
            targets.append(frame.centroid)
    params = mdn.init_params(
        mdn.MDNConfig(hidden_units=config.mdn_hidden_units, mixtures=config.mdn_mixtures),
        np.random.default_rng(config.seed + 2),
    )
    params, losses = mdn.train(
        params,
        mdn.TrainBatch(np.array(inputs), np.array(targets)),
        epochs=config.mdn_epochs,
        adam_config=AdamConfig(lr=config.mdn_learning_rate),
    )
    weights = os.path.join(args.out, "mdn_weights.txt")
    mdn.save_params(params, weights)
    _write_losses(losses, os.path.join(args.out, "mdn_loss.csv"))
    print(f"final nll={losses[-1]:.6f}; weights in {weights}")
    return 0


def cmd_train_contingency(args) -> int:
    config = _config_from(args)
    os.makedirs(args.out, exist_ok=True)
    model = make_classifier(config)
    weights = os.path.join(args.out, "contingency_weights.txt")
    mdn.save_params(model, weights, keys=contingency.CLS_PARAM_KEYS)
    print(f"classifier weights in {weights}")
    return 0


def cmd_serve(args) -> int:
    config = _config_from(args)
    if config.kind != "interactive_other":
        config = config.replace(kind="interactive_other")
    print(f"serving interactive session on port {args.port} (speed x{args.speed})")
    serve_session(config, args.port, speed=args.speed, max_sessions=args.sessions)
    return 0


def cmd_replay(args) -> int:
    trace = read_trace(args.trace)
    eval_p = [r.p_self for r in trace if r.phase == "evaluation"]
    status = trace[-1].status if trace else "unknown"
    mean_p = float(np.mean(eval_p)) if eval_p else 0.0
    print(f"records={len(trace)} final_status={status} mean_p_self_eval={mean_p:.4f}")
    if args.plots:
        os.makedirs(args.out, exist_ok=True)
        emit_plots(trace, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selfdist",
                                     description="Self/other distinction simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one trial")
    _add_common(p)
    p.add_argument("--plots", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("suite", help="run positions x repeats trials")
    _add_common(p)
    p.add_argument("--positions", type=int, default=10)
    p.add_argument("--repeats", type=int, default=10)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("train-mdn", help="fit the visual forward model offline")
    _add_common(p)
    p.set_defaults(func=cmd_train_mdn)

    p = sub.add_parser("train-contingency", help="train the contingency classifier")
    _add_common(p)
    p.set_defaults(func=cmd_train_contingency)

    p = sub.add_parser("serve", help="serve a live interactive_other session")
    _add_common(p)
    p.add_argument("--port", type=int, default=7777)
    p.add_argument("--speed", type=float, default=1.0,
                   help="real-time multiplier; 0 = as fast as possible")
    p.add_argument("--sessions", type=int, default=1)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="summarize a recorded trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--out", default="out")
    p.add_argument("--plots", action="store_true")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
