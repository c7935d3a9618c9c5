"""Command line: train an agent against an environment endpoint, or
evaluate a saved checkpoint.

The environment endpoint is either a command to spawn (its stdio speaks the
protocol) or a host:port to connect to.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .envclient import WireEnv
from .train import (ABLATIONS, TrainConfig, evaluate, load_checkpoint, train)


def _add_env_args(sub: argparse.ArgumentParser) -> None:
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--env-cmd", help="command whose stdio serves the protocol")
    group.add_argument("--connect", metavar="HOST:PORT",
                       help="TCP endpoint serving the protocol")


def _open_env(args: argparse.Namespace) -> WireEnv:
    if args.env_cmd:
        return WireEnv.spawn(args.env_cmd)
    host, _, port = args.connect.rpartition(":")
    if not host or not port.isdigit():
        raise SystemExit(f"--connect needs HOST:PORT, got {args.connect!r}")
    return WireEnv.connect(host, int(port))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="securecoder",
        description="Train a precoding agent over the line-protocol environment.")
    subs = parser.add_subparsers(dest="command", required=True)

    tr = subs.add_parser("train", help="run the training loop")
    _add_env_args(tr)
    tr.add_argument("--episodes", type=int, default=500)
    tr.add_argument("--ablation", choices=ABLATIONS, default="enhanced")
    tr.add_argument("--batch-size", type=int, default=2000)
    tr.add_argument("--minibatch", type=int, default=256)
    tr.add_argument("--epochs", type=int, default=10)
    tr.add_argument("--lr", type=float, default=0.005)
    tr.add_argument("--momentum", type=float, default=0.99,
                    help="actor gradient averaging horizon, see train.py")
    tr.add_argument("--gamma", type=float, default=0.0)
    tr.add_argument("--clip-eps", type=float, default=0.2)
    tr.add_argument("--entropy-beta", type=float, default=1e-4)
    tr.add_argument("--per-fraction", type=float, default=0.25)
    tr.add_argument("--hidden", type=int, default=256)
    tr.add_argument("--seed", type=int, default=0, help="network and sampling seed")
    tr.add_argument("--env-seed-base", type=int, default=1000)
    tr.add_argument("--out", help="directory for curve.csv and checkpoint.pt")
    tr.add_argument("--eval-episodes", type=int, default=20,
                    help="deterministic evaluation episodes after training (0 skips)")
    tr.add_argument("--quiet", action="store_true")

    ev = subs.add_parser("eval", help="evaluate a checkpoint")
    _add_env_args(ev)
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--episodes", type=int, default=50)
    ev.add_argument("--seed-base", type=int, default=10 ** 6)
    ev.add_argument("--stochastic", action="store_true",
                    help="sample actions instead of using the policy mean")
    return parser


def _print_eval(stats: dict) -> None:
    print(f"eval over {stats['episodes']} episodes: "
          f"mean return {stats['mean_return']:.4f}, "
          f"mean sum rate {stats['mean_sum_rate']:.4f} b/s/Hz, "
          f"SOP {stats['sop']:.4f}, any-user SOP {stats['sop_any_user']:.4f}")


def cmd_train(args: argparse.Namespace) -> int:
    cfg = TrainConfig(episodes=args.episodes, ablation=args.ablation,
                      batch_size=args.batch_size, minibatch=args.minibatch,
                      epochs=args.epochs, clip_eps=args.clip_eps,
                      entropy_beta=args.entropy_beta, learning_rate=args.lr,
                      momentum=args.momentum,
                      gamma=args.gamma, per_fraction=args.per_fraction,
                      hidden=args.hidden, seed=args.seed,
                      env_seed_base=args.env_seed_base, out_dir=args.out)
    log = (lambda msg: None) if args.quiet else print
    with _open_env(args) as env:
        result = train(env, cfg, log=log)
        print(f"trained {cfg.ablation} for {cfg.episodes} episodes: "
              f"final-50 mean return {result.final_mean():.4f}")
        if args.eval_episodes > 0:
            _print_eval(evaluate(env, result.policy, args.eval_episodes))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    policy, _ = load_checkpoint(args.checkpoint)
    with _open_env(args) as env:
        _print_eval(evaluate(env, policy, args.episodes,
                             seed_base=args.seed_base,
                             deterministic=not args.stochastic))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "train":
        return cmd_train(args)
    return cmd_eval(args)


if __name__ == "__main__":
    sys.exit(main())
