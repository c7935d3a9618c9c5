"""Long training run at the large-array operating point.

Drives the simulator over stdio and trains the enhanced ablation for a
configurable number of episodes, appending the learning curve and a
checkpoint to --out so progress can be inspected mid-run.
"""

import argparse
import sys

sys.path.insert(0, "src")

from securecoder.envclient import WireEnv
from securecoder.train import TrainConfig, evaluate, train


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--episodes", type=int, default=12000)
    ap.add_argument("--momentum", type=float, default=0.99)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--m", type=int, default=32)
    ap.add_argument("--l", type=int, default=128)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--ablation", default="enhanced")
    ap.add_argument("--out", default="/tmp/long_run")
    args = ap.parse_args()

    cmd = (
        f"{sys.executable} -m cracksim.cli serve-env --transport stdio "
        f"--strategy nr-blind --set n={args.n} --set m={args.m} --set l={args.l}"
    )
    with WireEnv.spawn(cmd) as env:
        cfg = TrainConfig(
            episodes=args.episodes,
            ablation=args.ablation,
            momentum=args.momentum,
            seed=args.seed,
            out_dir=args.out,
        )
        result = train(env, cfg, log=print)
        stats = evaluate(env, result.policy, episodes=50)
    print(
        f"final-50 mean return {result.final_mean():.3f} | eval mean return "
        f"{stats['mean_return']:.3f} sum rate {stats['mean_sum_rate']:.3f} "
        f"sop {stats['sop']:.3f}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
