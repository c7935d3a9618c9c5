"""Train the three ablations at the small operating point and report the
final-50-episode mean returns, to size the ablation-ordering check."""

import argparse
import sys

sys.path.insert(0, "src")

from securecoder.envclient import WireEnv
from securecoder.train import TrainConfig, train


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--episodes", type=int, default=2000)
    ap.add_argument("--momentum", type=float, default=0.99)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-prefix", default="/tmp/s1")
    args = ap.parse_args()

    cmd = (f"{sys.executable} -m cracksim.cli serve-env --transport stdio "
           f"--strategy nr-blind --set n=64 --set m=16 --set l=64")
    finals = {}
    for ablation in ("standard", "cnn", "enhanced"):
        with WireEnv.spawn(cmd) as env:
            cfg = TrainConfig(episodes=args.episodes, ablation=ablation,
                              momentum=args.momentum, seed=args.seed,
                              out_dir=f"{args.out_prefix}_{ablation}")
            result = train(env, cfg, log=None)
        finals[ablation] = result.final_mean()
        print(f"{ablation}: final-50 mean {finals[ablation]:.4f}", flush=True)
    print(f"ordering enhanced>=cnn>=standard: "
          f"{finals['enhanced'] >= finals['cnn'] >= finals['standard']}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
