"""Command-line front end: figure-style experiments as subcommands.

Every subcommand is reproducible from (config file, seed) alone. Results go
to CSV; unless plotting is disabled, a PNG figure is rendered next to each
CSV with the same stem.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from typing import List

from .ris import sample_nd_ris, sample_nr_block
from .scenario import (STRATEGIES, ScenarioConfig, apply_overrides,
                       config_from_mapping, derive_rng, load_config)
from .tdd_sim import ErgodicReport, monte_carlo

# Default sweep grids; n and m share theirs, block size has its own.
GRID_N = [8, 16, 32, 64, 128, 256]
GRID_M = [8, 16, 32, 64, 128, 256]
GRID_L = [2, 4, 8, 16, 32, 64, 128]

PRECODERS = ("mrt", "zf")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML scenario file (defaults apply if omitted)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override any config field")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--trials", type=int, help="override the trial count")
    parser.add_argument("--out", help="output CSV path")
    parser.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True,
                        help="render a PNG next to the CSV (default on)")


def build_config(args) -> ScenarioConfig:
    data: dict = {}
    if args.config:
        cfg = load_config(args.config)
        data = {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg)}
    if args.overrides:
        data = apply_overrides(data, args.overrides)
    cfg = config_from_mapping(data)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        updates["trials"] = args.trials
    return dataclasses.replace(cfg, **updates) if updates else cfg


def _csv_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _figure_path(csv_path: str) -> str:
    stem, _ = os.path.splitext(csv_path)
    return stem + ".png"


def cmd_sweep(args) -> int:
    cfg = build_config(args)
    strategies = _csv_list(args.strategies)
    precoders = _csv_list(args.precoders)
    if not strategies:
        raise SystemExit("sweep needs at least one strategy")
    if not precoders:
        raise SystemExit("sweep needs at least one precoder")
    for s in strategies:
        if s not in STRATEGIES:
            raise SystemExit(f"unknown strategy: {s}")
    for p in precoders:
        if p not in PRECODERS:
            raise SystemExit(f"unknown precoder: {p}")
    if args.values:
        values = [int(v) for v in _csv_list(args.values)]
    else:
        values = {"n": GRID_N, "m": GRID_M, "l": GRID_L}[args.var]

    reports: List[ErgodicReport] = []
    for value in values:
        updates = {args.var: value}
        if args.var == "n" and cfg.l > value:
            # keep the block structure valid when the surface shrinks
            updates["l"] = value
        point = dataclasses.replace(cfg, **updates)
        for strategy in strategies:
            for precoder in precoders:
                reports.append(monte_carlo(point, strategy, precoder))
    out = args.out or "sweep.csv"
    from . import report as rep
    rep.write_reports_csv(out, reports)
    print(f"wrote {out} ({len(reports)} rows)")
    if args.plot:
        fig = _figure_path(out)
        rep.sweep_figure(reports, args.var, fig)
        print(f"wrote {fig}")
    return 0


def cmd_histogram(args) -> int:
    cfg = build_config(args)
    if args.configs < 1:
        raise SystemExit("--configs must be at least 1")
    reports: List[ErgodicReport] = []
    for c in range(args.configs):
        rng = derive_rng(cfg, "histogram", c)
        if args.kind == "nr-block":
            phi = sample_nr_block(cfg.n, cfg.l, cfg.nr_phase_rule, rng)
        else:
            phi = sample_nd_ris(cfg.n, rng)
        rep_c = monte_carlo(cfg, f"static-{args.kind}", args.precoder, static_phi=phi)
        reports.append(rep_c)
    out = args.out or "histogram.csv"
    from . import report as rep
    rep.write_reports_csv(out, reports, index_column="config_index")
    print(f"wrote {out} ({len(reports)} rows)")
    if args.plot:
        baseline = None
        if args.baseline:
            baseline = monte_carlo(cfg, "none", args.precoder).sum_rate
        fig = _figure_path(out)
        rep.histogram_figure(reports, fig, baseline=baseline)
        print(f"wrote {fig}")
    return 0


def cmd_compare(args) -> int:
    cfg = build_config(args)
    strategies = _csv_list(args.strategies)
    precoders = _csv_list(args.precoders)
    if not strategies or not precoders:
        raise SystemExit("compare needs at least one strategy and one precoder")
    reports: List[ErgodicReport] = []
    for strategy in strategies:
        if strategy not in STRATEGIES:
            raise SystemExit(f"unknown strategy: {strategy}")
        for precoder in precoders:
            if precoder not in PRECODERS:
                raise SystemExit(f"unknown precoder: {precoder}")
            r = monte_carlo(cfg, strategy, precoder)
            reports.append(r)
            print(f"{strategy:9s} {precoder:3s}  sum rate {r.sum_rate:10.4f}"
                  f" +- {r.sum_rate_ci95:.4f}  SOP {r.sop:.4f}")
    out = args.out or "compare.csv"
    from . import report as rep
    rep.write_reports_csv(out, reports)
    print(f"wrote {out} ({len(reports)} rows)")
    if args.plot:
        fig = _figure_path(out)
        rep.compare_figure(reports, fig)
        print(f"wrote {fig}")
    return 0


def cmd_serve_env(args) -> int:
    cfg = build_config(args)
    from . import env_bridge
    if args.transport == "stdio":
        env_bridge.serve_stdio(cfg, args.strategy)
    else:
        env_bridge.serve_tcp(cfg, args.strategy, host=args.host, port=args.port,
                             max_connections=args.max_connections)
    return 0


def cmd_selfcheck(args) -> int:
    from .selfcheck import run_selfcheck
    cfg = build_config(args) if (args.config or args.overrides) else None
    results = run_selfcheck(cfg)
    failed = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        print(f"selfcheck {name}: {status}  ({detail})")
        failed += 0 if ok else 1
    print(f"selfcheck: {len(results) - failed}/{len(results)} passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cracksim",
        description="Simulate reciprocity attacks by non-reciprocal surfaces "
                    "on TDD multi-user MISO downlinks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="ergodic metrics over a parameter grid")
    _add_common(p_sweep)
    p_sweep.add_argument("--var", choices=("n", "m", "l"), required=True)
    p_sweep.add_argument("--values", help="comma-separated grid (defaults per variable)")
    p_sweep.add_argument("--strategies", default="none,nr-blind")
    p_sweep.add_argument("--precoders", default="mrt,zf")
    p_sweep.set_defaults(func=cmd_sweep)

    p_hist = sub.add_parser("histogram",
                            help="ergodic metrics of many fixed surface configurations")
    _add_common(p_hist)
    p_hist.add_argument("--configs", type=int, default=100)
    p_hist.add_argument("--kind", choices=("nr-block", "perm-phase"), default="nr-block")
    p_hist.add_argument("--precoder", choices=PRECODERS, default="zf")
    p_hist.add_argument("--baseline", action=argparse.BooleanOptionalAction, default=True,
                        help="draw the no-attack mean on the figure")
    p_hist.set_defaults(func=cmd_histogram)

    p_cmp = sub.add_parser("compare", help="all strategies at one operating point")
    _add_common(p_cmp)
    p_cmp.add_argument("--strategies", default=",".join(STRATEGIES))
    p_cmp.add_argument("--precoders", default="mrt,zf")
    p_cmp.set_defaults(func=cmd_compare)

    p_env = sub.add_parser("serve-env", help="serve the decision environment")
    _add_common(p_env)
    p_env.add_argument("--transport", choices=("stdio", "tcp"), default="stdio")
    p_env.add_argument("--host", default="127.0.0.1")
    p_env.add_argument("--port", type=int, default=0)
    p_env.add_argument("--strategy", choices=STRATEGIES, default="nr-blind")
    p_env.add_argument("--max-connections", type=int, default=None)
    p_env.set_defaults(func=cmd_serve_env)

    p_check = sub.add_parser("selfcheck", help="run the fast invariant suite")
    _add_common(p_check)
    p_check.set_defaults(func=cmd_selfcheck)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
