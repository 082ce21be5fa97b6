"""Command line entry point: ``python -m specdecode <command>``."""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from .decode import HCD, RCD
from .harness import (BenchmarkConfig, export_csv, export_episodes_json,
                      export_trajectory_svg, load_episodes_json,
                      run_benchmark, run_beta_sweep, run_noise_ablation)
from .scene import SceneError


def _table(rows, extra=None) -> str:
    lines = [f"{'strategy':28s} {'spec':9s} {'STL %':>7s} {'SR %':>7s} {'steps':>7s}"]
    for i, r in enumerate(rows):
        tag = f"  {extra[i]}" if extra else ""
        lines.append(f"{r.strategy:28s} {r.spec_kind:9s} {r.stl_sat_rate:7.1f} "
                     f"{r.success_rate:7.1f} {r.mean_steps:7.1f}{tag}")
    return "\n".join(lines)


def cmd_run(args) -> int:
    cfg = BenchmarkConfig.load(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_benchmark(cfg)
    export_csv(result.rows, out / "metrics.csv")
    export_episodes_json(result.episodes, out / "episodes.json", result.scenes)
    print(_table(result.rows))
    return 0


def cmd_ablate_noise(args) -> int:
    cfg = BenchmarkConfig.load(args.config)
    # the ablation concerns the two decoders; a shared run config may list others too
    kept = tuple(s for s in cfg.strategies if isinstance(s, (HCD, RCD)))
    if not kept:
        raise ValueError("config lists no HCD or RCD strategy to ablate")
    cfg = dataclasses.replace(cfg, strategies=kept)
    ablation = run_noise_ablation(cfg, args.sigma_t, math.radians(args.sigma_yaw))
    rows = ablation.exact.rows + ablation.noisy.rows
    labels = ["exact"] * len(ablation.exact.rows) + ["noisy"] * len(ablation.noisy.rows)
    print(_table(rows, labels))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        export_csv(ablation.exact.rows, out / "noise_exact.csv")
        export_csv(ablation.noisy.rows, out / "noise_noisy.csv")
    return 0


def cmd_sweep_beta(args) -> int:
    cfg = BenchmarkConfig.load(args.config)
    betas = [float(b) for b in args.betas.split(",") if b.strip()]
    sweep = run_beta_sweep(cfg, betas, alpha=args.alpha)
    rows = [r for _, rs in sweep for r in rs]
    print(_table(rows))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        export_csv(rows, out / "beta_sweep.csv")
    return 0


def cmd_plot(args) -> int:
    episodes, scenes = load_episodes_json(args.episodes)
    if args.scene_seed not in scenes:
        raise ValueError(f"scene seed {args.scene_seed} not present in {args.episodes}")
    chosen = [e for e in episodes if e.scene_seed == args.scene_seed
              and (args.spec is None or e.spec_kind == args.spec)]
    export_trajectory_svg(chosen, scenes[args.scene_seed], args.out)
    print(f"wrote {len(chosen)} trajectories to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specdecode",
                                description="STL-constrained decoding benchmark")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="compare decoding strategies")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.set_defaults(func=cmd_run)

    noise = sub.add_parser("ablate-noise", help="exact vs noisy execution for HCD/RCD")
    noise.add_argument("--config", required=True)
    noise.add_argument("--sigma-t", type=float, default=0.01, help="metres per step")
    noise.add_argument("--sigma-yaw", type=float, default=1.0, help="degrees per step")
    noise.add_argument("--out")
    noise.set_defaults(func=cmd_ablate_noise)

    sweep = sub.add_parser("sweep-beta", help="RCD beta sweep")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--betas", default="0,1,5,10,50")
    sweep.add_argument("--alpha", type=float, default=1.0)
    sweep.add_argument("--out")
    sweep.set_defaults(func=cmd_sweep_beta)

    plot = sub.add_parser("plot", help="SVG of the trajectories for one scene")
    plot.add_argument("--episodes", required=True)
    plot.add_argument("--scene-seed", type=int, required=True)
    plot.add_argument("--spec", choices=["avoid", "geofence"])
    plot.add_argument("--out", required=True)
    plot.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, SceneError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
