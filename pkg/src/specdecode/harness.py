"""Batch experiments: strategy-by-spec comparison, noise ablation and beta sweep."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .decode import (HCD, RCD, EpisodeResult, Filtering, Strategy,
                     Unconstrained, rollout_episode, strategy_from_dict)
from .dynamics import DynamicsConfig
from .policy import PolicyConfig, SamplerSpec
from .scene import (Scene, SceneGenConfig, SpecKind, build_spec,
                    generate_scene, scene_from_dict, scene_to_dict)

__all__ = ["BenchmarkConfig", "MetricsRow", "BenchmarkResult", "NoiseAblation",
           "run_benchmark", "run_noise_ablation", "run_beta_sweep",
           "aggregate", "export_csv", "export_episodes_json",
           "load_episodes_json", "export_trajectory_svg", "CSV_COLUMNS"]

CSV_COLUMNS = ("strategy", "spec", "stl_sat_rate", "success_rate", "mean_steps", "n")


def _default_strategies() -> tuple[Strategy, ...]:
    return (Unconstrained(), Filtering(), HCD(), RCD())


@dataclass(frozen=True)
class BenchmarkConfig:
    n_episodes: int = 200
    strategies: tuple[Strategy, ...] = field(default_factory=_default_strategies)
    spec_kinds: tuple[SpecKind, ...] = (SpecKind.AVOID, SpecKind.GEOFENCE)
    scene: SceneGenConfig = SceneGenConfig()
    policy: PolicyConfig = PolicyConfig()
    dynamics: DynamicsConfig = DynamicsConfig()
    sampler: SamplerSpec = SamplerSpec()
    max_steps: int = 200
    base_seed: int = 0
    n_workers: int = 1

    def __post_init__(self):
        if self.n_episodes < 1:
            raise ValueError("n_episodes must be >= 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.base_seed < 0:
            raise ValueError("base_seed must be >= 0")
        if not self.strategies or not self.spec_kinds:
            raise ValueError("need at least one strategy and one spec kind")
        object.__setattr__(self, "spec_kinds", tuple(SpecKind(k) for k in self.spec_kinds))
        object.__setattr__(self, "strategies", tuple(self.strategies))

    @classmethod
    def from_dict(cls, d: dict) -> "BenchmarkConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(d)
        if "strategies" in kw:
            kw["strategies"] = tuple(strategy_from_dict(s) for s in kw["strategies"])
        if "spec_kinds" in kw:
            kw["spec_kinds"] = tuple(SpecKind(k) for k in kw["spec_kinds"])
        for name, typ in (("scene", SceneGenConfig), ("policy", PolicyConfig),
                          ("dynamics", DynamicsConfig), ("sampler", SamplerSpec)):
            if name in kw:
                try:
                    kw[name] = typ(**kw[name])
                except TypeError as exc:
                    raise ValueError(f"bad {name!r} section: {exc}") from None
        return cls(**kw)

    @classmethod
    def load(cls, path: str | Path) -> "BenchmarkConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON: {exc}") from None
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return {
            "n_episodes": self.n_episodes,
            "strategies": [s.to_dict() for s in self.strategies],
            "spec_kinds": [k.value for k in self.spec_kinds],
            "scene": dataclasses.asdict(self.scene),
            "policy": dataclasses.asdict(self.policy),
            "dynamics": dataclasses.asdict(self.dynamics),
            "sampler": {"mode": self.sampler.mode.value, "k": self.sampler.k,
                        "seed": self.sampler.seed},
            "max_steps": self.max_steps,
            "base_seed": self.base_seed,
            "n_workers": self.n_workers,
        }


@dataclass(frozen=True)
class MetricsRow:
    strategy: str
    spec_kind: str
    stl_sat_rate: float
    success_rate: float
    mean_steps: float
    n: int


@dataclass
class BenchmarkResult:
    rows: list[MetricsRow]
    episodes: list[EpisodeResult]
    scenes: dict[int, Scene]

    def row(self, strategy: str, spec_kind: str | SpecKind) -> MetricsRow:
        kind = SpecKind(spec_kind).value
        for r in self.rows:
            if r.strategy == strategy and r.spec_kind == kind:
                return r
        raise KeyError((strategy, kind))

    def episodes_for(self, strategy: str, spec_kind: str | SpecKind) -> list[EpisodeResult]:
        kind = SpecKind(spec_kind).value
        return [e for e in self.episodes if e.strategy == strategy and e.spec_kind == kind]

    @property
    def mean_monitor_seconds(self) -> float:
        calls = sum(e.monitor_calls for e in self.episodes)
        return sum(e.monitor_seconds for e in self.episodes) / max(calls, 1)


def aggregate(episodes: Sequence[EpisodeResult]) -> MetricsRow:
    n = len(episodes)
    if n == 0:
        raise ValueError("no episodes to aggregate")
    return MetricsRow(
        strategy=episodes[0].strategy,
        spec_kind=episodes[0].spec_kind,
        stl_sat_rate=100.0 * sum(e.stl_satisfied for e in episodes) / n,
        success_rate=100.0 * sum(e.success for e in episodes) / n,
        mean_steps=sum(e.steps for e in episodes) / n,
        n=n,
    )


def _episode_task(args) -> EpisodeResult:
    strategy, kind, scene, cfg = args
    seed = scene.seed
    return rollout_episode(
        strategy, scene, build_spec(scene, kind), spec_kind=kind,
        policy_cfg=cfg.policy, dyn_cfg=cfg.dynamics, sampler=cfg.sampler,
        max_steps=cfg.max_steps,
        rng=np.random.default_rng([cfg.sampler.seed, seed]),
        noise_rng=np.random.default_rng([cfg.sampler.seed, seed, 1]),
    )


def run_benchmark(cfg: BenchmarkConfig) -> BenchmarkResult:
    """Roll out every (strategy, spec) pair over the same scene seeds.

    Episode ``i`` of every strategy uses scene seed ``base_seed + i`` and a
    sampler generator seeded from that scene seed, so runs are paired.
    """
    seeds = range(cfg.base_seed, cfg.base_seed + cfg.n_episodes)
    scenes = {s: generate_scene(cfg.scene, s) for s in seeds}
    tasks = [(strategy, kind, scenes[s], cfg)
             for kind in cfg.spec_kinds for strategy in cfg.strategies for s in seeds]
    if cfg.n_workers > 1:
        with ProcessPoolExecutor(cfg.n_workers) as pool:
            episodes = list(pool.map(_episode_task, tasks, chunksize=16))
    else:
        episodes = [_episode_task(t) for t in tasks]
    rows = []
    n = cfg.n_episodes
    for i in range(0, len(episodes), n):
        rows.append(aggregate(episodes[i:i + n]))
    return BenchmarkResult(rows, episodes, scenes)


@dataclass
class NoiseAblation:
    exact: BenchmarkResult
    noisy: BenchmarkResult

    def pairs(self) -> list[tuple[MetricsRow, MetricsRow]]:
        return list(zip(self.exact.rows, self.noisy.rows))


def run_noise_ablation(cfg: BenchmarkConfig, sigma_translation: float = 0.01,
                       sigma_yaw: float = math.radians(1.0)) -> NoiseAblation:
    """Same scenes and sampler seeds, executed with exact and with noisy dynamics.

    Decoding predicts with the noise-free model in both arms.
    """
    if not all(isinstance(s, (HCD, RCD)) for s in cfg.strategies):
        raise ValueError("noise ablation runs HCD and RCD strategies only")
    exact_dyn = dataclasses.replace(cfg.dynamics, noise_translation_sigma=0.0, noise_yaw_sigma=0.0)
    noisy_dyn = dataclasses.replace(cfg.dynamics, noise_translation_sigma=sigma_translation,
                                    noise_yaw_sigma=sigma_yaw)
    return NoiseAblation(
        exact=run_benchmark(dataclasses.replace(cfg, dynamics=exact_dyn)),
        noisy=run_benchmark(dataclasses.replace(cfg, dynamics=noisy_dyn)),
    )


def run_beta_sweep(cfg: BenchmarkConfig, betas: Iterable[float],
                   alpha: float = 1.0) -> list[tuple[float, list[MetricsRow]]]:
    """RCD metrics per beta, ascending, on one shared scene set."""
    betas = sorted(set(float(b) for b in betas))
    swept = dataclasses.replace(cfg, strategies=tuple(RCD(alpha, b) for b in betas))
    result = run_benchmark(swept)
    out = []
    for strategy in swept.strategies:
        out.append((strategy.beta, [result.row(strategy.name, k) for k in cfg.spec_kinds]))
    return out


# ---------------------------------------------------------------------------
# Exports


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def export_csv(rows: Sequence[MetricsRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([r.strategy, r.spec_kind, _fmt(r.stl_sat_rate), _fmt(r.success_rate),
                        _fmt(r.mean_steps), r.n])


def export_episodes_json(results: Sequence[EpisodeResult], path: str | Path,
                         scenes: dict[int, Scene] | None = None) -> None:
    doc = {
        "episodes": [e.to_dict() for e in results],
        "scenes": {str(k): scene_to_dict(v) for k, v in sorted((scenes or {}).items())},
    }
    Path(path).write_text(json.dumps(doc, indent=1))


def load_episodes_json(path: str | Path) -> tuple[list[EpisodeResult], dict[int, Scene]]:
    doc = json.loads(Path(path).read_text())
    episodes = [EpisodeResult.from_dict(d) for d in doc["episodes"]]
    scenes = {int(k): scene_from_dict(v) for k, v in doc.get("scenes", {}).items()}
    return episodes, scenes


_COLORS = {"Unconstrained": "#7f7f7f", "Filtering": "#1f77b4", "HCD": "#ff7f0e"}
_RCD_COLOR = "#9467bd"


def _color(strategy: str) -> str:
    return _COLORS.get(strategy, _RCD_COLOR)


def export_trajectory_svg(results: EpisodeResult | Sequence[EpisodeResult], scene: Scene,
                          path: str | Path, scale: float = 50.0) -> None:
    """Top-down plot: avoid boxes red, geofence rooms green outline, one polyline per episode."""
    if isinstance(results, EpisodeResult):
        results = [results]
    b = scene.bounds
    pad = 10
    width = (b.x_hi - b.x_lo) * scale + 2 * pad
    height = (b.z_hi - b.z_lo) * scale + 2 * pad

    def px(x, z):
        return pad + (x - b.x_lo) * scale, pad + (b.z_hi - z) * scale

    def rect(box, style):
        x0, y0 = px(box.x_lo, box.z_hi)
        w, h = (box.x_hi - box.x_lo) * scale, (box.z_hi - box.z_lo) * scale
        return f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{w:.2f}" height="{h:.2f}" {style}/>'

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
             f'viewBox="0 0 {width:.2f} {height:.2f}">',
             rect(b, 'fill="white" stroke="black" stroke-width="1"')]
    parts += [rect(r, 'class="room" fill="none" stroke="green" stroke-width="2"')
              for r in scene.geofence_rooms]
    parts += [rect(a, 'class="avoid" fill="red" fill-opacity="0.5" stroke="red"')
              for a in scene.avoid_boxes]
    for e in results:
        pts = " ".join("%.2f,%.2f" % px(s.x, s.z) for s in e.states)
        parts.append(f'<polyline class="path" data-strategy="{e.strategy}" data-spec="{e.spec_kind}" '
                     f'fill="none" stroke="{_color(e.strategy)}" stroke-width="1.5" points="{pts}"/>')
    sx, sy = px(scene.start.x, scene.start.z)
    gx, gy = px(*scene.goal)
    parts.append(f'<circle class="start" cx="{sx:.2f}" cy="{sy:.2f}" r="5" fill="white" stroke="black"/>')
    parts.append(f'<circle class="goal" cx="{gx:.2f}" cy="{gy:.2f}" r="6" fill="green"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
