"""Decoding strategies: unconstrained, filtering, hard masking and robustness reweighting."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .dynamics import (ACTIONS, POSITION_PRESERVING, Action, DynamicsConfig,
                       State, predict_successors, step, step_noisy)
from .policy import PolicyConfig, SamplerSpec, compute_logits, sample
from .scene import Scene, SpecKind, check_success
from .stl import Formula, OnlineMonitor, Trajectory, robustness

__all__ = ["Unconstrained", "Filtering", "HCD", "RCD", "Strategy",
           "DecodeStepTrace", "EpisodeResult", "successor_robustness",
           "mask_logits_hcd", "reweight_logits_rcd", "filter_action",
           "decode_step", "rollout_episode", "strategy_from_dict",
           "EXP_CLAMP"]

EXP_CLAMP = 50.0


@dataclass(frozen=True)
class Unconstrained:
    name = "Unconstrained"

    def to_dict(self) -> dict:
        return {"kind": "unconstrained"}


@dataclass(frozen=True)
class Filtering:
    default_action: Action = Action.ROTATE_LEFT

    def __post_init__(self):
        if self.default_action not in POSITION_PRESERVING:
            raise ValueError("filtering fallback must not move the robot")

    @property
    def name(self) -> str:
        if self.default_action == Action.ROTATE_LEFT:
            return "Filtering"
        return f"Filtering({Action(self.default_action).label})"

    def to_dict(self) -> dict:
        return {"kind": "filtering", "default_action": Action(self.default_action).label}


@dataclass(frozen=True)
class HCD:
    name = "HCD"

    def to_dict(self) -> dict:
        return {"kind": "hcd"}


@dataclass(frozen=True)
class RCD:
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta < 0:
            raise ValueError("RCD needs alpha > 0 and beta >= 0")

    @property
    def name(self) -> str:
        return f"RCD(alpha={self.alpha:g},beta={self.beta:g})"

    def to_dict(self) -> dict:
        return {"kind": "rcd", "alpha": self.alpha, "beta": self.beta}


Strategy = Union[Unconstrained, Filtering, HCD, RCD]


def strategy_from_dict(d: dict) -> Strategy:
    kind = d.get("kind", "").lower()
    if kind == "unconstrained":
        return Unconstrained()
    if kind == "filtering":
        return Filtering(Action.parse(d.get("default_action", "RotateLeft")))
    if kind == "hcd":
        return HCD()
    if kind == "rcd":
        return RCD(float(d.get("alpha", 1.0)), float(d.get("beta", 1.0)))
    raise ValueError(f"unknown strategy kind {kind!r}")


@dataclass
class DecodeStepTrace:
    raw_logits: np.ndarray
    adjusted_logits: np.ndarray
    robustness_per_action: np.ndarray
    chosen: Action
    violated_mask: np.ndarray
    proposed: Action | None = None
    all_masked: bool = False
    spec_seconds: float = 0.0


def successor_robustness(s: State, monitor: OnlineMonitor,
                         cfg: DynamicsConfig = DynamicsConfig()) -> np.ndarray:
    """Hypothetical running-minimum robustness after each candidate action."""
    succ = predict_successors(s, cfg)
    return np.array([monitor.peek(succ[a].as_sample()) for a in ACTIONS])


def _hcd_from_robustness(logits: np.ndarray, r: np.ndarray) -> np.ndarray:
    return np.where(r < 0, -math.inf, logits)


def _rcd_from_robustness(logits: np.ndarray, r: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    w = np.exp(np.clip(alpha * r, -EXP_CLAMP, EXP_CLAMP))
    return logits + beta * w


def mask_logits_hcd(logits: np.ndarray, s: State, monitor: OnlineMonitor,
                    cfg: DynamicsConfig = DynamicsConfig()) -> np.ndarray:
    """Set to -inf every logit whose action would drive the running robustness below zero."""
    return _hcd_from_robustness(np.asarray(logits, dtype=float), successor_robustness(s, monitor, cfg))


def reweight_logits_rcd(logits: np.ndarray, s: State, monitor: OnlineMonitor,
                        cfg: DynamicsConfig = DynamicsConfig(), alpha: float = 1.0,
                        beta: float = 1.0) -> np.ndarray:
    """Shift each logit by ``beta * exp(alpha * r)``, with ``alpha * r`` clamped to [-50, 50]."""
    r = successor_robustness(s, monitor, cfg)
    return _rcd_from_robustness(np.asarray(logits, dtype=float), r, alpha, beta)


def filter_action(logits: np.ndarray, s: State, monitor: OnlineMonitor,
                  cfg: DynamicsConfig, default: Action, sampler: SamplerSpec,
                  rng: np.random.Generator) -> Action:
    """Sample from the raw logits; fall back to ``default`` if that action would violate."""
    proposed = sample(logits, sampler, rng)
    if monitor.peek(step(s, proposed, cfg).as_sample()) < 0:
        return default
    return proposed


def decode_step(strategy: Strategy, s: State, scene: Scene, monitor: OnlineMonitor,
                policy_cfg: PolicyConfig, dyn_cfg: DynamicsConfig,
                sampler: SamplerSpec, rng: np.random.Generator) -> tuple[Action, DecodeStepTrace]:
    """Choose one action; ``trace.proposed`` is the token sampled before any fallback."""
    raw = compute_logits(s, scene, policy_cfg, dyn_cfg)
    t0 = time.perf_counter()
    r = successor_robustness(s, monitor, dyn_cfg)
    spec_seconds = time.perf_counter() - t0
    violated = r < 0
    all_masked = False
    proposed = None
    if isinstance(strategy, Unconstrained):
        adjusted = raw
        chosen = sample(adjusted, sampler, rng)
    elif isinstance(strategy, Filtering):
        adjusted = raw
        proposed = chosen = sample(raw, sampler, rng)
        if violated[chosen]:
            chosen = strategy.default_action
    elif isinstance(strategy, HCD):
        adjusted = _hcd_from_robustness(raw, r)
        if violated.all():
            all_masked = True
            chosen = Action(int(np.argmax(r)))
        else:
            chosen = sample(adjusted, sampler, rng)
    elif isinstance(strategy, RCD):
        adjusted = _rcd_from_robustness(raw, r, strategy.alpha, strategy.beta)
        chosen = sample(adjusted, sampler, rng)
    else:
        raise TypeError(f"unknown strategy {strategy!r}")
    chosen = Action(chosen)
    proposed = chosen if proposed is None else Action(proposed)
    return chosen, DecodeStepTrace(raw, adjusted, r, chosen, violated, proposed,
                                   all_masked, spec_seconds)


@dataclass
class EpisodeResult:
    scene_seed: int
    strategy: str
    spec_kind: str
    stl_satisfied: bool
    success: bool
    steps: int
    min_robustness: float
    flagged_infeasible: bool
    states: list[State] = field(default_factory=list)
    actions: list[Action] = field(default_factory=list)
    traces: list[DecodeStepTrace] | None = field(default=None, compare=False, repr=False)
    monitor_seconds: float = field(default=0.0, compare=False, repr=False)
    monitor_calls: int = field(default=0, compare=False, repr=False)

    def trajectory(self) -> Trajectory:
        return Trajectory({
            "x": [s.x for s in self.states],
            "z": [s.z for s in self.states],
            "theta": [s.theta for s in self.states],
        })

    def to_dict(self) -> dict:
        return {
            "scene_seed": self.scene_seed,
            "strategy": self.strategy,
            "spec_kind": self.spec_kind,
            "stl_satisfied": self.stl_satisfied,
            "success": self.success,
            "steps": self.steps,
            "min_robustness": self.min_robustness,
            "flagged_infeasible": self.flagged_infeasible,
            "states": [[s.x, s.z, s.theta] for s in self.states],
            "actions": [Action(a).label for a in self.actions],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeResult":
        return cls(
            scene_seed=int(d["scene_seed"]),
            strategy=d["strategy"],
            spec_kind=d["spec_kind"],
            stl_satisfied=bool(d["stl_satisfied"]),
            success=bool(d["success"]),
            steps=int(d["steps"]),
            min_robustness=float(d["min_robustness"]),
            flagged_infeasible=bool(d["flagged_infeasible"]),
            states=[State(*xs) for xs in d["states"]],
            actions=[Action.parse(a) for a in d["actions"]],
        )


def rollout_episode(strategy: Strategy, scene: Scene, spec: Formula, *,
                    spec_kind: SpecKind | str = SpecKind.AVOID,
                    policy_cfg: PolicyConfig = PolicyConfig(),
                    dyn_cfg: DynamicsConfig = DynamicsConfig(),
                    sampler: SamplerSpec = SamplerSpec(),
                    max_steps: int = 200,
                    rng: np.random.Generator | None = None,
                    noise_rng: np.random.Generator | None = None,
                    keep_traces: bool = False) -> EpisodeResult:
    """Run one episode until Done or ``max_steps``.

    Decoding always predicts with noise-free dynamics; when ``dyn_cfg``
    carries noise, execution uses :func:`step_noisy` with ``noise_rng``.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if rng is None:
        rng = np.random.default_rng(sampler.seed)
    if dyn_cfg.noisy and noise_rng is None:
        noise_rng = np.random.default_rng([sampler.seed, scene.seed, 1])
    monitor = OnlineMonitor(spec)
    s = scene.start
    monitor.append(s.as_sample())
    states, actions = [s], []
    traces = [] if keep_traces else None
    flagged = False
    spent, calls = 0.0, 0
    for _ in range(max_steps):
        action, trace = decode_step(strategy, s, scene, monitor, policy_cfg, dyn_cfg, sampler, rng)
        spent += trace.spec_seconds
        calls += 1
        flagged |= trace.all_masked
        if keep_traces:
            traces.append(trace)
        s = step_noisy(s, action, dyn_cfg, noise_rng) if dyn_cfg.noisy else step(s, action, dyn_cfg)
        monitor.append(s.as_sample())
        states.append(s)
        actions.append(action)
        if action == Action.DONE:
            break
    result = EpisodeResult(
        scene_seed=scene.seed,
        strategy=strategy.name,
        spec_kind=SpecKind(spec_kind).value,
        stl_satisfied=False,
        success=check_success(states, actions, scene),
        steps=len(actions),
        min_robustness=0.0,
        flagged_infeasible=flagged,
        states=states,
        actions=actions,
        traces=traces,
        monitor_seconds=spent,
        monitor_calls=calls,
    )
    rho = robustness(spec, result.trajectory(), 0)
    result.min_robustness = rho
    result.stl_satisfied = rho >= 0
    return result
