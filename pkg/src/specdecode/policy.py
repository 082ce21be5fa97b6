"""Goal-seeking toy policy that emits logits, and the samplers that decode them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dynamics import ACTIONS, Action, DynamicsConfig, State, predict_successors
from .scene import Scene

__all__ = ["PolicyConfig", "SamplerMode", "SamplerSpec", "InfeasibleError",
           "compute_logits", "softmax", "sample", "DONE_LOGIT"]

DONE_LOGIT = 10.0


class InfeasibleError(RuntimeError):
    """Every logit is -inf, so nothing can be sampled."""


@dataclass(frozen=True)
class PolicyConfig:
    goal_weight: float = 5.0
    heading_weight: float = 2.0
    done_distance: float = 1.0
    temperature: float = 1.0
    # flat logit cost on MoveBack; without it reversing toward a goal that
    # lies behind outscores turning to face it
    backward_penalty: float = 1.0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if min(self.goal_weight, self.heading_weight, self.backward_penalty) < 0:
            raise ValueError("weights must be non-negative")


def _heading_error(s: State, goal) -> float:
    bearing = math.atan2(goal[1] - s.z, goal[0] - s.x)
    return bearing - s.theta


def compute_logits(s: State, scene: Scene, cfg: PolicyConfig = PolicyConfig(),
                   dyn: DynamicsConfig = DynamicsConfig()) -> np.ndarray:
    """Potential-field logits over the action vocabulary.

    Movement actions score distance progress plus alignment with the goal
    after the move; Done is +10 inside ``done_distance`` and -10 outside.
    """
    d_now = scene.goal_distance(s)
    out = np.empty(len(ACTIONS))
    for a, nxt in predict_successors(s, dyn).items():
        if a == Action.DONE:
            out[a] = DONE_LOGIT if d_now <= cfg.done_distance else -DONE_LOGIT
            continue
        progress = d_now - scene.goal_distance(nxt)
        logit = cfg.goal_weight * progress + cfg.heading_weight * math.cos(_heading_error(nxt, scene.goal))
        if a == Action.MOVE_BACK:
            logit -= cfg.backward_penalty
        out[a] = logit
    return out / cfg.temperature


class SamplerMode(str, Enum):
    GREEDY = "greedy"
    TEMPERATURE = "temperature"
    TOP_K = "top_k"


@dataclass(frozen=True)
class SamplerSpec:
    mode: SamplerMode = SamplerMode.TEMPERATURE
    k: int = len(ACTIONS)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", SamplerMode(self.mode))
        if self.mode is SamplerMode.TOP_K and not 1 <= self.k <= len(ACTIONS):
            raise ValueError(f"top-k needs 1 <= k <= {len(ACTIONS)}")


def softmax(logits: np.ndarray) -> np.ndarray:
    """Softmax that maps -inf entries to exactly zero probability."""
    logits = np.asarray(logits, dtype=float)
    m = logits.max()
    if m == -math.inf:
        raise InfeasibleError("all logits are -inf")
    e = np.exp(logits - m)
    return e / e.sum()


def _argmax(logits: np.ndarray) -> int:
    return int(np.argmax(logits))  # first maximum, i.e. lowest index on ties


def sample(logits: np.ndarray, spec: SamplerSpec, rng: np.random.Generator) -> Action:
    """Pick an action from ``logits``; one uniform draw per non-greedy call."""
    logits = np.asarray(logits, dtype=float)
    if not np.isfinite(logits).any():
        raise InfeasibleError("all logits are -inf")
    if spec.mode is SamplerMode.GREEDY:
        return Action(_argmax(logits))
    if spec.mode is SamplerMode.TOP_K:
        # stable sort keeps lower indices ahead on ties
        order = np.argsort(-logits, kind="stable")
        kept = np.full_like(logits, -math.inf)
        kept[order[:spec.k]] = logits[order[:spec.k]]
        logits = kept
    p = softmax(logits)
    u = rng.random()
    idx = int(np.searchsorted(np.cumsum(p), u, side="right"))
    # guard against cumsum rounding just below 1 and against landing on a zero-mass slot
    idx = min(idx, len(p) - 1)
    while p[idx] == 0.0:
        idx -= 1
    return Action(idx)
