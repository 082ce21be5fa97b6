"""Planar unicycle dynamics over a discrete action vocabulary."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

__all__ = ["Action", "State", "DynamicsConfig", "wrap_angle", "step",
           "step_noisy", "predict_successors", "ACTIONS", "POSITION_PRESERVING"]


class Action(IntEnum):
    """Action vocabulary; the integer value is the logit index."""

    MOVE_AHEAD = 0
    MOVE_BACK = 1
    ROTATE_LEFT = 2
    ROTATE_RIGHT = 3
    DONE = 4

    @property
    def label(self) -> str:
        return "".join(w.capitalize() for w in self.name.split("_"))

    @classmethod
    def parse(cls, text: str) -> "Action":
        key = text.replace("_", "").lower()
        for a in cls:
            if a.label.lower() == key:
                return a
        raise ValueError(f"unknown action {text!r}")


ACTIONS = tuple(Action)
POSITION_PRESERVING = frozenset({Action.ROTATE_LEFT, Action.ROTATE_RIGHT, Action.DONE})


def wrap_angle(theta: float) -> float:
    """Map an angle into [-pi, pi); angles already in range pass through untouched."""
    if -math.pi <= theta < math.pi:
        return theta
    wrapped = (theta + math.pi) % (2 * math.pi) - math.pi
    if wrapped >= math.pi:
        wrapped -= 2 * math.pi
    return wrapped


@dataclass(frozen=True)
class State:
    x: float
    z: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    def as_sample(self) -> dict[str, float]:
        return {"x": self.x, "z": self.z, "theta": self.theta}


@dataclass(frozen=True)
class DynamicsConfig:
    forward_step: float = 0.2
    yaw_step: float = math.pi / 6
    noise_translation_sigma: float = 0.0
    noise_yaw_sigma: float = 0.0

    def __post_init__(self):
        if self.forward_step <= 0 or self.yaw_step <= 0:
            raise ValueError("forward_step and yaw_step must be positive")
        if self.noise_translation_sigma < 0 or self.noise_yaw_sigma < 0:
            raise ValueError("noise sigmas must be non-negative")

    @property
    def noisy(self) -> bool:
        return self.noise_translation_sigma > 0 or self.noise_yaw_sigma > 0


def step(s: State, a: Action, cfg: DynamicsConfig = DynamicsConfig()) -> State:
    if a == Action.MOVE_AHEAD or a == Action.MOVE_BACK:
        d = cfg.forward_step if a == Action.MOVE_AHEAD else -cfg.forward_step
        return State(s.x + d * math.cos(s.theta), s.z + d * math.sin(s.theta), s.theta)
    if a == Action.ROTATE_LEFT:
        return State(s.x, s.z, s.theta + cfg.yaw_step)
    if a == Action.ROTATE_RIGHT:
        return State(s.x, s.z, s.theta - cfg.yaw_step)
    if a == Action.DONE:
        return s
    raise ValueError(f"unknown action {a!r}")


def step_noisy(s: State, a: Action, cfg: DynamicsConfig, rng: np.random.Generator) -> State:
    """Nominal step plus zero-mean Gaussian actuation error.

    Translations get independent world-frame offsets on x and z, rotations
    an offset on theta; Done is exact. Three normals are drawn per call
    regardless, so the generator advances identically for every action.
    """
    nominal = step(s, a, cfg)
    dx, dz, dth = rng.standard_normal(3)
    x, z, theta = nominal.x, nominal.z, nominal.theta
    if a in (Action.MOVE_AHEAD, Action.MOVE_BACK) and cfg.noise_translation_sigma > 0:
        x += cfg.noise_translation_sigma * dx
        z += cfg.noise_translation_sigma * dz
    if a in (Action.ROTATE_LEFT, Action.ROTATE_RIGHT) and cfg.noise_yaw_sigma > 0:
        theta += cfg.noise_yaw_sigma * dth
    return State(x, z, theta)


def predict_successors(s: State, cfg: DynamicsConfig = DynamicsConfig()) -> dict[Action, State]:
    """Noise-free successor of ``s`` under every action, in vocabulary order."""
    return {a: step(s, a, cfg) for a in ACTIONS}
