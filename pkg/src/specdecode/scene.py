"""Randomised planar navigation scenes and the avoid/geofence specifications."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import Action, State
from .stl import (Formula, Globally, Not, Pred, Predicate, Relation,
                  conjunction, disjunction)

__all__ = ["Box", "Scene", "SceneGenConfig", "SceneError", "SpecKind",
           "generate_scene", "build_avoid_spec", "build_geofence_spec",
           "build_spec", "check_success", "segment_box_distance",
           "scene_to_dict", "scene_from_dict", "save_scene", "load_scene",
           "validate_scene", "SUCCESS_RADIUS"]

SUCCESS_RADIUS = 1.0
AVOID_SIDE = 1.0          # avoid boxes are 1 m x 1 m
CONFLICT_INFLATION = 0.5  # corridor half-width used by conflict_bias
CLEARANCE = 0.5           # start/goal distance to any avoid box
ROOM_MARGIN = 0.5         # start/goal distance to the geofence boundary
MAX_TRIES = 1000


class SceneError(ValueError):
    pass


class SpecKind(str, Enum):
    AVOID = "avoid"
    GEOFENCE = "geofence"


@dataclass(frozen=True)
class Box:
    x_lo: float
    x_hi: float
    z_lo: float
    z_hi: float

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.z_lo < self.z_hi):
            raise SceneError(f"degenerate box {self}")

    @classmethod
    def around(cls, cx: float, cz: float, side: float) -> "Box":
        h = side / 2
        return cls(cx - h, cx + h, cz - h, cz + h)

    @property
    def area(self) -> float:
        return (self.x_hi - self.x_lo) * (self.z_hi - self.z_lo)

    def contains(self, x: float, z: float) -> bool:
        return self.x_lo <= x <= self.x_hi and self.z_lo <= z <= self.z_hi

    def margin(self, x: float, z: float) -> float:
        """Signed containment margin: positive inside, negative outside."""
        return min(x - self.x_lo, self.x_hi - x, z - self.z_lo, self.z_hi - z)

    def inside(self, other: "Box") -> bool:
        return (other.x_lo <= self.x_lo and self.x_hi <= other.x_hi
                and other.z_lo <= self.z_lo and self.z_hi <= other.z_hi)

    def to_list(self) -> list[float]:
        return [self.x_lo, self.x_hi, self.z_lo, self.z_hi]


@dataclass(frozen=True)
class Scene:
    bounds: Box
    avoid_boxes: tuple[Box, ...]
    geofence_rooms: tuple[Box, ...]
    start: State
    goal: tuple[float, float]
    seed: int = 0

    def in_geofence(self, x: float, z: float) -> bool:
        return any(r.contains(x, z) for r in self.geofence_rooms)

    def goal_distance(self, s: State) -> float:
        return math.hypot(self.goal[0] - s.x, self.goal[1] - s.z)


@dataclass(frozen=True)
class SceneGenConfig:
    world_size: float = 10.0
    n_avoid: int = 2
    n_rooms: int = 2
    goal_min_dist: float = 4.0
    conflict_bias: bool = True

    def __post_init__(self):
        if self.n_avoid < 0:
            raise SceneError("n_avoid must be >= 0")
        if not 1 <= self.n_rooms <= 4:
            raise SceneError("n_rooms must be between 1 and 4")
        if self.world_size <= 2 * ROOM_MARGIN + AVOID_SIDE:
            raise SceneError("world_size too small")
        if not 0 <= self.goal_min_dist < self.world_size * math.sqrt(2):
            raise SceneError("goal_min_dist must be below the world diagonal")


def quadrant_rooms(world_size: float) -> tuple[Box, ...]:
    h = world_size / 2
    return (Box(0, h, 0, h), Box(h, world_size, 0, h),
            Box(0, h, h, world_size), Box(h, world_size, h, world_size))


def _sample_in_rooms(rng: np.random.Generator, rooms: Sequence[Box]) -> tuple[float, float]:
    room = rooms[rng.integers(len(rooms))]
    x = rng.uniform(room.x_lo + ROOM_MARGIN, room.x_hi - ROOM_MARGIN)
    z = rng.uniform(room.z_lo + ROOM_MARGIN, room.z_hi - ROOM_MARGIN)
    return float(x), float(z)


def _linf_outside(box: Box, x: float, z: float) -> float:
    return -box.margin(x, z)


def _segment_hits_box(p, q, box: Box) -> bool:
    # Liang-Barsky clipping of the segment p->q against the closed box
    t0, t1 = 0.0, 1.0
    dx, dz = q[0] - p[0], q[1] - p[1]
    for d, lo, hi, v in ((dx, box.x_lo, box.x_hi, p[0]), (dz, box.z_lo, box.z_hi, p[1])):
        if d == 0:
            if v < lo or v > hi:
                return False
            continue
        a, b = (lo - v) / d, (hi - v) / d
        if a > b:
            a, b = b, a
        t0, t1 = max(t0, a), min(t1, b)
        if t0 > t1:
            return False
    return True


def _point_segment_distance(c, p, q) -> float:
    px, pz = p
    dx, dz = q[0] - px, q[1] - pz
    L2 = dx * dx + dz * dz
    u = 0.0 if L2 == 0 else max(0.0, min(1.0, ((c[0] - px) * dx + (c[1] - pz) * dz) / L2))
    return math.hypot(c[0] - (px + u * dx), c[1] - (pz + u * dz))


def _point_box_distance(c, box: Box) -> float:
    ex = max(box.x_lo - c[0], 0.0, c[0] - box.x_hi)
    ez = max(box.z_lo - c[1], 0.0, c[1] - box.z_hi)
    return math.hypot(ex, ez)


def segment_box_distance(p, q, box: Box) -> float:
    """Euclidean distance between segment p->q and a closed box."""
    if _segment_hits_box(p, q, box):
        return 0.0
    corners = [(box.x_lo, box.z_lo), (box.x_lo, box.z_hi),
               (box.x_hi, box.z_lo), (box.x_hi, box.z_hi)]
    return min([_point_box_distance(p, box), _point_box_distance(q, box)]
               + [_point_segment_distance(c, p, q) for c in corners])


def _place_boxes(rng, cfg: SceneGenConfig, bounds: Box, start, goal) -> list[Box] | None:
    half = AVOID_SIDE / 2
    boxes = []
    for i in range(cfg.n_avoid):
        for _ in range(100):
            if i == 0 and cfg.conflict_bias:
                u = rng.uniform(0.35, 0.65)
                dx, dz = goal[0] - start[0], goal[1] - start[1]
                norm = math.hypot(dx, dz)
                v = rng.uniform(-CONFLICT_INFLATION - AVOID_SIDE / 2, CONFLICT_INFLATION + AVOID_SIDE / 2)
                cx = start[0] + u * dx - v * dz / norm
                cz = start[1] + u * dz + v * dx / norm
            else:
                cx = rng.uniform(bounds.x_lo + half, bounds.x_hi - half)
                cz = rng.uniform(bounds.z_lo + half, bounds.z_hi - half)
            box = Box.around(float(cx), float(cz), AVOID_SIDE)
            if not box.inside(bounds):
                continue
            if min(_linf_outside(box, *start), _linf_outside(box, *goal)) < CLEARANCE:
                continue
            boxes.append(box)
            break
        else:
            return None
    return boxes


def generate_scene(cfg: SceneGenConfig = SceneGenConfig(), seed: int = 0) -> Scene:
    """Deterministic scene for ``seed``.

    Rooms are a random subset of the four world quadrants; diagonal pairs
    touch only at the centre point. With ``conflict_bias`` the first avoid
    box lies within 0.5 m of the middle third of the start-goal segment.
    """
    rng = np.random.default_rng(seed)
    W = cfg.world_size
    bounds = Box(0.0, W, 0.0, W)
    quads = quadrant_rooms(W)
    for _ in range(MAX_TRIES):
        picks = sorted(rng.choice(4, size=cfg.n_rooms, replace=False).tolist())
        rooms = tuple(quads[i] for i in picks)
        start = _sample_in_rooms(rng, rooms)
        goal = _sample_in_rooms(rng, rooms)
        if math.dist(start, goal) < cfg.goal_min_dist:
            continue
        boxes = _place_boxes(rng, cfg, bounds, start, goal)
        if boxes is None:
            continue
        theta = float(rng.uniform(-math.pi, math.pi))
        scene = Scene(bounds, tuple(boxes), rooms, State(*start, theta), goal, seed)
        validate_scene(scene)
        return scene
    raise SceneError(f"could not generate a scene for seed {seed} after {MAX_TRIES} tries")


def validate_scene(scene: Scene) -> None:
    b = scene.bounds
    s, g = scene.start, scene.goal
    if not b.contains(s.x, s.z) or not b.contains(*g):
        raise SceneError("start and goal must lie inside the world bounds")
    if not scene.geofence_rooms:
        raise SceneError("scene needs at least one geofence room")
    if not scene.in_geofence(s.x, s.z) or not scene.in_geofence(*g):
        raise SceneError("start and goal must lie inside the geofence rooms")
    for box in scene.avoid_boxes:
        if box.contains(s.x, s.z):
            raise SceneError("start lies inside an avoid box")
        if not math.isclose(box.area, AVOID_SIDE ** 2, rel_tol=1e-9):
            raise SceneError(f"avoid box area {box.area} != {AVOID_SIDE ** 2}")


def _box_formula(box: Box) -> Formula:
    return conjunction([
        Pred(Predicate.of("x", Relation.GE, box.x_lo)),
        Pred(Predicate.of("x", Relation.LE, box.x_hi)),
        Pred(Predicate.of("z", Relation.GE, box.z_lo)),
        Pred(Predicate.of("z", Relation.LE, box.z_hi)),
    ])


def build_avoid_spec(scene: Scene) -> Formula:
    """``G`` of the conjunction of ``!(inside box)`` over all avoid boxes."""
    return Globally(conjunction([Not(_box_formula(b)) for b in scene.avoid_boxes]))


def build_geofence_spec(scene: Scene) -> Formula:
    """``G`` of the disjunction of ``inside room`` over the geofence rooms."""
    if not scene.geofence_rooms:
        raise SceneError("geofence needs at least one room")
    return Globally(disjunction([_box_formula(r) for r in scene.geofence_rooms]))


def build_spec(scene: Scene, kind: SpecKind | str) -> Formula:
    kind = SpecKind(kind)
    return build_avoid_spec(scene) if kind is SpecKind.AVOID else build_geofence_spec(scene)


def check_success(states: Sequence[State], actions: Sequence[Action], scene: Scene,
                  radius: float = SUCCESS_RADIUS) -> bool:
    """Final pose within ``radius`` of the goal and the last action was Done."""
    if not states or not actions or actions[-1] != Action.DONE:
        return False
    return scene.goal_distance(states[-1]) <= radius


# ---------------------------------------------------------------------------
# JSON


def scene_to_dict(scene: Scene) -> dict:
    return {
        "seed": scene.seed,
        "bounds": scene.bounds.to_list(),
        "avoid_boxes": [b.to_list() for b in scene.avoid_boxes],
        "geofence_rooms": [r.to_list() for r in scene.geofence_rooms],
        "start": {"x": scene.start.x, "z": scene.start.z, "theta": scene.start.theta},
        "goal": {"x": scene.goal[0], "z": scene.goal[1]},
    }


def scene_from_dict(d: dict) -> Scene:
    try:
        scene = Scene(
            bounds=Box(*d["bounds"]),
            avoid_boxes=tuple(Box(*b) for b in d["avoid_boxes"]),
            geofence_rooms=tuple(Box(*r) for r in d["geofence_rooms"]),
            start=State(d["start"]["x"], d["start"]["z"], d["start"]["theta"]),
            goal=(float(d["goal"]["x"]), float(d["goal"]["z"])),
            seed=int(d["seed"]),
        )
    except (KeyError, TypeError) as exc:
        raise SceneError(f"malformed scene document: {exc}") from None
    validate_scene(scene)
    return scene


def save_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2))


def load_scene(path: str | Path) -> Scene:
    return scene_from_dict(json.loads(Path(path).read_text()))
