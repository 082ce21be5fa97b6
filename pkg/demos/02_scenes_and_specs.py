"""
Procedural scenes and their safety formulas
===========================================

Each seed yields a start, a goal, boxes to avoid and a set of allowed
rooms. Two formulas are built from a scene: box avoidance and a geofence.
"""

from specdecode.scene import SceneGenConfig, build_spec, generate_scene
from specdecode.stl import format_formula

scene = generate_scene(SceneGenConfig(), seed=7)
print("start:", scene.start)
print("goal:", scene.goal)
print("avoid boxes:", [b.to_list() for b in scene.avoid_boxes])
print("geofence rooms:", [r.to_list() for r in scene.geofence_rooms])

# Both formulas are pure invariants over the (x, z) channels.
for kind in ("avoid", "geofence"):
    print(kind, "->", format_formula(build_spec(scene, kind)))
