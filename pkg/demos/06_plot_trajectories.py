"""
Drawing trajectories
====================

Writes a top-down SVG of one scene with a polyline per strategy.
"""

import sys

from specdecode import HCD, RCD, BenchmarkConfig, Filtering, Unconstrained, run_benchmark
from specdecode.harness import export_trajectory_svg

out = sys.argv[1] if len(sys.argv) > 1 else "trajectories.svg"
cfg = BenchmarkConfig(n_episodes=1, strategies=(Unconstrained(), Filtering(), HCD(), RCD()),
                      spec_kinds=("avoid",))
result = run_benchmark(cfg)
seed = result.episodes[0].scene_seed
export_trajectory_svg(result.episodes, result.scenes[seed], out)
print("wrote", out)
