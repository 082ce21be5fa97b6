"""Temporal-logic constrained decoding for discrete-action navigation policies.

Submodules:

- ``stl``: formulas, parser, batch robustness and an online invariant monitor
- ``dynamics``: unicycle model over a five-token action vocabulary
- ``scene``: procedural rooms/obstacle scenes and the two safety formulas
- ``policy``: goal-seeking logit source and samplers
- ``decode``: unconstrained, filtering, hard-masked and robustness-weighted decoding
- ``harness``: paired benchmarks, noise ablation, beta sweep and exports
"""
from .decode import (HCD, RCD, EpisodeResult, Filtering, Unconstrained,
                     decode_step, rollout_episode)
from .dynamics import Action, DynamicsConfig, State, step
from .harness import (BenchmarkConfig, run_benchmark, run_beta_sweep,
                      run_noise_ablation)
from .policy import PolicyConfig, SamplerMode, SamplerSpec, compute_logits, sample
from .scene import Scene, SceneGenConfig, SpecKind, build_spec, generate_scene
from .stl import (OnlineMonitor, Trajectory, eval_boolean, format_formula,
                  parse_formula, robustness)

__version__ = "0.1.0"
