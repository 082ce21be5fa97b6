"""
Actuation noise
===============

Decoding predicts with the exact unicycle model. Here execution adds
Gaussian slip, so predicted and realized states drift apart and the
hard guarantee turns into a high but imperfect satisfaction rate.
"""

import math

from specdecode import HCD, RCD, BenchmarkConfig, run_noise_ablation

cfg = BenchmarkConfig(n_episodes=40, strategies=(HCD(), RCD()))
ablation = run_noise_ablation(cfg, sigma_translation=0.01, sigma_yaw=math.radians(1.0))
for exact, noisy in ablation.pairs():
    print(f"{exact.strategy:22s} {exact.spec_kind:9s} exact {exact.stl_sat_rate:5.1f}%  "
          f"noisy {noisy.stl_sat_rate:5.1f}%")
