"""
How hard should the reweighting push?
=====================================

beta scales the robustness bonus added to each logit. beta = 0 recovers
the unconstrained policy; large beta approaches hard masking.
"""

from specdecode import BenchmarkConfig, run_beta_sweep

cfg = BenchmarkConfig(n_episodes=40)
for beta, rows in run_beta_sweep(cfg, [0, 1, 5, 10, 50], alpha=1.0):
    cells = "  ".join(f"{r.spec_kind} {r.stl_sat_rate:5.1f}%" for r in rows)
    print(f"beta={beta:<5g} {cells}")
