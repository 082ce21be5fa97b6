"""
Signal temporal logic in a few lines
====================================

Parse a formula, score a trajectory, and watch the online monitor
track the same number one sample at a time.
"""

import numpy as np

from specdecode.stl import OnlineMonitor, Trajectory, format_formula, parse_formula, robustness

# A robot should stay left of x = 3 and eventually reach x >= 2 within 5 steps.
phi = parse_formula("G[0,10] (x <= 3) & F[0,5] (x >= 2)")
print(format_formula(phi))

xs = np.minimum(0.5 * np.arange(11), 2.5)
tr = Trajectory({"x": xs})
print("robustness at t=0:", robustness(phi, tr, 0))

# Robustness is a signed margin: positive means satisfied with room to spare.
late = Trajectory({"x": np.minimum(0.25 * np.arange(11), 2.5)})
print("reaches x >= 2 too late:", robustness(phi, late, 0))

# Invariants (a single G over a state-only body) can be monitored online.
# The running minimum after the last sample equals the batch value.
inv = parse_formula("G ((x <= 3) & (x >= -1))")
mon = OnlineMonitor(inv)
for x in xs:
    mon.append({"x": float(x)})
print("online:", mon.running_min, "batch:", robustness(inv, tr, 0))

# peek() scores a hypothetical next sample without committing it.
print("peek at x=3.4:", mon.peek({"x": 3.4}))
