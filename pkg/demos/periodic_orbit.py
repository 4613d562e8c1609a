"""A planar vector field with an attracting circular orbit.

Two-part graphons that vanish off-diagonal are points (x, y) in the
plane, and a suitable replacement rule realizes (approximately) any slow
planar field as its velocity.  The field used here combines a unit
tangent rotation around q = (0.2, 0.8) with a radial pull toward the
circle of radius 0.1, so every nearby start spirals onto a periodic
orbit.  Traces go to output/orbit_<i>.csv.
"""

import math
import os

import numpy as np

from flipflow import planar_demo
from flipflow.trajectory import CIRCLE_CENTER, CIRCLE_RADIUS, FIELD_GAIN

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

a, b = CIRCLE_CENTER
rng = np.random.default_rng(7)
horizon = 5.0 / FIELD_GAIN  # the gain is tiny, so orbits are slow

for i in range(4):
    rho = rng.uniform(0.05, 0.14)
    angle = rng.uniform(0, 2 * math.pi)
    start = (a + rho * math.cos(angle), b + rho * math.sin(angle))
    trace = planar_demo(start, t_end=horizon, num_points=600)
    path = os.path.join(OUT, f"orbit_{i}.csv")
    with open(path, "w") as fh:
        fh.write("t,x,y\n")
        for t, p in zip(trace.times, trace.points):
            fh.write(f"{t!r},{p[0]!r},{p[1]!r}\n")
    print(
        f"start radius {rho:.3f} -> final radius {trace.final_radius():.5f}"
        f"  (target {CIRCLE_RADIUS})"
    )
print(f"traces written to {OUT}/orbit_*.csv")
