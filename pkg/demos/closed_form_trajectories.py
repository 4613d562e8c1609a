"""Two flip processes whose trajectories have pencil-and-paper solutions.

The edge-filling process (every drawn pair becomes an edge) has constant
trajectories d(t) = 1 - (1 - d0) exp(-2t); the triangle-removal process
started from the complete graph follows d(t) = (1 + 12t)^(-1/2).  This
script integrates both numerically and prints the error against the
closed forms.
"""

import math

from flipflow import constant, erdos_renyi_rule, flow_at, triangle_removal_rule

er = erdos_renyi_rule()
tr = triangle_removal_rule()

print("edge filling from the empty graphon")
print(f"{'t':>6} {'numeric':>16} {'closed form':>16} {'error':>10}")
for t in (0.1, 0.25, 0.5, 1.0, 2.0, 4.0):
    numeric = flow_at(er, constant(0.0), t).values[0, 0]
    exact = 1 - math.exp(-2 * t)
    print(f"{t:6.2f} {numeric:16.12f} {exact:16.12f} {abs(numeric - exact):10.2e}")

print()
print("triangle removal from the complete graphon")
print(f"{'t':>6} {'numeric':>16} {'closed form':>16} {'error':>10}")
for t in (0.1, 0.5, 1.0, 5.0, 20.0):
    numeric = flow_at(tr, constant(1.0), t).values[0, 0]
    exact = (1 + 12 * t) ** -0.5
    print(f"{t:6.2f} {numeric:16.12f} {exact:16.12f} {abs(numeric - exact):10.2e}")
