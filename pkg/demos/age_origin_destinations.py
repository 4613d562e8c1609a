"""Running trajectories backward and forward to their ends.

Backward: how long has a graphon been evolving?  The edge-filling flow
started from the empty graphon reaches density 1 - e^(-2) at time 1, so
running that state backward must exit the graphon space exactly one
time unit earlier, at the empty graphon (its origin).

Forward: where do trajectories settle?  Destinations are always fixed
points; ignorant rules land on the constant graphon of their average
replacement density, and edge-shuffling (stirring) rules flatten any
block structure while preserving the edge density.
"""

import math

import numpy as np

from flipflow import (
    backward_age,
    constant,
    constant_fixed_points,
    erdos_renyi_rule,
    extremist_rule,
    find_destination,
    ignorant_rule,
    stirring_rule,
    triangle_removal_rule,
    two_block,
)

er = erdos_renyi_rule()

state = constant(1 - math.exp(-2))
res = backward_age(er, state)
print(f"age of density-{state.values[0, 0]:.4f} under edge filling: {res.age:.6f}")
print(f"origin value: {res.origin.values[0, 0]:.2e} (the empty graphon)\n")

print("destinations")
dest = find_destination(er, constant(0.1))
print(f"  edge filling from 0.1      -> constant {dest.graphon.values[0, 0]:.6f}")
uniform = ignorant_rule(3, np.full(8, 1 / 8))
dest = find_destination(uniform, two_block((0.5, 0.5), 0.9, 0.1, 0.3))
print(f"  uniform ignorant rule      -> constant {dest.graphon.values[0, 0]:.6f}")
w0 = two_block((0.5, 0.5), 0.9, 0.1, 0.4)
dest = find_destination(stirring_rule(3, "firm"), w0)
print(
    f"  firm stirring from 2 blocks -> constant {dest.graphon.values[0, 0]:.6f}"
    f" (initial density {w0.edge_density():.4f})\n"
)

print("constant fixed points (roots of the density velocity polynomial)")
for name, rule in (
    ("edge filling", er),
    ("triangle removal", triangle_removal_rule()),
    ("extremist k=4", extremist_rule(4)),
):
    roots = constant_fixed_points(rule)
    print(f"  {name:18s} {[round(r, 6) for r in roots]}")
