"""The discrete process shadows its graphon trajectory.

Runs the triangle-removal flip process on n = 800 vertices for n^2
steps (one unit of rescaled time) and compares block averages with the
integrated trajectory at ten checkpoints.  The cut-norm distance on the
coarse parts stays small for every seed, which is the whole point of
the limit theory: one deterministic curve predicts the random process.
"""

import os

from flipflow import constant, transference_experiment, triangle_removal_rule, write_transference_csv

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

rule = triangle_removal_rule()
for seed in (1, 2, 3):
    report = transference_experiment(
        rule, constant(1.0), n=800, t_end=1.0, checkpoint_count=10, seed=seed
    )
    path = os.path.join(OUT, f"transference_tr_seed{seed}.csv")
    write_transference_csv(report, path)
    print(f"seed {seed}: max coarse cut distance {report.max_cut_dist():.4f}")
    if seed == 1:
        print(f"{'t':>5} {'sim density':>12} {'trajectory':>12} {'cut dist':>9}")
        for t, cut, _l1, sim_d, traj_d in report.rows():
            print(f"{t:5.1f} {sim_d:12.4f} {traj_d:12.4f} {cut:9.4f}")
