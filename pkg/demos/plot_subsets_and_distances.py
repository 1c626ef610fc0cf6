"""
Subsets of a test set and how far profiles move
===============================================

Restricting the problem set changes the best time on some problems, so
profiles have to be recomputed, not filtered.  The L1 and sup distances
quantify how much a profile moves between two analyses of the same
problems, for instance before and after re-timing.
"""

from pathlib import Path

import numpy as np

from perfprof import (
    SubsetSelector,
    compute_ratios,
    filter_problems,
    l1_distance,
    profile_from_ratios,
    profile_set,
    read_table,
    sup_distance,
    win_probability,
)

data = Path(__file__).resolve().parent.parent / "tests" / "data" / "cops_like.csv"
full = read_table(data)
control = filter_problems(full, SubsetSelector.parse("tag:control"))

for label, table in (("full set", full), ("control subset", control)):
    ps = profile_set(compute_ratios(table))
    wins = ", ".join(f"{p.solver}={win_probability(p):.2f}" for p in ps)
    print(f"{label:15s} n_p={ps.n_p:2d}  wins: {wins}")

###############################################################################
# Perturb every ratio of one solver by at most eps.  The area between the
# two profiles never exceeds eps, and changing a single problem moves the
# profile by at most 1/n_p at any tau.
rng = np.random.default_rng(0)
ratios = rng.uniform(1, 30, size=40)
eps = 0.75
perturbed = np.maximum(1.0, ratios + rng.uniform(-eps, eps, size=ratios.size))
a = profile_from_ratios(ratios, r_M=100.0)
b = profile_from_ratios(perturbed, r_M=100.0)
print(f"L1 distance {l1_distance(a, b):.4f} <= eps = {eps}")

single = ratios.copy()
single[7] = 25.0
c = profile_from_ratios(single, r_M=100.0)
print(f"sup distance {sup_distance(a, c):.4f} <= 1/n_p = {1 / ratios.size:.4f}")
