"""
A first performance profile
===========================

Two solvers, four problems, one failure.  We compute performance ratios,
build each solver's profile and ask it the usual questions: how often
does the solver win, how often does it finish at all, and how often is
it within a factor ``tau`` of the best.
"""

from pathlib import Path

from perfprof import (
    TimingTable,
    compute_ratios,
    evaluate,
    export_steps,
    profile_set,
    quartiles,
    render_svg,
    success_probability,
    win_probability,
)

###############################################################################
# Times in seconds.  ``None`` marks a solve that did not finish.
table = TimingTable.from_values(
    problems=["p1", "p2", "p3", "p4"],
    solvers=["A", "B"],
    values=[(2, 4), (6, 2), (1, None), (10, 5)],
)

###############################################################################
# Ratios divide each time by the best time on that problem.  Failures get
# the sentinel ratio r_M, chosen automatically as twice the largest genuine
# ratio.
ratios = compute_ratios(table)
print("r_M =", ratios.r_M)
print(ratios.ratios)

###############################################################################
# The profile is a staircase: the fraction of problems solved within a
# factor tau of the best solver.
profiles = profile_set(ratios)
for prof in profiles:
    print(prof.solver, prof.breakpoints)
    print("  wins:", win_probability(prof), " solves:", success_probability(prof))
    print("  within 2.5x of best:", evaluate(prof, 2.5))
    q = quartiles(ratios, prof.solver)
    print("  quartiles:", q.as_tuple(), "failures:", q.failures)

###############################################################################
# The same information as a step table and as a figure.
print(export_steps(profiles).decode())
Path("first_profile.svg").write_bytes(render_svg(profiles))
print("wrote first_profile.svg")
