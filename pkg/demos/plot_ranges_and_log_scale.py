"""
Choosing the plot range and the log2 view
=========================================

A profile over a wide range of ratios rarely fits one linear plot.  We
draw the same four-solver benchmark on ``[0, 10]``, on ``[0, 100]`` and on
an automatically ranged log2 axis, which shows every solved problem and
the height at which each curve flatlines.
"""

from pathlib import Path

from perfprof import PlotSpec, auto_range, compute_ratios, profile_set, read_table, render_svg

data = Path(__file__).resolve().parent.parent / "tests" / "data" / "cops_like.csv"
table = read_table(data)
profiles = profile_set(compute_ratios(table))

###############################################################################
# Two fixed linear windows.
for hi in (10, 100):
    spec = PlotSpec(tau_range=(0, hi), title=f"Performance profile on [0, {hi}]")
    Path(f"profile_0_{hi}.svg").write_bytes(render_svg(profiles, spec))

###############################################################################
# On a log2 axis the automatic range runs from 0 to just past the largest
# solved ratio, so every flatline is visible.
log_spec = PlotSpec(log_base=2, title="Performance profile, log2 scale")
print("log2 range:", auto_range(profiles, log_spec))
Path("profile_log2.svg").write_bytes(render_svg(profiles, log_spec))

for prof in profiles:
    print(f"{prof.solver:10s} fails on {1 - prof.success_probability:.0%} of the problems")
