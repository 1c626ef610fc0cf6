"""
Collecting timings with the harness
===================================

The harness runs every solver on a problem before moving to the next
problem, kills runs that exceed the timeout, and re-runs any solve whose
self-reported time disagrees with the wall clock.  Here three tiny shell
"solvers" stand in for real ones.
"""

import logging
from pathlib import Path

from perfprof import compute_ratios, profile_set
from perfprof.harness import HarnessConfig, ProblemInput, SolverCommand, run_benchmark

logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
stub = Path(__file__).resolve().parent.parent / "tests" / "stubs" / "stub.sh"

###############################################################################
# Each stub gets a table of ``problem=sleep/reported/exit`` entries.  The
# slow solver hangs on p2, and the third one misreports its time on p1.
solvers = {
    "quick": "p1=0.1/auto/0;p2=0.2/auto/0",
    "slow": "p1=0.3/auto/0;p2=5/auto/0",
    "fibber": "p1=0.3/0.05/0;p2=0.15/auto/0",
}
config = HarnessConfig(
    solvers=tuple(SolverCommand(n, f"sh {stub} '{s}' {{problem}}") for n, s in solvers.items()),
    problems=(ProblemInput("p1", "p1"), ProblemInput("p2", "p2")),
    timeout_seconds=1.0,
    max_rerun_cycles=1,
    reported_time_extractor=r"time: ([0-9.]+)",
)
records, table = run_benchmark(config)

for r in records:
    flag = " (discrepant)" if r.discrepant else ""
    print(f"{r.problem}/{r.solver:7s} attempt {r.attempt}: {r.status:8s} wall={r.wall_seconds:.3f}{flag}")

for prof in profile_set(compute_ratios(table)):
    print(prof.solver, prof.breakpoints)
