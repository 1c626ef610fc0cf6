"""Acceptance suite: one test per exit criterion.

Each test records a PASS/FAIL line that is printed in the terminal
summary (see ``conftest.py``).  Trial counts and tolerances are fixed
here and never tuned at run time.
"""

import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np

from perfprof.core import (
    compute_profile,
    compute_ratios,
    count_at,
    evaluate,
    l1_distance,
    log_transform,
    profile_from_ratios,
    profile_set,
    rescale_log,
    sup_distance,
)
from perfprof.core import Failure, FailureKind, Success
from perfprof.harness import HarnessConfig, ProblemInput, SolverCommand, run_benchmark
from perfprof.plotting import PlotSpec, auto_range
from support import (
    brute_count,
    brute_l1,
    brute_ratios,
    random_times,
    table_from_rows,
    tau_samples,
)

RESULTS = []
SEED = 20021


def record(name, ok, detail=""):
    RESULTS.append((name, bool(ok), detail))
    assert ok, f"{name}: {detail}"


def _rng(offset):
    return np.random.default_rng(SEED + offset)


def test_oracle_equivalence():
    rng = _rng(1)
    bad = 0
    checks = 0
    t0 = time.perf_counter()
    for _ in range(500):
        rows = random_times(rng)
        r = compute_ratios(table_from_rows(rows))
        expect = brute_ratios(rows, r.r_M)
        for j, s in enumerate(r.solvers):
            col = [row[j] for row in expect]
            prof = compute_profile(r, s)
            for tau in tau_samples(rng, col, r.r_M, k=100):
                checks += 1
                exact = Fraction(brute_count(col, tau), len(col))
                if count_at(prof, tau) != exact * len(col) or evaluate(prof, tau) != float(exact):
                    bad += 1
    elapsed = time.perf_counter() - t0
    record(
        "oracle equivalence (500 tables, exact)",
        bad == 0 and elapsed < 10.0,
        f"{checks} evaluations, {bad} mismatches, {elapsed:.2f}s (limit 10s)",
    )


def test_theorem_l1_bound():
    rng = _rng(2)
    worst = -math.inf
    violations = 0
    oracle_gap = 0.0
    for trial in range(1000):
        n_p = int(rng.integers(1, 51))
        eps = float(rng.uniform(0.0, 2.0))
        r = rng.uniform(1.0, 20.0, size=n_p)
        rh = np.maximum(1.0, r + rng.uniform(-eps, eps, size=n_p))
        assert np.all(np.abs(r - rh) <= eps)
        pa = profile_from_ratios(r, r_M=100.0)
        pb = profile_from_ratios(rh, r_M=100.0)
        upper = 100.0
        d = l1_distance(pa, pb, upper)
        if trial < 200:
            oracle_gap = max(oracle_gap, abs(d - float(brute_l1(list(r), list(rh), upper))))
        worst = max(worst, d - eps)
        if d > eps + 1e-12:
            violations += 1
    record(
        "L1 perturbation bound (1000 trials)",
        violations == 0 and oracle_gap <= 1e-12,
        f"{violations} violations, max(l1 - eps) = {worst:.3e}, oracle gap {oracle_gap:.1e}",
    )


def test_single_problem_insensitivity():
    rng = _rng(3)
    violations = 0
    for _ in range(500):
        rows = random_times(rng)
        n_p, n_s = len(rows), len(rows[0])
        q = int(rng.integers(0, n_p))
        new_rows = [list(row) for row in rows]
        new_rows[q] = random_times(rng, n_p=1, n_s=n_s, fail_rate=0.25)[0]
        rm = max(compute_ratios(table_from_rows(rows)).r_M, compute_ratios(table_from_rows(new_rows)).r_M)
        old = compute_ratios(table_from_rows(rows), rm=rm)
        new = compute_ratios(table_from_rows(new_rows), rm=rm)
        for s in old.solvers:
            a, b = compute_profile(old, s), compute_profile(new, s)
            if sup_distance(a, b) > 1 / n_p + 1e-12:
                violations += 1
            rq, rhq = old.column(s)[q], new.column(s)[q]
            lo, hi = min(rq, rhq), max(rq, rhq)
            taus = tau_samples(rng, list(old.column(s)) + list(new.column(s)), rm, k=50)
            for tau in taus:
                if (tau < lo or tau >= hi) and count_at(a, tau) != count_at(b, tau):
                    violations += 1
    record("single-problem insensitivity (500 perturbations)", violations == 0, f"{violations} violations")


def test_rm_invariance():
    rng = _rng(4)
    violations = 0
    for _ in range(200):
        rows = random_times(rng)
        base = compute_ratios(table_from_rows(rows))
        top = base.max_finite()
        rm1 = top * float(rng.uniform(1.01, 3.0))
        rm2 = rm1 * float(rng.uniform(1.01, 10.0))
        a_set = compute_ratios(table_from_rows(rows), rm=rm1)
        b_set = compute_ratios(table_from_rows(rows), rm=rm2)
        grid = np.linspace(0.0, rm1, 100, endpoint=False)
        for s in base.solvers:
            a, b = compute_profile(a_set, s), compute_profile(b_set, s)
            if any(count_at(a, t) != count_at(b, t) for t in grid):
                violations += 1
            if [t for t in a.taus if t < rm1] != [t for t in b.taus if t < rm1]:
                violations += 1
            if evaluate(a, rm1) != 1.0 or evaluate(b, rm2) != 1.0:
                violations += 1
    record("r_M invariance (200 tables)", violations == 0, f"{violations} violations")


def test_structural_invariants():
    rng = _rng(5)
    counts = dict.fromkeys(
        ["monotone", "right-continuous", "k/n_p", "rho(r_M)=1", "scaling", "permutation"], 0
    )
    for _ in range(300):
        rows = random_times(rng)
        r = compute_ratios(table_from_rows(rows))
        ps = profile_set(r)
        for p in ps:
            taus = sorted(tau_samples(rng, list(r.column(p.solver)), r.r_M, k=50))
            vals = [evaluate(p, t) for t in taus]
            if any(b < a for a, b in zip(vals, vals[1:])):
                counts["monotone"] += 1
            for t in p.taus:
                if evaluate(p, t) != evaluate(p, np.nextafter(t, np.inf)):
                    counts["right-continuous"] += 1
            for t in taus:
                k = count_at(p, t)
                if not (0 <= k <= p.n_p and evaluate(p, t) == k / p.n_p):
                    counts["k/n_p"] += 1
            if evaluate(p, p.r_M) != 1.0:
                counts["rho(r_M)=1"] += 1

        # scaling by a power of two is exact in floating point
        c = 2.0 ** int(rng.integers(-30, 31))
        scaled = compute_ratios(table_from_rows([[None if v is None else v * c for v in row] for row in rows]))
        if not (np.array_equal(scaled.ratios, r.ratios) and scaled.r_M == r.r_M):
            counts["scaling"] += 1
        # any other constant: ratios agree to rounding, profiles agree off the breakpoints
        c = float(rng.uniform(1e-3, 1e3))
        scaled = compute_ratios(table_from_rows([[None if v is None else v * c for v in row] for row in rows]))
        if not np.allclose(scaled.ratios, r.ratios, rtol=1e-12, atol=0):
            counts["scaling"] += 1
        for s in r.solvers:
            a, b = compute_profile(r, s), compute_profile(scaled, s)
            for t in rng.uniform(0.5, r.r_M, size=20):
                if all(abs(t - x) > 1e-9 * x for x in a.taus) and count_at(a, t) != count_at(b, t):
                    counts["scaling"] += 1

        perm = rng.permutation(len(rows))
        shuffled = profile_set(compute_ratios(table_from_rows([rows[i] for i in perm])))
        for a, b in zip(ps, shuffled):
            if (a.taus, a.counts, a.n_success, a.r_M) != (b.taus, b.counts, b.n_success, b.r_M):
                counts["permutation"] += 1
    record(
        "structural invariants (300 tables)",
        not any(counts.values()),
        ", ".join(f"{k}: {v}" for k, v in counts.items()),
    )


def test_log_scale_consistency():
    rng = _rng(6)
    bad = 0
    for _ in range(200):
        r = compute_ratios(table_from_rows(random_times(rng)))
        for p in profile_set(r):
            lp = rescale_log(p, 2)
            taus = list(np.exp(rng.uniform(0.0, math.log(r.r_M * 1.5), size=100))) + list(p.taus)
            for tau in taus:
                if evaluate(lp, log_transform(tau, 2)) != evaluate(p, tau):
                    bad += 1
    record("log2 rescale consistency (100 taus per profile)", bad == 0, f"{bad} mismatches")


def test_range_reproduction_1043():
    t = table_from_rows([[1.0, 1043.0], [3.0, 1.0], [1.0, None], [2.0, 2.0]])
    ps = profile_set(compute_ratios(t))
    lo, hi = auto_range(ps, PlotSpec(log_base=2))
    record("log2 auto range covers log2(1043)", lo == 0.0 and hi >= 10.03, f"range = ({lo}, {hi:.4f})")


def test_harness_end_to_end(stub_path):
    solvers = {
        "alpha": "p1=0.2/auto/0;p2=0.3/auto/0;p3=0.15/auto/0",
        "beta": "p1=0.4/auto/0;p2=0.15/auto/0;p3=2/auto/0",
        "gamma": "p1=0.2/auto/0;p2=0.5/auto/0;p3=0.3/0.05/0",
    }
    cfg = HarnessConfig(
        tuple(SolverCommand(n, f"sh {stub_path} '{spec}' {{problem}}") for n, spec in solvers.items()),
        tuple(ProblemInput(p, p) for p in ("p1", "p2", "p3")),
        timeout_seconds=1.0,
        max_rerun_cycles=2,
        reported_time_extractor=r"time: ([0-9.]+)",
    )
    t0 = time.perf_counter()
    records, table = run_benchmark(cfg)
    elapsed = time.perf_counter() - t0
    expected = [
        [Success(0.2), Success(0.4), Success(0.2)],
        [Success(0.3), Success(0.15), Success(0.5)],
        [Success(0.15), Failure(FailureKind.TIMEOUT), Success(0.05)],
    ]
    gamma3 = [r for r in records if (r.problem, r.solver) == ("p3", "gamma")]
    timeout = [r for r in records if (r.problem, r.solver) == ("p3", "beta")]
    others_once = all(
        len([r for r in records if (r.problem, r.solver) == (p, s)]) == 1
        for p in ("p1", "p2", "p3") for s in solvers if (p, s) != ("p3", "gamma")
    )
    ok = (
        [list(row) for row in table.cells] == expected
        and len(gamma3) == 3 and gamma3[-1].final and gamma3[-1].discrepant
        and len(timeout) == 1 and 1.0 <= timeout[0].wall_seconds <= 2.0
        and others_once
        and elapsed < 30.0
    )
    ps = profile_set(compute_ratios(table))
    ok = ok and ps["alpha"](1.0) == 1 / 3 and ps["beta"].success_probability == 2 / 3
    record(
        "harness end-to-end with stub solvers",
        ok,
        f"{len(records)} runs in {elapsed:.1f}s; p3/gamma attempts={len(gamma3)}, "
        f"p3/beta status={timeout[0].status if timeout else None}",
    )


FIXTURES = ["example_4x2.csv", "cops_like.csv", "timings.json"]


def _cli(*args):
    proc = subprocess.run([sys.executable, "-m", "perfprof.cli", *map(str, args)], capture_output=True)
    assert proc.returncode == 0, proc.stderr.decode()
    return proc.stdout


def test_determinism(data_dir, tmp_path):
    diffs = []
    for name in FIXTURES:
        src = data_dir / name
        for args in (
            ("compute", "--input", src),
            ("compute", "--input", src, "--format", "csv", "--scale", "log2"),
            ("plot", "--input", src, "--scale", "log2"),
            ("plot", "--input", src, "--format", "csv"),
        ):
            if _cli(*args) != _cli(*args):
                diffs.append(f"{name}: {' '.join(map(str, args[:1] + args[3:]))}")
    record("byte-identical compute/plot/export", not diffs, "; ".join(diffs) or "12 output pairs identical")


def test_cli_composition(data_dir, tmp_path):
    diffs = []
    for name in FIXTURES:
        prof = tmp_path / f"{name}.profile.json"
        prof.write_bytes(_cli("compute", "--input", data_dir / name))
        for scale in ("linear", "log2"):
            if _cli("plot", "--input", prof, "--scale", scale) != _cli("plot", "--input", data_dir / name, "--scale", scale):
                diffs.append(f"{name}/{scale}")
    record("compute -> plot equals direct plot", not diffs, ", ".join(diffs) or "3 tables x 2 scales identical")
