"""Independent oracles and random table generators shared by the tests.

The oracles work straight from the definitions (plain loops, exact
fractions) and never call into the code paths they check.
"""

from fractions import Fraction

import numpy as np

from perfprof.core import Failure, FailureKind, Success, TimingTable


def random_times(rng, n_p=None, n_s=None, fail_rate=0.10, lo=0.1, hi=100.0):
    n_p = n_p or int(rng.integers(1, 9))
    n_s = n_s or int(rng.integers(1, 5))
    rows = []
    for _ in range(n_p):
        row = []
        for _ in range(n_s):
            row.append(None if rng.random() < fail_rate else float(rng.uniform(lo, hi)))
        rows.append(row)
    return rows


def table_from_rows(rows, kind=FailureKind.ERROR):
    n_s = len(rows[0])
    cells = [[Failure(kind) if v is None else Success(v) for v in row] for row in rows]
    return TimingTable(
        tuple(f"p{i}" for i in range(len(rows))), tuple(f"s{j}" for j in range(n_s)), cells
    )


def brute_ratios(rows, r_M):
    """Ratios per the definition: time over the best successful time on the row."""
    out = []
    for row in rows:
        ok = [v for v in row if v is not None]
        best = min(ok) if ok else None
        out.append([r_M if (v is None or best is None) else v / best for v in row])
    return out


def brute_count(column, tau):
    return sum(1 for r in column if r <= tau)


def brute_value(column, tau):
    return Fraction(brute_count(column, tau), len(column))


def brute_l1(a, b, upper):
    """Exact integral over [1, upper] of |rho_a - rho_b| for two ratio lists."""
    n = len(a)
    pts = sorted({Fraction(1)} | {Fraction(x) for x in a + b if 1 <= x <= upper} | {Fraction(upper)})
    total = Fraction(0)
    for left, right in zip(pts, pts[1:]):
        ca = sum(1 for x in a if Fraction(x) <= left)
        cb = sum(1 for x in b if Fraction(x) <= left)
        total += Fraction(abs(ca - cb), n) * (right - left)
    return total


def brute_sup(a, b):
    n = len(a)
    pts = sorted(set(a) | set(b))
    return max(Fraction(abs(brute_count(a, t) - brute_count(b, t)), n) for t in pts)


def linear_quantile(sorted_values, q):
    """Quantile by linear interpolation between order statistics."""
    n = len(sorted_values)
    h = (n - 1) * q
    i = int(h)
    frac = h - i
    if i + 1 < n:
        return sorted_values[i] + frac * (sorted_values[i + 1] - sorted_values[i])
    return sorted_values[i]


def tau_samples(rng, column, r_M, k=100):
    """Random taus plus every exact ratio value and points around them."""
    taus = list(rng.uniform(0.5, r_M * 1.2, size=k))
    for r in column:
        taus += [r, np.nextafter(r, -np.inf), np.nextafter(r, np.inf)]
    return taus
