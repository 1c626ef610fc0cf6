"""
Performance ratios, performance profiles and the queries built on them.

A performance profile is the empirical distribution function of one
solver's performance ratios over a shared problem set.  Profiles are
stored as sorted breakpoints with *integer* cumulative counts, so every
value is exactly ``k / n_p`` and comparisons against brute-force counting
can be done without tolerances.
"""

from __future__ import annotations

import enum
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FailureKind",
    "Success",
    "Failure",
    "Measurement",
    "TimingTable",
    "RatioMatrix",
    "Profile",
    "ProfileSet",
    "QuartileSummary",
    "ProfileError",
    "compute_ratios",
    "auto_rm",
    "compute_profile",
    "profile_from_ratios",
    "profile_set",
    "evaluate",
    "count_at",
    "win_probability",
    "success_probability",
    "log_transform",
    "rescale_log",
    "l1_distance",
    "sup_distance",
    "quartiles",
]


class ProfileError(ValueError):
    """Raised when inputs violate the invariants of the profile model."""


class FailureKind(str, enum.Enum):
    TIMEOUT = "timeout"
    ERROR = "error"
    NONCONVERGED = "nonconverged"
    MISSING = "missing"


@dataclass(frozen=True)
class Success:
    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or v <= 0:
            raise ProfileError(f"measurement must be finite and > 0, got {self.value!r}")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Failure:
    kind: FailureKind = FailureKind.ERROR

    def __post_init__(self):
        object.__setattr__(self, "kind", FailureKind(self.kind))


Measurement = Success | Failure


@dataclass(frozen=True)
class TimingTable:
    """Metric values ``t[p, s]`` for every problem ``p`` and solver ``s``.

    ``cells[i][j]`` is the measurement of ``solvers[j]`` on ``problems[i]``.
    ``tags`` optionally holds one set of labels per problem.
    """

    problems: tuple[str, ...]
    solvers: tuple[str, ...]
    cells: tuple[tuple[Measurement, ...], ...]
    tags: tuple[frozenset[str], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "problems", tuple(str(p) for p in self.problems))
        object.__setattr__(self, "solvers", tuple(str(s) for s in self.solvers))
        object.__setattr__(self, "cells", tuple(tuple(row) for row in self.cells))
        if self.tags is not None:
            object.__setattr__(self, "tags", tuple(frozenset(t) for t in self.tags))
        _check_unique(self.problems, "problem")
        _check_unique(self.solvers, "solver")
        if len(self.cells) != len(self.problems):
            raise ProfileError(
                f"table has {len(self.cells)} rows for {len(self.problems)} problems"
            )
        for p, row in zip(self.problems, self.cells):
            if len(row) != len(self.solvers):
                raise ProfileError(
                    f"row {p!r} has {len(row)} cells for {len(self.solvers)} solvers"
                )
            for cell in row:
                if not isinstance(cell, (Success, Failure)):
                    raise ProfileError(f"row {p!r}: {cell!r} is not a Measurement")
        if self.tags is not None and len(self.tags) != len(self.problems):
            raise ProfileError("tags must have one entry per problem")

    @property
    def n_p(self) -> int:
        return len(self.problems)

    @property
    def n_s(self) -> int:
        return len(self.solvers)

    @classmethod
    def from_values(cls, problems, solvers, values, tags=None) -> "TimingTable":
        """Build a table from plain numbers; ``None`` or NaN marks a failure."""
        cells = []
        for row in values:
            out = []
            for v in row:
                if isinstance(v, (Success, Failure)):
                    out.append(v)
                elif v is None or (isinstance(v, float) and math.isnan(v)):
                    out.append(Failure(FailureKind.ERROR))
                else:
                    out.append(Success(v))
            cells.append(out)
        return cls(tuple(problems), tuple(solvers), cells, tags)

    def times(self) -> np.ndarray:
        """``(n_p, n_s)`` float array of values with failures as NaN."""
        out = np.full((self.n_p, self.n_s), np.nan)
        for i, row in enumerate(self.cells):
            for j, cell in enumerate(row):
                if isinstance(cell, Success):
                    out[i, j] = cell.value
        return out

    def cell(self, problem: str, solver: str) -> Measurement:
        return self.cells[self.problems.index(problem)][self.solvers.index(solver)]


def _check_unique(names: Sequence[str], what: str) -> None:
    seen = set()
    for n in names:
        if n in seen:
            raise ProfileError(f"duplicate {what} identifier {n!r}")
        seen.add(n)


@dataclass(frozen=True)
class RatioMatrix:
    problems: tuple[str, ...]
    solvers: tuple[str, ...]
    ratios: np.ndarray
    r_M: float

    def __post_init__(self):
        arr = np.array(self.ratios, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "ratios", arr)

    @property
    def n_p(self) -> int:
        return len(self.problems)

    def column(self, solver: str) -> np.ndarray:
        try:
            j = self.solvers.index(solver)
        except ValueError:
            raise KeyError(f"unknown solver {solver!r}") from None
        return self.ratios[:, j]

    def max_finite(self) -> float:
        """Largest ratio below ``r_M`` (1.0 if every cell failed)."""
        finite = self.ratios[self.ratios < self.r_M]
        return float(finite.max()) if finite.size else 1.0


def auto_rm(max_finite_ratio: float) -> float:
    """Default failure ratio: twice the largest genuine ratio, never below 2."""
    return max(2.0, 2.0 * float(max_finite_ratio))


def compute_ratios(table: TimingTable, rm: float | None = None) -> RatioMatrix:
    """Divide every time by the best time on its problem.

    Failures get ratio ``r_M``.  A problem on which every solver failed
    gets ``r_M`` for every solver.  With ``rm=None`` the value of ``r_M``
    is chosen by :func:`auto_rm`; an explicit ``rm`` must strictly exceed
    every finite ratio.
    """
    if table.n_p == 0 or table.n_s == 0:
        raise ProfileError("a profile needs at least one problem and one solver")
    t = table.times()
    ok = ~np.isnan(t)
    best = np.where(ok, t, np.inf).min(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        finite = np.where(ok, t / best, np.nan)
    # the best solver(s) must be exactly 1 regardless of rounding
    finite[ok & (t == best)] = 1.0

    max_finite = float(np.nanmax(finite)) if ok.any() else 1.0
    if rm is None:
        r_M = auto_rm(max_finite)
    else:
        r_M = float(rm)
        if not math.isfinite(r_M) or r_M <= max_finite:
            i, j = np.unravel_index(np.nanargmax(finite), finite.shape) if ok.any() else (0, 0)
            raise ProfileError(
                f"r_M={rm!r} does not exceed the largest finite ratio {max_finite!r} "
                f"(problem {table.problems[i]!r}, solver {table.solvers[j]!r})"
            )
    ratios = np.where(ok, finite, r_M)
    return RatioMatrix(table.problems, table.solvers, ratios, r_M)


@dataclass(frozen=True)
class Profile:
    """One solver's performance profile as a right-continuous staircase.

    ``taus`` are the distinct ratios in increasing order and ``counts[i]`` is
    the number of problems with ratio ``<= taus[i]``.  ``log_base`` is set
    when the taus live on a logarithmic axis (see :func:`rescale_log`).
    """

    solver: str
    n_p: int
    r_M: float
    taus: tuple[float, ...]
    counts: tuple[int, ...]
    n_success: int
    log_base: float | None = None

    def __post_init__(self):
        if self.n_p < 1:
            raise ProfileError("n_p must be positive")
        if len(self.taus) != len(self.counts):
            raise ProfileError("taus and counts differ in length")
        if any(b <= a for a, b in zip(self.taus, self.taus[1:])):
            raise ProfileError("breakpoints must be strictly increasing")
        if any(b < a for a, b in zip(self.counts, self.counts[1:])):
            raise ProfileError("profile counts must be nondecreasing")
        if self.counts and not 0 <= self.counts[-1] <= self.n_p:
            raise ProfileError("counts exceed n_p")

    @property
    def breakpoints(self) -> list[tuple[float, float]]:
        return [(t, c / self.n_p) for t, c in zip(self.taus, self.counts)]

    @property
    def success_probability(self) -> float:
        return self.n_success / self.n_p

    @property
    def finite_taus(self) -> tuple[float, ...]:
        """Breakpoints that correspond to solved problems (below ``r_M``)."""
        return tuple(t for t in self.taus if t < self.r_M)

    @property
    def origin(self) -> float:
        """Smallest possible ratio on this profile's axis."""
        return 0.0 if self.log_base else 1.0

    def __call__(self, tau: float) -> float:
        return evaluate(self, tau)


def profile_from_ratios(
    ratios: Iterable[float], r_M: float | None = None, solver: str = ""
) -> Profile:
    """Profile of a bare vector of ratios.

    Ratios equal to ``r_M`` count as failures.  When ``r_M`` is omitted,
    every ratio is treated as a success and ``r_M`` defaults to
    ``auto_rm(max(ratios))``.
    """
    r = np.asarray(list(ratios), dtype=float)
    if r.size == 0:
        raise ProfileError("cannot build a profile over zero problems")
    if np.any(~np.isfinite(r)) or np.any(r < 1.0):
        raise ProfileError("performance ratios must be finite and >= 1")
    if r_M is None:
        r_M = auto_rm(r.max())
    elif np.any(r > r_M):
        raise ProfileError("ratios may not exceed r_M")
    taus, per = np.unique(r, return_counts=True)
    counts = np.cumsum(per)
    return Profile(
        solver=str(solver),
        n_p=int(r.size),
        r_M=float(r_M),
        taus=tuple(float(t) for t in taus),
        counts=tuple(int(c) for c in counts),
        n_success=int(np.count_nonzero(r < r_M)),
    )


def compute_profile(ratios: RatioMatrix, solver: str) -> Profile:
    return profile_from_ratios(ratios.column(solver), r_M=ratios.r_M, solver=solver)


def count_at(profile: Profile, tau: float) -> int:
    """Number of problems whose ratio is ``<= tau``."""
    i = bisect_right(profile.taus, tau)
    return profile.counts[i - 1] if i else 0


def evaluate(profile: Profile, tau: float) -> float:
    return count_at(profile, tau) / profile.n_p


def win_probability(profile: Profile) -> float:
    """Fraction of problems where the solver matched the best time.

    Ties count for every tied solver.
    """
    return evaluate(profile, profile.origin)


def success_probability(profile: Profile) -> float:
    return profile.success_probability


def log_transform(x, base: float = 2.0):
    """``log_base(x)``; base 2 goes through ``log2`` so powers of two stay exact."""
    if base <= 1:
        raise ProfileError(f"log base must exceed 1, got {base!r}")
    if base == 2:
        return np.log2(x) if isinstance(x, np.ndarray) else math.log2(x)
    if isinstance(x, np.ndarray):
        return np.log(x) / math.log(base)
    return math.log(x) / math.log(base)


def rescale_log(profile: Profile, base: float = 2.0) -> Profile:
    """Move the profile onto a ``log_base`` axis; values are unchanged."""
    if not base > 1:
        raise ProfileError(f"log base must exceed 1, got {base!r}")
    if profile.log_base is not None:
        raise ProfileError("profile is already on a log axis")
    return Profile(
        solver=profile.solver,
        n_p=profile.n_p,
        r_M=log_transform(profile.r_M, base),
        taus=tuple(log_transform(t, base) for t in profile.taus),
        counts=profile.counts,
        n_success=profile.n_success,
        log_base=float(base),
    )


def _merged_taus(a: Profile, b: Profile) -> list[float]:
    if a.n_p != b.n_p:
        raise ProfileError(f"profiles cover different problem counts ({a.n_p} vs {b.n_p})")
    if a.log_base != b.log_base:
        raise ProfileError("profiles are on different axes")
    return sorted(set(a.taus) | set(b.taus))


def l1_distance(a: Profile, b: Profile, upper: float | None = None) -> float:
    """Exact integral of ``|rho_a - rho_b|`` from the axis origin to ``upper``.

    Both profiles are step functions, so the integral is a finite sum over
    the merged breakpoints.  ``upper`` defaults to the larger ``r_M``.
    """
    taus = _merged_taus(a, b)
    lo = a.origin
    if upper is None:
        upper = max(a.r_M, b.r_M)
    edges = [lo] + [t for t in taus if lo < t < upper] + [upper]
    pieces = []
    for left, right in zip(edges, edges[1:]):
        diff = abs(count_at(a, left) - count_at(b, left))
        if diff and right > left:
            pieces.append(diff * (right - left))
    return math.fsum(pieces) / a.n_p


def sup_distance(a: Profile, b: Profile) -> float:
    taus = _merged_taus(a, b)
    worst = max((abs(count_at(a, t) - count_at(b, t)) for t in taus), default=0)
    return worst / a.n_p


@dataclass(frozen=True)
class ProfileSet:
    profiles: tuple[Profile, ...]
    n_p: int
    r_M: float
    problems: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "profiles", tuple(self.profiles))
        for p in self.profiles:
            if p.n_p != self.n_p or p.r_M != self.r_M:
                raise ProfileError(
                    f"profile {p.solver!r} does not share n_p={self.n_p}, r_M={self.r_M}"
                )
        _check_unique(self.solvers, "solver")

    @property
    def solvers(self) -> tuple[str, ...]:
        return tuple(p.solver for p in self.profiles)

    @property
    def log_base(self) -> float | None:
        return self.profiles[0].log_base if self.profiles else None

    def __getitem__(self, solver: str) -> Profile:
        for p in self.profiles:
            if p.solver == solver:
                return p
        raise KeyError(f"unknown solver {solver!r}")

    def __iter__(self):
        return iter(self.profiles)

    def __len__(self):
        return len(self.profiles)

    def rescale_log(self, base: float = 2.0) -> "ProfileSet":
        profiles = tuple(rescale_log(p, base) for p in self.profiles)
        return ProfileSet(profiles, self.n_p, log_transform(self.r_M, base), self.problems)


def profile_set(ratios: RatioMatrix) -> ProfileSet:
    profiles = tuple(compute_profile(ratios, s) for s in ratios.solvers)
    return ProfileSet(profiles, ratios.n_p, ratios.r_M, ratios.problems)


@dataclass(frozen=True)
class QuartileSummary:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    failures: int
    n: int

    @property
    def empty(self) -> bool:
        return self.n == 0

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.min, self.q1, self.median, self.q3, self.max)


def quartiles(ratios: RatioMatrix, solver: str) -> QuartileSummary:
    """Five-number summary of the solver's finite ratios.

    Quantiles use linear interpolation between order statistics.  Failures
    are excluded and reported as a count; with no finite ratio at all the
    summary is empty and its numbers are NaN.
    """
    col = ratios.column(solver)
    finite = np.sort(col[col < ratios.r_M])
    failures = int(col.size - finite.size)
    if finite.size == 0:
        nan = float("nan")
        return QuartileSummary(nan, nan, nan, nan, nan, failures, 0)
    q = np.percentile(finite, [0, 25, 50, 75, 100], method="linear")
    return QuartileSummary(*(float(v) for v in q), failures=failures, n=int(finite.size))
