"""
Timing harness: run solver commands over a problem list and collect times.

Problems are visited in the outer loop and solvers in the inner loop, so
load fluctuations on the machine are spread across all solvers.  Each
run is killed (with its whole process group) once it reaches the
timeout.  When a solver reports its own time, runs where that time and
the wall clock disagree by more than ``discrepancy_fraction`` are queued
again for the next cycle.
"""

from __future__ import annotations

import json
import logging
import os
import re
import shlex
import shutil
import signal
import subprocess
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import yaml

from .core import Failure, FailureKind, Success, TimingTable

__all__ = [
    "ConfigError",
    "SolverCommand",
    "ProblemInput",
    "HarnessConfig",
    "RunRecord",
    "load_config",
    "run_benchmark",
    "run_once",
    "records_to_table",
    "rerun_set",
    "write_records",
    "read_records",
]

log = logging.getLogger(__name__)

STATUSES = ("success", "timeout", "nonzero-exit", "extractor-miss")
OUTPUT_CAP = 1 << 20


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SolverCommand:
    name: str
    command: str  # shell-style template; ``{problem}`` is replaced by the problem input


@dataclass(frozen=True)
class ProblemInput:
    id: str
    input: str


@dataclass(frozen=True)
class HarnessConfig:
    solvers: tuple[SolverCommand, ...]
    problems: tuple[ProblemInput, ...]
    timeout_seconds: float = 3600.0
    discrepancy_fraction: float = 0.10
    max_rerun_cycles: int = 3
    reported_time_extractor: str | None = None
    output_dir: str | None = None
    output_cap_bytes: int = OUTPUT_CAP
    parallel: int = 1

    def __post_init__(self):
        object.__setattr__(self, "solvers", tuple(self.solvers))
        object.__setattr__(self, "problems", tuple(self.problems))
        for what, names in (
            ("solver", [s.name for s in self.solvers]),
            ("problem", [p.id for p in self.problems]),
        ):
            if not names:
                raise ConfigError(f"no {what}s configured")
            if len(set(names)) != len(names):
                raise ConfigError(f"duplicate {what} names")
        if not self.timeout_seconds > 0:
            raise ConfigError("timeout_seconds must be positive")
        if not 0 < self.discrepancy_fraction < 1:
            raise ConfigError("discrepancy_fraction must lie in (0, 1)")
        if self.max_rerun_cycles < 1:
            raise ConfigError("max_rerun_cycles must be a positive integer")
        if self.parallel < 1:
            raise ConfigError("parallel must be >= 1")
        if self.reported_time_extractor is not None:
            try:
                pat = re.compile(self.reported_time_extractor)
            except re.error as exc:
                raise ConfigError(f"bad extractor pattern: {exc}") from None
            if pat.groups < 1:
                raise ConfigError("extractor pattern needs a capture group for the time")

    def argv(self, solver: SolverCommand, problem: ProblemInput) -> list[str]:
        return shlex.split(solver.command.replace("{problem}", shlex.quote(problem.input)))


def _config_from_dict(doc: dict, base_dir: Path | None = None) -> HarnessConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    try:
        solvers = doc["solvers"]
        problems = doc["problems"]
    except KeyError as exc:
        raise ConfigError(f"config is missing {exc.args[0]!r}") from None
    if isinstance(solvers, dict):
        solvers = [{"name": k, "command": v} for k, v in solvers.items()]
    sc = []
    for s in solvers:
        if not isinstance(s, dict) or "name" not in s or "command" not in s:
            raise ConfigError(f"solver entry needs name and command: {s!r}")
        sc.append(SolverCommand(str(s["name"]), str(s["command"])))
    pc = []
    for p in problems:
        if isinstance(p, str):
            pc.append(ProblemInput(p, p))
        elif isinstance(p, dict) and "id" in p:
            pc.append(ProblemInput(str(p["id"]), str(p.get("input", p["id"]))))
        else:
            raise ConfigError(f"problem entry needs an id: {p!r}")
    known = {
        "timeout_seconds", "discrepancy_fraction", "max_rerun_cycles",
        "reported_time_extractor", "output_dir", "output_cap_bytes", "parallel",
    }
    extra = set(doc) - known - {"solvers", "problems"}
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    kw = {k: doc[k] for k in known if k in doc}
    if kw.get("output_dir") and base_dir is not None:
        kw["output_dir"] = str(base_dir / kw["output_dir"])
    return HarnessConfig(tuple(sc), tuple(pc), **kw)


def load_config(path) -> HarnessConfig:
    """Read a YAML (or JSON) harness configuration.

    Example::

        solvers:
          - name: fast
            command: ./solve --model {problem}
        problems: [a.nl, b.nl]
        timeout_seconds: 3600
        discrepancy_fraction: 0.1
        reported_time_extractor: 'solve time: ([0-9.]+)'
    """
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return _config_from_dict(doc, path.parent)


@dataclass
class RunRecord:
    problem: str
    solver: str
    attempt: int
    status: str
    wall_seconds: float
    reported_seconds: float | None = None
    output_path: str | None = None
    started: float = 0.0
    discrepant: bool = False
    final: bool = False
    returncode: int | None = None

    def discrepancy(self) -> float | None:
        """Relative gap between reported and wall time, if both exist."""
        if self.reported_seconds is None or self.status != "success" or self.wall_seconds <= 0:
            return None
        return abs(self.reported_seconds - self.wall_seconds) / self.wall_seconds


def _check_commands(config: HarnessConfig) -> None:
    for s in config.solvers:
        for p in config.problems:
            argv = config.argv(s, p)
            if not argv:
                raise ConfigError(f"solver {s.name!r} has an empty command")
            exe = argv[0]
            if os.sep in exe:
                if not (os.path.isfile(exe) and os.access(exe, os.X_OK)):
                    raise ConfigError(f"solver {s.name!r}: {exe!r} is not an executable file")
            elif shutil.which(exe) is None:
                raise ConfigError(f"solver {s.name!r}: command {exe!r} not found on PATH")


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        pass


def run_once(
    config: HarnessConfig, solver: SolverCommand, problem: ProblemInput, attempt: int = 1
) -> RunRecord:
    """Run a single solve and classify the outcome."""
    argv = config.argv(solver, problem)
    started = time.time()
    t0 = time.perf_counter()
    proc = subprocess.Popen(
        argv,
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        stdin=subprocess.DEVNULL,
        start_new_session=True,
    )
    try:
        out, _ = proc.communicate(timeout=config.timeout_seconds)
        wall = time.perf_counter() - t0
        timed_out = False
    except subprocess.TimeoutExpired:
        _kill_group(proc)
        out, _ = proc.communicate()
        wall = time.perf_counter() - t0
        timed_out = True
    finally:
        if proc.poll() is None:
            _kill_group(proc)
            proc.wait()

    text = out.decode("utf-8", errors="replace") if out else ""
    reported = None
    if timed_out:
        status = "timeout"
    elif proc.returncode != 0:
        status = "nonzero-exit"
    else:
        status = "success"
        if config.reported_time_extractor is not None:
            m = re.search(config.reported_time_extractor, text)
            try:
                reported = float(m.group(1)) if m else None
            except ValueError:
                reported = None
            if reported is None or reported <= 0:
                status = "extractor-miss"
                reported = None

    output_path = None
    if config.output_dir is not None:
        d = Path(config.output_dir)
        d.mkdir(parents=True, exist_ok=True)
        safe = re.sub(r"[^A-Za-z0-9._-]", "_", f"{problem.id}__{solver.name}__{attempt}")
        output_path = str(d / f"{safe}.log")
        data = out or b""
        if len(data) > config.output_cap_bytes:
            data = data[: config.output_cap_bytes] + b"\n[output truncated]\n"
        Path(output_path).write_bytes(data)

    return RunRecord(
        problem=problem.id,
        solver=solver.name,
        attempt=attempt,
        status=status,
        wall_seconds=wall,
        reported_seconds=reported,
        output_path=output_path,
        started=started,
        returncode=proc.returncode,
    )


def rerun_set(records, fraction: float) -> list[tuple[str, str]]:
    """Pairs whose reported and wall times differ by more than ``fraction``."""
    out = []
    for r in records:
        gap = r.discrepancy()
        if gap is not None and gap > fraction:
            out.append((r.problem, r.solver))
    return out


def _run_cycle(config, pairs, attempts):
    solvers = {s.name: s for s in config.solvers}
    problems = {p.id: p for p in config.problems}
    jobs = [(problems[p], solvers[s], attempts[(p, s)]) for p, s in pairs]
    if config.parallel == 1:
        return [run_once(config, s, p, a) for p, s, a in jobs]
    with ThreadPoolExecutor(max_workers=config.parallel) as pool:
        futures = [pool.submit(run_once, config, s, p, a) for p, s, a in jobs]
        return [f.result() for f in futures]


def run_benchmark(config: HarnessConfig) -> tuple[list[RunRecord], TimingTable]:
    """Run every (problem, solver) pair and build the timing table.

    Pairs whose reported time disagrees with the wall clock are rerun in
    later cycles, at most ``max_rerun_cycles`` times.  A pair that is still
    discrepant afterwards keeps its last measurement with ``discrepant``
    set.  Returns all records in execution order plus the table.
    """
    _check_commands(config)
    if config.parallel > 1:
        warnings.warn(
            "parallel harness mode runs solvers concurrently; timings are no longer "
            "comparable across solvers",
            RuntimeWarning,
            stacklevel=2,
        )
    pairs = [(p.id, s.name) for p in config.problems for s in config.solvers]
    attempts = {pair: 1 for pair in pairs}
    latest: dict[tuple[str, str], RunRecord] = {}
    records: list[RunRecord] = []

    cycle = 0
    while pairs:
        batch = _run_cycle(config, pairs, attempts)
        records.extend(batch)
        for r in batch:
            latest[(r.problem, r.solver)] = r
        again = rerun_set(batch, config.discrepancy_fraction)
        for r in batch:
            r.discrepant = (r.problem, r.solver) in again
        if again:
            log.info("cycle %d: %d discrepant runs", cycle, len(again))
        if cycle >= config.max_rerun_cycles:
            break
        cycle += 1
        pairs = again
        for pair in pairs:
            attempts[pair] += 1

    for r in latest.values():
        r.final = True
        if r.discrepant:
            log.warning(
                "%s/%s still discrepant after %d attempts; keeping last measurement",
                r.problem, r.solver, r.attempt,
            )
    return records, records_to_table(records, config)


def _measurement(r: RunRecord, use_reported: bool):
    if r.status == "timeout":
        return Failure(FailureKind.TIMEOUT)
    if r.status != "success":
        return Failure(FailureKind.ERROR)
    value = r.reported_seconds if use_reported else r.wall_seconds
    if value is None or value <= 0:
        return Failure(FailureKind.ERROR)
    return Success(value)


def records_to_table(records, config: HarnessConfig) -> TimingTable:
    """Timing table from the final record of each pair.

    Uses the reported time when an extractor is configured, the wall time
    otherwise.  Pairs without a final record are missing.
    """
    use_reported = config.reported_time_extractor is not None
    finals: dict[tuple[str, str], RunRecord] = {}
    for r in records:
        if not r.final:
            continue
        key = (r.problem, r.solver)
        if key in finals:
            raise ValueError(f"more than one final record for {key}")
        finals[key] = r
    cells = []
    for p in config.problems:
        row = []
        for s in config.solvers:
            r = finals.get((p.id, s.name))
            row.append(Failure(FailureKind.MISSING) if r is None else _measurement(r, use_reported))
        cells.append(row)
    return TimingTable(
        tuple(p.id for p in config.problems), tuple(s.name for s in config.solvers), cells
    )


def write_records(records, fh) -> None:
    """One JSON object per line."""
    for r in records:
        fh.write(json.dumps(asdict(r), sort_keys=True) + "\n")


def read_records(fh) -> list[RunRecord]:
    return [RunRecord(**json.loads(line)) for line in fh if line.strip()]
