"""Reading and writing timing tables, failure tokens, subsets and merges."""

from __future__ import annotations

import csv
import fnmatch
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .core import Failure, FailureKind, Success, TimingTable

__all__ = [
    "IngestError",
    "IngestPolicy",
    "SubsetSelector",
    "parse_timing_csv",
    "parse_timing_json",
    "read_table",
    "write_timing_csv",
    "write_timing_json",
    "filter_problems",
    "merge_tables",
]

DEFAULT_FAILURE_TOKENS = {
    "fail": FailureKind.ERROR,
    "timeout": FailureKind.TIMEOUT,
    "inf": FailureKind.ERROR,
    "": FailureKind.MISSING,
}
DEFAULT_NONCONVERGED_TOKENS = frozenset({"nc", "near"})

# tokens emitted by the canonical writers
CANONICAL_TOKENS = {
    FailureKind.ERROR: "fail",
    FailureKind.TIMEOUT: "timeout",
    FailureKind.NONCONVERGED: "nc",
    FailureKind.MISSING: "",
}


class IngestError(ValueError):
    """Malformed benchmark input.  ``row`` and ``column`` are 1-based when known."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass(frozen=True)
class IngestPolicy:
    """How non-numeric and non-positive cells become failures.

    ``failure_tokens`` maps a lower-case token to the failure kind it
    records.  Token matching ignores case and surrounding whitespace.
    """

    failure_tokens: Mapping[str, FailureKind] = field(
        default_factory=lambda: dict(DEFAULT_FAILURE_TOKENS)
    )
    treat_nonpositive_as_failure: bool = True
    nonconverged_tokens: frozenset[str] = DEFAULT_NONCONVERGED_TOKENS

    def __post_init__(self):
        ft = {str(k).strip().lower(): FailureKind(v) for k, v in self.failure_tokens.items()}
        nc = frozenset(str(t).strip().lower() for t in self.nonconverged_tokens)
        overlap = set(ft) & nc
        if overlap:
            raise ValueError(f"tokens listed as both failure and nonconverged: {sorted(overlap)}")
        object.__setattr__(self, "failure_tokens", ft)
        object.__setattr__(self, "nonconverged_tokens", nc)

    def with_failure_tokens(self, tokens: Iterable[str]) -> "IngestPolicy":
        ft = dict(self.failure_tokens)
        for t in tokens:
            ft.setdefault(t.strip().lower(), FailureKind.ERROR)
        return IngestPolicy(ft, self.treat_nonpositive_as_failure, self.nonconverged_tokens)

    def classify(self, raw, row=None, column=None):
        """Turn one raw cell (string, number or None) into a Measurement."""
        if raw is None:
            return Failure(FailureKind.MISSING)
        if isinstance(raw, bool):
            raise IngestError(f"boolean {raw!r} is not a measurement", row, column)
        if isinstance(raw, (int, float)):
            value = float(raw)
        else:
            token = str(raw).strip().lower()
            if token in self.failure_tokens:
                return Failure(self.failure_tokens[token])
            if token in self.nonconverged_tokens:
                return Failure(FailureKind.NONCONVERGED)
            try:
                value = float(token)
            except ValueError:
                raise IngestError(f"cannot parse {raw!r} as a number or failure token", row, column) from None
        if not math.isfinite(value):
            raise IngestError(f"non-finite value {raw!r}", row, column)
        if value <= 0:
            if self.treat_nonpositive_as_failure:
                return Failure(FailureKind.ERROR)
            raise IngestError(f"non-positive value {raw!r}", row, column)
        return Success(value)


def _split_tags(text: str) -> frozenset[str]:
    return frozenset(t for t in text.replace(";", " ").split() if t)


def _check_header(names, what, row):
    seen = set()
    for col, name in enumerate(names, start=2):
        if not name:
            raise IngestError(f"empty {what} name", row, col)
        if name in seen:
            raise IngestError(f"duplicate {what} {name!r}", row, col)
        seen.add(name)


def parse_timing_csv(data: bytes | str, policy: IngestPolicy | None = None) -> TimingTable:
    """Parse ``problem,<solver>...[,tags]`` CSV into a :class:`TimingTable`.

    Lines starting with ``#`` are comments.  Numbers use a dot decimal
    separator whatever the process locale.
    """
    policy = policy or IngestPolicy()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise IngestError(f"input is not UTF-8: {exc}") from None
    elif data.startswith("﻿"):
        data = data[1:]

    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(data)), start=1):
        if not row or (row[0].lstrip().startswith("#")):
            continue
        if len(row) == 1 and not row[0].strip():
            continue
        rows.append((lineno, [c.strip() for c in row]))
    if not rows:
        raise IngestError("no header row")

    header_line, header = rows[0]
    has_tags = len(header) > 1 and header[-1].lower() == "tags"
    solvers = header[1:-1] if has_tags else header[1:]
    _check_header(solvers, "solver", header_line)
    width = len(header)

    problems, cells, tags = [], [], []
    seen = {}
    for lineno, row in rows[1:]:
        if len(row) != width:
            raise IngestError(f"expected {width} fields, found {len(row)}", lineno)
        pid = row[0]
        if not pid:
            raise IngestError("empty problem identifier", lineno, 1)
        if pid in seen:
            raise IngestError(f"duplicate problem {pid!r} (first at row {seen[pid]})", lineno, 1)
        seen[pid] = lineno
        problems.append(pid)
        values = row[1:-1] if has_tags else row[1:]
        cells.append(
            [policy.classify(v, lineno, col) for col, v in enumerate(values, start=2)]
        )
        if has_tags:
            tags.append(_split_tags(row[-1]))
    return TimingTable(tuple(problems), tuple(solvers), cells, tuple(tags) if has_tags else None)


def parse_timing_json(data: bytes | str, policy: IngestPolicy | None = None) -> TimingTable:
    """Parse ``{"solvers": [...], "problems": [...], "times": [[...]]}``.

    ``null`` marks a missing result; strings go through the failure tokens.
    """
    policy = policy or IngestPolicy()
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise IngestError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise IngestError("top level must be an object")
    try:
        solvers = [str(s) for s in doc["solvers"]]
        problems = [str(p) for p in doc["problems"]]
        times = doc["times"]
    except KeyError as exc:
        raise IngestError(f"missing key {exc.args[0]!r}") from None
    _check_header(solvers, "solver", 0)
    if len(times) != len(problems):
        raise IngestError(f"{len(times)} rows of times for {len(problems)} problems")
    seen = set()
    cells = []
    for i, (pid, row) in enumerate(zip(problems, times), start=1):
        if pid in seen:
            raise IngestError(f"duplicate problem {pid!r}", i)
        seen.add(pid)
        if not isinstance(row, list) or len(row) != len(solvers):
            raise IngestError(f"expected {len(solvers)} values", i)
        cells.append([policy.classify(v, i, j) for j, v in enumerate(row, start=1)])
    tags = doc.get("tags")
    if tags is not None:
        if len(tags) != len(problems):
            raise IngestError("tags must have one entry per problem")
        tags = tuple(_split_tags(str(t)) for t in tags)
    return TimingTable(tuple(problems), tuple(solvers), cells, tags)


def read_table(path, policy: IngestPolicy | None = None) -> TimingTable:
    """Read a CSV or JSON timing file, choosing the parser by content."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data.lstrip()[:1] == b"{":
        return parse_timing_json(data, policy)
    return parse_timing_csv(data, policy)


def _format_cell(cell) -> str:
    if isinstance(cell, Success):
        return repr(cell.value)
    return CANONICAL_TOKENS[cell.kind]


def write_timing_csv(table: TimingTable) -> bytes:
    """Canonical CSV form; parsing it back yields an equal table."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["problem", *table.solvers]
    if table.tags is not None:
        header.append("tags")
    w.writerow(header)
    for i, (p, row) in enumerate(zip(table.problems, table.cells)):
        out = [p, *(_format_cell(c) for c in row)]
        if table.tags is not None:
            out.append(";".join(sorted(table.tags[i])))
        w.writerow(out)
    return buf.getvalue().encode("utf-8")


def write_timing_json(table: TimingTable) -> bytes:
    times = [
        [c.value if isinstance(c, Success) else (CANONICAL_TOKENS[c.kind] or None) for c in row]
        for row in table.cells
    ]
    doc = {"solvers": list(table.solvers), "problems": list(table.problems), "times": times}
    if table.tags is not None:
        doc["tags"] = [";".join(sorted(t)) for t in table.tags]
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


@dataclass(frozen=True)
class SubsetSelector:
    """Choose problems by explicit ids, prefix, glob pattern or tag.

    ``kind`` is one of ``"ids"``, ``"prefix"``, ``"glob"``, ``"tag"``.
    """

    kind: str
    value: str | tuple[str, ...]

    def __post_init__(self):
        if self.kind not in ("ids", "prefix", "glob", "tag"):
            raise ValueError(f"unknown selector kind {self.kind!r}")
        if self.kind == "ids" and isinstance(self.value, str):
            object.__setattr__(self, "value", (self.value,))
        elif self.kind == "ids":
            object.__setattr__(self, "value", tuple(self.value))

    @classmethod
    def parse(cls, text: str) -> "SubsetSelector":
        """``prefix:X``, ``glob:X``, ``tag:X``, ``ids:a,b``; bare text is a glob
        when it has wildcard characters and an id list otherwise."""
        kind, sep, rest = text.partition(":")
        if sep and kind in ("prefix", "glob", "tag"):
            return cls(kind, rest)
        if sep and kind == "ids":
            text = rest
        elif any(ch in text for ch in "*?["):
            return cls("glob", text)
        return cls("ids", tuple(t.strip() for t in text.split(",") if t.strip()))

    def matches(self, problem: str, tags: frozenset[str] | None) -> bool:
        if self.kind == "ids":
            return problem in self.value
        if self.kind == "prefix":
            return problem.startswith(self.value)
        if self.kind == "glob":
            return fnmatch.fnmatchcase(problem, self.value)
        return tags is not None and self.value in tags


def filter_problems(table: TimingTable, selector: SubsetSelector) -> TimingTable:
    """Sub-table of the selected problems, in their original order."""
    if selector.kind == "tag" and table.tags is None:
        raise IngestError("tag selector used on a table without a tags column")
    if selector.kind == "ids":
        unknown = set(selector.value) - set(table.problems)
        if unknown:
            raise IngestError(f"unknown problems in selection: {sorted(unknown)}")
    keep = [
        i
        for i, p in enumerate(table.problems)
        if selector.matches(p, table.tags[i] if table.tags is not None else None)
    ]
    if not keep:
        raise IngestError(f"selector {selector.kind}:{selector.value} matches no problem")
    return TimingTable(
        tuple(table.problems[i] for i in keep),
        table.solvers,
        [table.cells[i] for i in keep],
        tuple(table.tags[i] for i in keep) if table.tags is not None else None,
    )


def _merge_tags(a: TimingTable, b: TimingTable, problems):
    if a.tags is None and b.tags is None:
        return None
    lookup = {}
    for t in (a, b):
        if t.tags is None:
            continue
        for p, tag in zip(t.problems, t.tags):
            if p in lookup and lookup[p] != tag:
                raise IngestError(f"conflicting tags for problem {p!r}")
            lookup[p] = tag
    return tuple(lookup.get(p, frozenset()) for p in problems)


def merge_tables(a: TimingTable, b: TimingTable) -> TimingTable:
    """Concatenate two tables along whichever axis they do not share.

    Either the problem lists are identical and the solvers disjoint, or the
    solver lists are identical and the problems disjoint.  A table with no
    solvers (or no problems) merges as the identity.
    """
    if b.n_s == 0 and (set(b.problems) <= set(a.problems)):
        return a
    if a.n_s == 0 and (set(a.problems) <= set(b.problems)):
        return b
    same_problems = a.problems == b.problems or (
        sorted(a.problems) == sorted(b.problems)
    )
    same_solvers = a.solvers == b.solvers or sorted(a.solvers) == sorted(b.solvers)
    if same_problems and not set(a.solvers) & set(b.solvers):
        order = [b.problems.index(p) for p in a.problems]
        cells = [tuple(a.cells[i]) + tuple(b.cells[k]) for i, k in enumerate(order)]
        return TimingTable(a.problems, a.solvers + b.solvers, cells, _merge_tags(a, b, a.problems))
    if same_solvers and not set(a.problems) & set(b.problems):
        order = [b.solvers.index(s) for s in a.solvers]
        cells = list(a.cells) + [tuple(row[k] for k in order) for row in b.cells]
        problems = a.problems + b.problems
        return TimingTable(problems, a.solvers, cells, _merge_tags(a, b, problems))
    if same_problems and same_solvers:
        raise IngestError("both tables report the same (problem, solver) cells; refusing to overwrite")
    raise IngestError(
        "tables must share problems with disjoint solvers, or share solvers with disjoint problems"
    )
