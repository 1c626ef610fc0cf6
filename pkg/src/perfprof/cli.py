"""Command-line front end: ``perfprof compute|plot|stats|run|compare``.

Errors are reported as a single line ``perfprof: error[<kind>]: <detail>``
on stderr with a nonzero exit status; usage errors exit with 2.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .core import (
    ProfileError,
    ProfileSet,
    compute_ratios,
    l1_distance,
    profile_set,
    quartiles,
    success_probability,
    sup_distance,
    win_probability,
)
from .harness import ConfigError, load_config, run_benchmark, write_records
from .ingest import IngestError, IngestPolicy, SubsetSelector, filter_problems, read_table, write_timing_csv
from .plotting import PlotSpec, export_steps, render_svg
from .profile_io import looks_like_profile_json, profile_set_from_json, profile_set_to_json


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_scale(text: str) -> float | None:
    if text == "linear":
        return None
    if text == "log2":
        return 2.0
    if text.startswith("log:"):
        try:
            base = float(text[4:])
        except ValueError:
            raise UsageError(f"bad log base in --scale {text!r}") from None
        if not base > 1:
            raise UsageError("--scale log base must exceed 1")
        return base
    raise UsageError(f"--scale must be linear, log2 or log:<base>, got {text!r}")


def _parse_range(text: str | None):
    if text is None:
        return None
    lo, sep, hi = text.partition(":")
    try:
        lo_v, hi_v = float(lo), float(hi)
    except ValueError:
        raise UsageError(f"--range must look like LO:HI, got {text!r}") from None
    if not sep or not lo_v < hi_v:
        raise UsageError(f"--range needs LO < HI, got {text!r}")
    return lo_v, hi_v


def _write_output(path: str | None, data: bytes) -> None:
    """Write atomically so a failed command never leaves a partial file."""
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _policy(args) -> IngestPolicy:
    policy = IngestPolicy()
    if getattr(args, "failure_token", None):
        policy = policy.with_failure_tokens(args.failure_token)
    return policy


def _load_table(args):
    table = read_table(args.input, _policy(args))
    if getattr(args, "subset", None):
        table = filter_problems(table, SubsetSelector.parse(args.subset))
    return table


def _load_profiles(path: str, args) -> ProfileSet:
    data = Path(path).read_bytes()
    if looks_like_profile_json(data):
        if getattr(args, "subset", None) or getattr(args, "rm", None) is not None:
            raise UsageError("--subset and --rm need a timing table, not a profile file")
        return profile_set_from_json(data)
    table = read_table(path, _policy(args))
    if getattr(args, "subset", None):
        table = filter_problems(table, SubsetSelector.parse(args.subset))
    return profile_set(compute_ratios(table, getattr(args, "rm", None)))


def _spec(args) -> PlotSpec:
    kw = {"log_base": _parse_scale(args.scale), "tau_range": _parse_range(args.range)}
    if getattr(args, "title", None) is not None:
        kw["title"] = args.title
    return PlotSpec(**kw)


def cmd_compute(args) -> int:
    fmt = args.format or "json"
    if fmt not in ("json", "csv"):
        raise UsageError("compute writes --format json or csv")
    spec = _spec(args)
    table = _load_table(args)
    ps = profile_set(compute_ratios(table, args.rm))
    main = profile_set_to_json(ps) if fmt == "json" else export_steps(ps, spec)
    steps = export_steps(ps, spec) if args.steps else None
    _write_output(args.output, main)
    if steps is not None:
        _write_output(args.steps, steps)
    return 0


def cmd_plot(args) -> int:
    fmt = args.format or "svg"
    if fmt not in ("svg", "csv"):
        raise UsageError("plot writes --format svg or csv")
    spec = _spec(args)
    ps = _load_profiles(args.input, args)
    data = render_svg(ps, spec) if fmt == "svg" else export_steps(ps, spec)
    _write_output(args.output, data)
    return 0


def _styled() -> bool:
    return sys.stdout.isatty() and not os.environ.get("PERF_PROFILE_NO_COLOR")


def _num(v: float) -> str:
    return "-" if math.isnan(v) else f"{v:.4g}"


def cmd_stats(args) -> int:
    fmt = args.format or "text"
    if fmt not in ("text", "json", "csv"):
        raise UsageError("stats writes --format text, json or csv")
    table = _load_table(args)
    ratios = compute_ratios(table, args.rm)
    ps = profile_set(ratios)
    rows = []
    for prof in ps:
        q = quartiles(ratios, prof.solver)
        rows.append(
            {
                "solver": prof.solver,
                "win_probability": win_probability(prof),
                "success_probability": success_probability(prof),
                "min": q.min,
                "q1": q.q1,
                "median": q.median,
                "q3": q.q3,
                "max": q.max,
                "failures": q.failures,
            }
        )
    if fmt == "json":
        doc = {
            "n_p": ps.n_p,
            "r_M": ps.r_M,
            "solvers": [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in r.items()} for r in rows],
        }
        _write_output(args.output, (json.dumps(doc, indent=2) + "\n").encode())
        return 0
    cols = ["solver", "win_probability", "success_probability", "min", "q1", "median", "q3", "max", "failures"]
    if fmt == "csv":
        lines = [",".join(cols)]
        lines += [",".join(str(r[c]) if c in ("solver", "failures") else repr(r[c]) for c in cols) for r in rows]
        _write_output(args.output, ("\n".join(lines) + "\n").encode())
        return 0
    head = ["solver", "rho(1)", "rho*", "min", "q1", "median", "q3", "max", "fail"]
    body = [
        [r["solver"], _num(r["win_probability"]), _num(r["success_probability"]),
         _num(r["min"]), _num(r["q1"]), _num(r["median"]), _num(r["q3"]), _num(r["max"]),
         str(r["failures"])]
        for r in rows
    ]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    fmt_row = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    header = fmt_row(head)
    styled = args.output in (None, "-") and _styled()
    if styled:
        header = f"\033[1m{header}\033[0m"
    out = [f"problems: {ps.n_p}  solvers: {len(ps)}  r_M: {ps.r_M!r}", header]
    out += [fmt_row(b) for b in body]
    _write_output(args.output, ("\n".join(out) + "\n").encode())
    return 0


def cmd_run(args) -> int:
    config = load_config(args.config)
    records, table = run_benchmark(config)
    if args.records:
        buf = io.StringIO()
        write_records(records, buf)
        _write_output(args.records, buf.getvalue().encode())
    _write_output(args.output, write_timing_csv(table))
    return 0


def cmd_compare(args) -> int:
    a = _load_profiles(args.inputs[0], args)
    b = _load_profiles(args.inputs[1], args)
    if a.n_p != b.n_p:
        raise ProfileError(f"profile sets cover different problem counts ({a.n_p} vs {b.n_p})")
    common = [s for s in a.solvers if s in b.solvers]
    if not common:
        raise ProfileError("the two profile sets share no solver")
    rows = []
    for s in common:
        pa, pb = a[s], b[s]
        upper = max(pa.r_M, pb.r_M)
        rows.append({"solver": s, "l1": l1_distance(pa, pb, upper), "sup": sup_distance(pa, pb)})
    if (args.format or "text") == "json":
        _write_output(args.output, (json.dumps({"solvers": rows}, indent=2) + "\n").encode())
    else:
        lines = ["solver,l1_distance,sup_distance"]
        lines += [f"{r['solver']},{r['l1']!r},{r['sup']!r}" for r in rows]
        _write_output(args.output, ("\n".join(lines) + "\n").encode())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="perfprof", description="Performance profiles for solver benchmarks.")
    parser.add_argument("--version", action="version", version=f"perfprof {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def table_opts(p, need_input=True):
        if need_input:
            p.add_argument("--input", required=True, metavar="PATH")
        p.add_argument("--output", metavar="PATH")
        p.add_argument("--rm", type=float, metavar="VALUE", help="explicit r_M")
        p.add_argument("--subset", metavar="SELECTOR", help="prefix:X, glob:X, tag:X or ids:a,b")
        p.add_argument("--failure-token", action="append", metavar="TOK", default=[])

    def plot_opts(p):
        p.add_argument("--scale", default="linear", help="linear, log2 or log:<base>")
        p.add_argument("--range", metavar="LO:HI")
        p.add_argument("--format", choices=("svg", "csv", "json", "text"))

    p = sub.add_parser("compute", help="timing table -> profile JSON / step CSV")
    table_opts(p)
    plot_opts(p)
    p.add_argument("--steps", metavar="PATH", help="also write the step CSV here")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("plot", help="timing table or profile JSON -> SVG")
    table_opts(p)
    plot_opts(p)
    p.add_argument("--title")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("stats", help="win/success probabilities and ratio quartiles")
    table_opts(p)
    p.add_argument("--format", choices=("text", "json", "csv"))
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("run", help="run the timing harness")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--output", metavar="PATH", help="timing table CSV")
    p.add_argument("--records", metavar="PATH", help="run log (JSON lines)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="L1 and sup distances between two profile sets")
    p.add_argument("inputs", nargs=2, metavar="PROFILE")
    p.add_argument("--output", metavar="PATH")
    p.add_argument("--failure-token", action="append", metavar="TOK", default=[])
    p.add_argument("--format", choices=("text", "json"))
    p.set_defaults(func=cmd_compare)
    return parser


def _fail(kind: str, detail) -> None:
    msg = " ".join(str(detail).split())
    print(f"perfprof: error[{kind}]: {msg}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _fail("usage", exc)
        return 2
    except FileNotFoundError as exc:
        _fail("io", f"{exc.filename}: no such file")
        return 1
    except OSError as exc:
        _fail("io", exc)
        return 1
    except IngestError as exc:
        _fail("ingest", exc)
        return 1
    except ConfigError as exc:
        _fail("config", exc)
        return 1
    except (ProfileError, ValueError, KeyError) as exc:
        _fail("invalid", exc.args[0] if isinstance(exc, KeyError) else exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
