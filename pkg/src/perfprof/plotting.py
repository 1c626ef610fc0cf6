"""
Step-plot geometry, SVG rendering and step-table export for profile sets.

Nothing here draws the artificial jump to 1 at ``r_M``: a profile that
does not reach 1 stays flat at its success probability up to the right
edge of the plot.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .core import Profile, ProfileSet, count_at, rescale_log

__all__ = [
    "PlotSpec",
    "StepPolyline",
    "auto_range",
    "profile_to_polyline",
    "polyline_value",
    "render_svg",
    "export_steps",
    "nice_ticks",
]

# dash patterns cycle so curves stay distinct in grayscale
DASH_STYLES = ("none", "8,4", "2,3", "8,3,2,3", "12,4,2,4,2,4", "4,4")
GRAYS = ("#000000", "#444444", "#222222", "#666666", "#111111", "#555555")


@dataclass(frozen=True)
class PlotSpec:
    """Plot options.  ``log_base=None`` means a linear tau axis."""

    log_base: float | None = None
    tau_range: tuple[float, float] | None = None
    extend_fraction: float = 0.05
    include_flatline: bool = True
    title: str = "Performance profile"
    x_label: str | None = None
    y_label: str = "fraction of problems"
    width: int = 640
    height: int = 480

    def __post_init__(self):
        if self.log_base is not None and not self.log_base > 1:
            raise ValueError(f"log base must exceed 1, got {self.log_base!r}")
        if self.extend_fraction < 0:
            raise ValueError("extend_fraction must be >= 0")
        if self.tau_range is not None:
            lo, hi = self.tau_range
            if not lo < hi:
                raise ValueError(f"tau range needs lo < hi, got {self.tau_range!r}")
            if self.log_base is not None and lo < 0:
                raise ValueError("log-scale ranges start at 0 or above")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("width and height must be positive")

    @property
    def x_title(self) -> str:
        if self.x_label is not None:
            return self.x_label
        if self.log_base is None:
            return "tau"
        base = int(self.log_base) if float(self.log_base).is_integer() else self.log_base
        return f"log{base}(tau)"

    def transform(self, profiles: ProfileSet) -> ProfileSet:
        if self.log_base is None or profiles.log_base is not None:
            return profiles
        return profiles.rescale_log(self.log_base)


@dataclass(frozen=True)
class StepPolyline:
    solver: str
    vertices: tuple[tuple[float, float], ...]


def auto_range(profiles: ProfileSet, spec: PlotSpec | None = None) -> tuple[float, float]:
    """``(0, hi)`` with ``hi`` just past the largest solved-problem ratio.

    ``hi`` is measured in plot coordinates, so under a log scale it is the
    log of the largest finite ratio stretched by ``extend_fraction``.
    """
    spec = spec or PlotSpec()
    ps = spec.transform(profiles)
    finite = [t for p in ps for t in p.finite_taus]
    top = max(finite, default=ps.profiles[0].origin)
    if top <= 0:
        # every solved ratio is 1 on a log axis
        top = 1.0
    return 0.0, top * (1.0 + spec.extend_fraction)


def _plot_range(ps: ProfileSet, spec: PlotSpec) -> tuple[float, float]:
    if spec.tau_range is not None:
        return tuple(float(v) for v in spec.tau_range)
    return auto_range(ps, PlotSpec(extend_fraction=spec.extend_fraction))


def _canonical(vertices):
    out = []
    for v in vertices:
        if out and v == out[-1]:
            continue
        if len(out) >= 2:
            (x0, y0), (x1, y1) = out[-2], out[-1]
            if (x0 == x1 == v[0]) or (y0 == y1 == v[1]):
                out[-1] = v
                continue
        out.append(v)
    return tuple(out)


def _polyline(profile: Profile, lo: float, hi: float, flatline: bool) -> StepPolyline:
    y = count_at(profile, lo) / profile.n_p
    verts = [(lo, y)]
    last_x = lo
    for t, c in zip(profile.taus, profile.counts):
        if t <= lo or t >= profile.r_M:
            continue
        if t > hi:
            break
        ny = c / profile.n_p
        verts.append((t, y))
        verts.append((t, ny))
        y, last_x = ny, t
    if flatline:
        verts.append((hi, y))
    elif len(verts) == 1:
        verts.append((last_x, y))
    return StepPolyline(profile.solver, _canonical(verts))


def profile_to_polyline(
    profile: Profile, spec: PlotSpec | None = None, tau_range: tuple[float, float] | None = None
) -> StepPolyline:
    """Staircase vertices of ``profile`` in plot coordinates.

    The path starts at the left edge, rises at every breakpoint inside the
    range and, with ``include_flatline``, runs flat to the right edge.
    ``tau_range`` overrides the spec's range (used for shared ranges).
    """
    spec = spec or PlotSpec()
    if spec.log_base is not None and profile.log_base is None:
        profile = rescale_log(profile, spec.log_base)
    if tau_range is None:
        tau_range = spec.tau_range
    if tau_range is None:
        single = ProfileSet((profile,), profile.n_p, profile.r_M)
        tau_range = auto_range(single, PlotSpec(extend_fraction=spec.extend_fraction))
    lo, hi = tau_range
    return _polyline(profile, float(lo), float(hi), spec.include_flatline)


def polyline_value(line: StepPolyline, x: float) -> float:
    """Height of the staircase at ``x`` (upper end at a vertical step)."""
    y = 0.0
    for vx, vy in line.vertices:
        if vx > x:
            break
        y = vy
    return y


def _nice_step(span: float, target: int) -> float:
    raw = span / max(target, 1)
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if m * mag >= raw:
            return m * mag
    return 10 * mag


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick positions covering ``[lo, hi]``; the first tick is ``lo``
    whenever ``lo`` is a multiple of the step (always true for 0)."""
    step = _nice_step(hi - lo, target)
    start = math.ceil(lo / step - 1e-9)
    ticks = []
    k = start
    while k * step <= hi + step * 1e-9:
        ticks.append(round(k * step, 10))
        k += 1
    return ticks


def _fmt(v: float) -> str:
    s = f"{v:.4f}"
    if s == "-0.0000":
        s = "0.0000"
    return s


def _tick_label(v: float) -> str:
    s = f"{v:.6g}"
    return "0" if s == "-0" else s


def render_svg(profiles: ProfileSet, spec: PlotSpec | None = None) -> bytes:
    """Self-contained SVG 1.1 figure with axes, ticks, legend and one
    staircase per solver.  Output depends only on the inputs."""
    spec = spec or PlotSpec()
    ps = spec.transform(profiles)
    lo, hi = _plot_range(ps, spec)
    W, H = spec.width, spec.height
    left, right, top, bottom = 64.0, 24.0, 40.0, 56.0
    legend_h = 18.0 * len(ps) + 10.0
    pw = W - left - right
    ph = H - top - bottom

    def sx(x):
        return left + (x - lo) / (hi - lo) * pw

    def sy(y):
        return top + (1.0 - y) * ph

    out = []
    emit = out.append
    emit('<?xml version="1.0" encoding="UTF-8" standalone="no"?>')
    emit(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">'
    )
    emit(f"<title>{escape(spec.title)}</title>")
    emit(f'<rect x="0" y="0" width="{W}" height="{H}" fill="#ffffff"/>')
    emit(
        f'<text x="{_fmt(W / 2)}" y="{_fmt(top / 2 + 6)}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{escape(spec.title)}</text>'
    )

    emit('<g id="grid" stroke="#dddddd" stroke-width="0.5">')
    xticks = [t for t in nice_ticks(lo, hi) if lo - 1e-12 <= t <= hi + 1e-12]
    yticks = [i / 5 for i in range(6)]
    for t in xticks:
        emit(f'<line x1="{_fmt(sx(t))}" y1="{_fmt(sy(0))}" x2="{_fmt(sx(t))}" y2="{_fmt(sy(1))}"/>')
    for t in yticks:
        emit(f'<line x1="{_fmt(sx(lo))}" y1="{_fmt(sy(t))}" x2="{_fmt(sx(hi))}" y2="{_fmt(sy(t))}"/>')
    emit("</g>")

    emit('<g id="axes" stroke="#000000" stroke-width="1" fill="none">')
    emit(
        f'<polyline points="{_fmt(sx(lo))},{_fmt(sy(1))} {_fmt(sx(lo))},{_fmt(sy(0))} '
        f'{_fmt(sx(hi))},{_fmt(sy(0))}"/>'
    )
    emit("</g>")

    emit('<g id="xticks" font-family="sans-serif" font-size="11" text-anchor="middle">')
    for t in xticks:
        x = _fmt(sx(t))
        emit(
            f'<line x1="{x}" y1="{_fmt(sy(0))}" x2="{x}" y2="{_fmt(sy(0) + 5)}" stroke="#000000"/>'
            f'<text class="xtick" x="{x}" y="{_fmt(sy(0) + 18)}">{_tick_label(t)}</text>'
        )
    emit("</g>")
    emit('<g id="yticks" font-family="sans-serif" font-size="11" text-anchor="end">')
    for t in yticks:
        y = _fmt(sy(t))
        emit(
            f'<line x1="{_fmt(sx(lo) - 5)}" y1="{y}" x2="{_fmt(sx(lo))}" y2="{y}" stroke="#000000"/>'
            f'<text class="ytick" x="{_fmt(sx(lo) - 8)}" y="{_fmt(sy(t) + 4)}">{_tick_label(t)}</text>'
        )
    emit("</g>")
    emit(
        f'<text x="{_fmt(left + pw / 2)}" y="{_fmt(H - 14)}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{escape(spec.x_title)}</text>'
    )
    emit(
        f'<text x="16" y="{_fmt(top + ph / 2)}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 16 {_fmt(top + ph / 2)})">{escape(spec.y_label)}</text>'
    )

    emit(
        f'<clipPath id="plot-area"><rect x="{_fmt(left)}" y="{_fmt(top - 2)}" '
        f'width="{_fmt(pw)}" height="{_fmt(ph + 4)}"/></clipPath>'
    )
    emit('<g id="profiles" fill="none" stroke-width="1.6" clip-path="url(#plot-area)">')
    for k, prof in enumerate(ps):
        line = _polyline(prof, lo, hi, spec.include_flatline)
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in line.vertices)
        dash = DASH_STYLES[k % len(DASH_STYLES)]
        dash_attr = "" if dash == "none" else f' stroke-dasharray="{dash}"'
        emit(
            f'<polyline class="profile" data-solver="{escape(prof.solver, {chr(34): "&quot;"})}" '
            f'stroke="{GRAYS[k % len(GRAYS)]}"{dash_attr} points="{pts}"/>'
        )
    emit("</g>")

    lx = left + pw - 150.0
    ly = top + ph - legend_h - 6.0
    emit('<g id="legend" font-family="sans-serif" font-size="11">')
    emit(
        f'<rect x="{_fmt(lx)}" y="{_fmt(ly)}" width="144" height="{_fmt(legend_h)}" '
        f'fill="#ffffff" stroke="#888888" stroke-width="0.5"/>'
    )
    for k, prof in enumerate(ps):
        yy = ly + 14.0 + 18.0 * k
        dash = DASH_STYLES[k % len(DASH_STYLES)]
        dash_attr = "" if dash == "none" else f' stroke-dasharray="{dash}"'
        emit(
            f'<line x1="{_fmt(lx + 8)}" y1="{_fmt(yy - 4)}" x2="{_fmt(lx + 44)}" y2="{_fmt(yy - 4)}" '
            f'stroke="{GRAYS[k % len(GRAYS)]}" stroke-width="1.6"{dash_attr}/>'
            f'<text class="legend-entry" x="{_fmt(lx + 52)}" y="{_fmt(yy)}">{escape(prof.solver)}</text>'
        )
    emit("</g>")
    emit("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def export_steps(profiles: ProfileSet, spec: PlotSpec | None = None) -> bytes:
    """CSV with a ``tau`` column (plot coordinates) and one column per solver.

    There is one row per distinct breakpoint of any solver, including the
    ``r_M`` jump, and each value is the right-continuous profile height at
    that tau.  Taus are written in shortest round-trip form.
    """
    spec = spec or PlotSpec()
    ps = spec.transform(profiles)
    taus = sorted({t for p in ps for t in p.taus})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tau", *ps.solvers])
    for t in taus:
        w.writerow([repr(float(t)), *(repr(count_at(p, t) / p.n_p) for p in ps)])
    return buf.getvalue().encode("utf-8")

