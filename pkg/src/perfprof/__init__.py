"""Performance profiles for benchmarking solvers on a shared problem set."""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    Failure,
    FailureKind,
    Profile,
    ProfileError,
    ProfileSet,
    QuartileSummary,
    RatioMatrix,
    Success,
    TimingTable,
    auto_rm,
    compute_profile,
    compute_ratios,
    count_at,
    evaluate,
    l1_distance,
    log_transform,
    profile_from_ratios,
    profile_set,
    quartiles,
    rescale_log,
    success_probability,
    sup_distance,
    win_probability,
)
from .ingest import (  # noqa: F401
    IngestError,
    IngestPolicy,
    SubsetSelector,
    filter_problems,
    merge_tables,
    parse_timing_csv,
    parse_timing_json,
    read_table,
    write_timing_csv,
    write_timing_json,
)
from .plotting import PlotSpec, StepPolyline, auto_range, export_steps, profile_to_polyline, render_svg
from .profile_io import profile_set_from_json, profile_set_to_json
