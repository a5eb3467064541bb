from .config import SweepSpec, load_spec, parse_spec_text
from .output import emit, read_csv_rows, read_json_rows
from .sweep import ComparisonRow, RunManifest, Summary, run_sweep, summarize

__all__ = [
    "ComparisonRow",
    "RunManifest",
    "Summary",
    "SweepSpec",
    "emit",
    "load_spec",
    "parse_spec_text",
    "read_csv_rows",
    "read_json_rows",
    "run_sweep",
    "summarize",
]
