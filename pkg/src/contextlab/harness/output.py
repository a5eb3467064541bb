"""Writing and reading sweep results.

CSV values carry 17 significant digits, enough to round-trip any double.
``manifest.json`` holds run metadata including wall-clock timings and is the
only non-reproducible file; every other file is a pure function of the sweep
configuration (grids, counts, seed).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .sweep import COLUMNS, ComparisonRow, RunManifest

CURVE_COLUMNS = ("theta", "qm_sg1", "qm_sg2", "ks_mc_sg1", "ks_mc_sg2", "ks_mc_se1", "ks_mc_se2")


def fmt(x: float) -> str:
    return format(x, ".17g")


def _write_csv(path: Path, header, records) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in records:
            writer.writerow([fmt(v) for v in rec])


def _curve_record(r: ComparisonRow):
    return (r.theta, r.qm_closed_sg1, r.qm_closed_sg2, r.ks_mc_sg1, r.ks_mc_sg2, r.ks_mc_se1, r.ks_mc_se2)


def emit(
    rows: list[ComparisonRow],
    manifest: RunManifest,
    output_format: str,
    out_dir,
    emit_curves: bool = False,
) -> list[Path]:
    """Write results, manifest and optional per-vartheta curves into ``out_dir``."""
    out = Path(out_dir)
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        if output_format == "csv":
            path = out / "results.csv"
            _write_csv(path, COLUMNS, ([getattr(r, c) for c in COLUMNS] for r in rows))
        elif output_format == "json":
            path = out / "results.json"
            payload = {
                "manifest": manifest.data_dict(),
                "rows": [{c: getattr(r, c) for c in COLUMNS} for r in rows],
            }
            path.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
        else:
            raise ValueError(f"unknown output format {output_format!r}")
        written.append(path)

        if emit_curves:
            order: list[float] = []
            by_vartheta: dict[float, list[ComparisonRow]] = {}
            for r in rows:
                if r.vartheta not in by_vartheta:
                    order.append(r.vartheta)
                    by_vartheta[r.vartheta] = []
                by_vartheta[r.vartheta].append(r)
            for i, vt in enumerate(order):
                path = out / f"curve_{i:03d}.csv"
                _write_csv(path, CURVE_COLUMNS, (_curve_record(r) for r in by_vartheta[vt]))
                written.append(path)

        path = out / "manifest.json"
        meta = manifest.to_dict()
        meta["files"] = [p.name for p in written]
        path.write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")
        written.append(path)
    except OSError as exc:
        raise OSError(f"failed writing results under {out}: {exc}") from exc
    return written


def read_csv_rows(path) -> list[ComparisonRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        return [ComparisonRow(**{c: float(rec[c]) for c in COLUMNS}) for rec in reader]


def read_json_rows(path) -> tuple[dict, list[ComparisonRow]]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return payload["manifest"], [ComparisonRow(**rec) for rec in payload["rows"]]
