"""Write experiment results as CSV/JSON files plus a digest manifest.

Output is deterministic for deterministic results: floats use a fixed
format, keys are sorted and the manifest lists relative paths in order.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

from ckledger.bench.experiments import ExperimentResult

FLOAT_DIGITS = 6
MANIFEST = "manifest.json"


def _clean(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return round(value, FLOAT_DIGITS)
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "value"):  # enums
        return value.value
    return str(value)


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{FLOAT_DIGITS}f}"
    return str(value)


def to_csv(rows: Sequence[dict[str, Any]]) -> str:
    columns: list[str] = []
    for row in rows:
        columns += [c for c in row if c not in columns]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c, "")) for c in columns])
    return buf.getvalue()


def to_json(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def emit(
    results: Iterable[ExperimentResult],
    out_dir: str | Path,
    *,
    run_info: dict[str, Any] | None = None,
) -> Path:
    """Write ``expN.csv``, ``expN.json`` and ``expN_<series>.csv`` per result.

    Returns the manifest path.  Each result's ``files`` is filled with the
    relative paths written for it.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    experiments = []
    for result in results:
        files = [f"{result.exp_id}.csv", f"{result.exp_id}.json"]
        files += [f"{result.exp_id}_{name}.csv" for name in sorted(result.series)]
        result.files = files
        (out / files[0]).write_text(to_csv(result.rows), encoding="utf-8")
        for name in sorted(result.series):
            (out / f"{result.exp_id}_{name}.csv").write_text(to_csv(result.series[name]), encoding="utf-8")
        payload = {
            "experiment": result.exp_id,
            "params": result.params,
            "summary": result.summary,
            "rows": result.rows,
            "files": files,
        }
        (out / files[1]).write_text(to_json(payload), encoding="utf-8")
        written += files
        experiments.append(result.exp_id)
    manifest = {
        "run": run_info or {},
        "experiments": experiments,
        "files": [{"path": p, "sha256": sha256_file(out / p), "bytes": (out / p).stat().st_size} for p in sorted(written)],
    }
    path = out / MANIFEST
    path.write_text(to_json(manifest), encoding="utf-8")
    return path


def verify_manifest(out_dir: str | Path) -> list[str]:
    """Paths whose digest no longer matches, or that are missing."""
    out = Path(out_dir)
    manifest = json.loads((out / MANIFEST).read_text(encoding="utf-8"))
    bad = []
    for entry in manifest["files"]:
        p = out / entry["path"]
        if not p.is_file() or sha256_file(p) != entry["sha256"]:
            bad.append(entry["path"])
    return bad
