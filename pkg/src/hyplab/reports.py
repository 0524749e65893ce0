"""Report emission: RFC-4180 CSV artifacts, JSON summaries, plot-data series.

CSV contract: comma-separated, '.' decimal point, LF line endings, floats
rendered with repr (shortest round-trip form) so golden-file comparisons
are bit-exact.  Metadata lives in sibling JSON, never inside the CSV.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json

import numpy as np

from . import __version__
from .errors import ReportError

CLAMP_DISCLOSURE = (
    "thick-part truncated injectivity radius clamped to asinh(1); "
    "fitted constants absorb the bounded factor"
)


def _render(value):
    if isinstance(value, float):
        # cast numpy scalars so repr stays the shortest round-trip literal
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def csv_text(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_render(row[c]) for c in columns])
    return buf.getvalue()


def write_csv(path, rows, columns):
    with open(path, "w", newline="") as fh:
        fh.write(csv_text(rows, columns))


def json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_json(path, payload):
    with open(path, "w", newline="") as fh:
        fh.write(json_text(payload))


def base_metadata(*, spec_hash=None, mesh_h=None, solver=None, seed=None,
                  flags=None) -> dict:
    meta = {
        "tool_version": __version__,
        "iota_clamp": CLAMP_DISCLOSURE,
    }
    if spec_hash is not None:
        meta["spec_hash"] = spec_hash
    if mesh_h is not None:
        meta["mesh_h"] = mesh_h
    if solver is not None:
        meta["solver"] = solver
    if seed is not None:
        meta["seed"] = seed
    if flags:
        meta["flags"] = flags
    return meta


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def spec_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# plot data


PLOT_COLUMNS = ("series", "x", "y")


def emit_plot_data(reports: dict):
    """Long-format (series, x, y) rows from report tables.

    Accepts any of the keys "heat" (rows with surface/t/stat/scaled plus a
    per-surface C in "heat_summary"), "thm11" (surface/k/ratio) and "thm14"
    (bound/EL scatter).  Raises on an empty report set.
    """
    out = []
    if reports.get("heat"):
        summary = reports.get("heat_summary", {})
        for row in reports["heat"]:
            out.append({"series": f"heat:{row['surface']}:stat",
                        "x": float(row["t"]), "y": float(row["stat"])})
        for row in reports["heat"]:
            per = summary.get("per_surface", {}).get(row["surface"], {})
            c = per.get("C")
            if c is None:
                continue
            i_val = per.get("I", None)
            # bound curve C sqrt(I/t): the scaled column already folds I in
            out.append({"series": f"heat:{row['surface']}:bound",
                        "x": float(row["t"]),
                        "y": c * float(row["stat"]) / max(row["scaled"], 1e-300)})
    if reports.get("thm11"):
        for row in reports["thm11"]:
            out.append({"series": f"thm11:{row['surface']}",
                        "x": float(row["k"]), "y": float(row["ratio"])})
    if reports.get("thm14"):
        for row in reports["thm14"]:
            out.append({"series": "thm14:el_vs_bound",
                        "x": float(row["bound"]), "y": float(row["EL"])})
    if reports.get("minimax"):
        for row in reports["minimax"]:
            out.append({"series": f"minimax:{row['surface']}",
                        "x": float(row["k"]), "y": float(row["R_k"])})
    if not out:
        raise ReportError("no reports to project into plot data")
    return out
