"""File formats: value-field CSV, trajectory JSON lines, report/stats JSON.

Value fields ship as one plain-text CSV per mode, row-major in the first
grid axis, with a 3-line header carrying the extents, the spacing and the
mode index.  Trajectories are JSON objects, one per line, with fields
``t, x, y, mode, event``.  Schemas are versioned.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

FIELD_SCHEMA = "field-csv/1"
REPORT_SCHEMA = "solve-report/1"
STATS_SCHEMA = "sim-stats/1"
TRAJ_SCHEMA = "trajectory-jsonl/1"
COMPARE_SCHEMA = "compare-table/1"


def write_field_csv(path, grid, values: np.ndarray, mode: int) -> None:
    """One mode's value grid; unreached points serialize as ``inf``."""
    path = Path(path)
    lo, hi = grid.lo, grid.hi
    header = (f"extent: {lo[0]!r} {hi[0]!r} {lo[1]!r} {hi[1]!r}\n"
              f"h: {grid.h!r}\n"
              f"mode: {mode}")
    np.savetxt(path, values, delimiter=",", header=header, comments="# ")


def read_field_csv(path):
    """Returns (values, meta) where meta has extent, h and mode."""
    path = Path(path)
    meta = {}
    with open(path) as fh:
        for _ in range(3):
            line = fh.readline()
            if not line.startswith("# "):
                raise ConfigurationError(f"{path}: malformed field header")
            key, _, rest = line[2:].partition(":")
            meta[key.strip()] = rest.strip()
    values = np.loadtxt(path, delimiter=",", skiprows=3, ndmin=2)
    extent = tuple(float(v) for v in meta["extent"].split())
    return values, {"extent": extent, "h": float(meta["h"]), "mode": int(meta["mode"])}


def write_report_json(path, report, extra=None) -> None:
    doc = {
        "schema": REPORT_SCHEMA,
        "scheme": report.scheme,
        "sweeps": report.sweeps,
        "final_change": report.final_change,
        "wall_time": report.wall_time,
        "unreachable": report.unreachable,
        "history": [None if not np.isfinite(c) else c for c in report.history],
        "orderings": list(report.orderings),
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def write_stats_json(path, stats, extra=None) -> None:
    doc = {
        "schema": STATS_SCHEMA,
        "policy": stats.policy,
        "runs": stats.runs,
        "seed": stats.seed,
        "arrivals": stats.arrivals,
        "collisions": stats.collisions,
        "timeouts": stats.timeouts,
        "arrival_mean": None if not stats.arrivals else stats.arrival_mean,
        "arrival_se": None if not stats.arrivals else stats.arrival_se,
        "collision_fraction": stats.collision_fraction,
        "mean_switches": float(stats.switch_counts.mean()) if stats.runs else 0.0,
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def trajectory_lines(record, stride: int = 1):
    """JSON lines for one trajectory: sampled states plus switch and outcome
    events (always kept regardless of the stride)."""
    events = {}
    for (t, (x, y), old, new) in record.switches:
        events[round(t, 12)] = ("switch", new)
    lines = []
    n = len(record.times)
    for k in range(n):
        t = float(record.times[k])
        ev = "start" if k == 0 else "move"
        tagged = events.pop(round(t, 12), None)
        if tagged is not None:
            ev = tagged[0]
        elif k % max(stride, 1) != 0 and k != n - 1:
            continue
        if k == n - 1:
            ev = record.outcome
        lines.append(json.dumps({
            "t": t,
            "x": float(record.positions[k, 0]),
            "y": float(record.positions[k, 1]),
            "mode": int(record.modes[k]),
            "event": ev,
        }))
    return lines


def write_trajectories_jsonl(path, records, stride: int = 1) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps({"schema": TRAJ_SCHEMA}) + "\n")
        for rec in records:
            for line in trajectory_lines(rec, stride):
                fh.write(line + "\n")


def write_compare_json(path, rows, extra=None) -> None:
    doc = {"schema": COMPARE_SCHEMA, "rows": rows}
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
