"""Plain-text outputs: field snapshots, diagnostics tables, reports and manifests.

Numbers are written with 17 significant digits so doubles round-trip
exactly.  Timestamps live only in JSON sidecars, never in CSV files, so
repeated runs with the same configuration give identical CSV bytes.
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
from pathlib import Path

import numpy as np

from .calculus import Grid
from .errors import SnapshotError

FMT = "%.17g"
FIELD_KINDS = ("q", "spin", "map", "curve", "coords")


def fmt(v) -> str:
    return FMT % v


def component_names(kind: str, n: int):
    """Column stems in file order.

    q: q1..qN.  spin/map/curve: matrix entries m{i}{j} row-major (0-based).
    coords: theta, then Theta1..ThetaN.
    """
    if kind == "q":
        return [f"q{i + 1}" for i in range(n)]
    if kind in ("spin", "map", "curve"):
        return [f"m{i}{j}" for i in range(n + 1) for j in range(n + 1)]
    if kind == "coords":
        return ["theta"] + [f"Theta{i + 1}" for i in range(n)]
    raise SnapshotError(f"unknown field kind {kind!r}")


def _flatten(kind, values, n):
    m = values.shape[0] if kind != "coords" else values[0].shape[0]
    if kind == "coords":
        theta, big = values
        return np.concatenate([np.asarray(theta, complex)[:, None], big], axis=1)
    return np.asarray(values).reshape(m, -1)


def write_snapshot(base, values, grid: Grid, time: float, kind: str, n: int, meta=None):
    """Write ``base.csv`` and ``base.json``; returns the CSV path.

    For kind='coords' ``values`` is the pair (theta, Theta).
    """
    base = Path(base)
    base.parent.mkdir(parents=True, exist_ok=True)
    names = component_names(kind, n)
    flat = _flatten(kind, values, n)
    if flat.shape != (grid.m_points, len(names)):
        raise SnapshotError(f"{kind} field of shape {flat.shape} does not match the grid and N={n}")
    header = ["x"]
    for s in names:
        header += [f"{s}_re", f"{s}_im"]
    csv_path = base.with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for x, row in zip(grid.x, flat):
            parts = [fmt(x)]
            for z in row:
                parts += [fmt(z.real), fmt(z.imag)]
            fh.write(",".join(parts) + "\n")
    side = {
        "kind": kind,
        "n": int(n),
        "time": float(time),
        "grid": {"m_points": grid.m_points, "length": grid.length},
        "columns": header,
        "written": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    if meta:
        side["meta"] = meta
    base.with_suffix(".json").write_text(json.dumps(side, indent=2, sort_keys=True, default=float))
    return csv_path


def read_snapshot(path):
    """Return (values, grid, meta).  values follows the layout given to write_snapshot."""
    path = Path(path)
    side = path.with_suffix(".json")
    try:
        meta = json.loads(side.read_text())
        kind, n = meta["kind"], int(meta["n"])
        grid = Grid(int(meta["grid"]["m_points"]), float(meta["grid"]["length"]))
    except FileNotFoundError as err:
        raise SnapshotError(f"missing metadata sidecar {side}") from err
    except (KeyError, ValueError, TypeError) as err:
        raise SnapshotError(f"malformed metadata sidecar {side}: {err}") from err
    names = component_names(kind, n)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise SnapshotError(f"cannot read snapshot {path}: {err}") from err
    if not rows or rows[0][0] != "x" or len(rows[0]) != 1 + 2 * len(names):
        raise SnapshotError(f"snapshot header of {path} does not match kind {kind!r} with N={n}")
    body = rows[1:]
    if len(body) != grid.m_points:
        raise SnapshotError(f"snapshot {path} has {len(body)} rows, expected {grid.m_points}", line=len(body) + 1)
    try:
        data = np.array([[float(v) for v in r] for r in body])
    except ValueError as err:
        raise SnapshotError(f"non-numeric entry in {path}: {err}") from err
    if data.shape[1] != 1 + 2 * len(names):
        raise SnapshotError(f"ragged rows in {path}")
    z = data[:, 1::2] + 1j * data[:, 2::2]
    if kind == "q":
        values = z
    elif kind == "coords":
        values = (np.real(z[:, 0]), z[:, 1:])
    else:
        values = z.reshape(grid.m_points, n + 1, n + 1)
    return values, grid, meta


def write_table(path, header, rows):
    """CSV with a header row and every number at 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(fmt(v) if isinstance(v, (float, int, np.floating, np.integer)) and not isinstance(v, bool)
                              else str(v) for v in r) + "\n")
    return path


def write_report(path, report: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, sort_keys=True, default=_json_default))
    return path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


def content_hash(text: str) -> str:
    """Git blob hash of ``text``."""
    data = text.encode()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def write_manifest(path, config_text: str, tolerances: dict, extra: dict | None = None):
    """Config echo plus its content hash and the tolerances in force."""
    lines = [f"config_hash = {content_hash(config_text)}"]
    for k in sorted(tolerances):
        lines.append(f"tolerance.{k} = {fmt(tolerances[k])}")
    for k in sorted(extra or {}):
        lines.append(f"{k} = {extra[k]}")
    lines.append("# config")
    lines += [ln for ln in config_text.splitlines()]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path
