"""Field files, JSON documents and CSV tables.

Floats are written with 17 significant digits everywhere, which is enough
for an exact binary round trip.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, GridMismatch

FIELD_HEADER = "FIBRATE-FIELD v1"
RECORD_COLUMNS = ("n", "mu", "bound", "energy_residual", "gradient_residual", "nehari_class", "iterations", "converged")
SCAN_COLUMNS = ("t", "psi", "psi_prime", "psi_second")
NEHARI_CELL = {"N_minus": "N-", "N_plus": "N+"}


def fmt(x) -> str:
    return format(float(x), ".17g")


# --- fields -------------------------------------------------------------------


def _grid_line(grid) -> str:
    ext = " ".join(fmt(e) for e in grid.extents)
    n = " ".join(str(k) for k in grid.shape)
    return f"{grid.kind} {ext} {n}"


def persist_field(field_, grid, path) -> Path:
    """Write a field as text: header, grid line, one value per line."""
    values = np.asarray(field_, float)
    if values.shape != (grid.size,):
        raise GridMismatch(f"field has {values.size} values, grid has {grid.size}")
    path = Path(path)
    lines = [FIELD_HEADER, _grid_line(grid)] + [fmt(x) for x in values]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_field(path):
    """``(grid_info, values)`` with ``grid_info = {"kind", "extent", "n"}``."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != FIELD_HEADER:
        raise FormatError(f"{path}: missing header {FIELD_HEADER!r}")
    if len(lines) < 2:
        raise FormatError(f"{path}: missing grid line")
    parts = lines[1].split()
    try:
        kind = parts[0]
        dims = 2 if kind == "rectangle" else 1
        if len(parts) != 1 + 2 * dims:
            raise ValueError
        extent = [float(x) for x in parts[1 : 1 + dims]]
        n = [int(x) for x in parts[1 + dims :]]
        values = np.array([float(x) for x in lines[2:] if x.strip()])
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: malformed field file") from exc
    if values.size != int(np.prod(n)):
        raise FormatError(f"{path}: expected {int(np.prod(n))} values, found {values.size}")
    info = {"kind": kind, "extent": extent if dims == 2 else extent[0], "n": n if dims == 2 else n[0]}
    return info, values


def load_field(path, grid=None) -> np.ndarray:
    """Read a field file, checking it against ``grid`` when one is given."""
    info, values = read_field(path)
    if grid is not None:
        ext = np.atleast_1d(info["extent"]).tolist()
        n = np.atleast_1d(info["n"]).tolist()
        if info["kind"] != grid.kind or n != list(grid.shape) or ext != [float(e) for e in grid.extents]:
            raise GridMismatch(f"{path}: field grid {info} does not match {grid.kind} {grid.extents} {grid.shape}")
    return values


# --- JSON ---------------------------------------------------------------------


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits; non-finite floats become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if obj is None:
        return "null"
    if isinstance(obj, (str, Path)):
        return json.dumps(str(obj))
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# --- bundles ------------------------------------------------------------------


@dataclass
class ResultBundle:
    """Everything a run produces.

    ``record_levels`` runs parallel to ``records`` and holds the level index
    and bound label a record belongs to (``None`` outside ``mu-seq``).
    """

    meta: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    estimates: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    record_levels: list = field(default_factory=list)
    scan: np.ndarray = None
    grid: object = None


def record_dict(rec, level=None) -> dict:
    n, bound = level if level else (None, None)
    return {
        "n": n,
        "bound": bound,
        "mu": rec.mu,
        "energy_residual": rec.energy_residual,
        "gradient_residual": rec.gradient_residual,
        "nehari_class": rec.nehari_class,
        "nehari_discrepancy": rec.nehari_discrepancy,
        "iterations": rec.iterations,
        "converged": rec.converged,
        "t0": rec.t0,
        "critical_type": rec.critical_type,
        "roundtrip_error": rec.roundtrip_error,
        "start": rec.start,
        "diagnostics": rec.diagnostics,
    }


def estimate_dict(est) -> dict:
    return {"n": est.n, "bound": est.bound, "value": est.value, "basis_dim": est.basis_dim}


def bundle_dict(bundle: ResultBundle) -> dict:
    levels = bundle.record_levels or [None] * len(bundle.records)
    return {
        "meta": bundle.meta,
        "records": [record_dict(r, lv) for r, lv in zip(bundle.records, levels)],
        "estimates": [estimate_dict(e) for e in bundle.estimates],
        "reports": [r.to_dict() for r in bundle.reports],
    }


def _csv_cell(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return fmt(x)
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_csv_cell(x) for x in row])
    return Path(path)


def write_outputs(bundle: ResultBundle, formats, directory) -> list:
    """Write the bundle as ``result.json`` and/or CSV tables plus field files."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    formats = set(formats)
    written = []
    doc = bundle_dict(bundle)
    if "json" in formats:
        p = out / "result.json"
        p.write_text(dumps(doc) + "\n")
        written.append(p)
    if "csv" in formats:
        rows = [
            [d["n"], d["mu"], d["bound"], d["energy_residual"], d["gradient_residual"],
             NEHARI_CELL.get(d["nehari_class"], d["nehari_class"]), d["iterations"], d["converged"]]
            for d in doc["records"]
        ]
        written.append(_write_csv(out / "records.csv", RECORD_COLUMNS, rows))
        if bundle.estimates:
            rows = [[e["n"], e["bound"], e["value"], e["basis_dim"]] for e in doc["estimates"]]
            written.append(_write_csv(out / "estimates.csv", ("n", "bound", "value", "basis_dim"), rows))
        if bundle.reports:
            rows = [[r["name"], r["passed"], r["worst_error"], r["tolerance"], r["sample_count"]] for r in doc["reports"]]
            cols = ("name", "passed", "worst_error", "tolerance", "sample_count")
            written.append(_write_csv(out / "reports.csv", cols, rows))
        if bundle.scan is not None:
            written.append(_write_csv(out / "scan.csv", SCAN_COLUMNS, bundle.scan.tolist()))
        if bundle.grid is not None:
            for i, rec in enumerate(bundle.records):
                written.append(persist_field(rec.v, bundle.grid, out / f"field_{i:03d}.txt"))
    return written
