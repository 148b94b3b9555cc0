"""CSV and JSON writers for experiment outputs.

Floats are written with 17 significant digits (``format(x, ".17g")``), which
round-trips every double exactly and does not depend on the locale.

File schemas (all CSV files have a header row):

``trace.csv``
    stack, iteration, total_iteration, cost
``sweep.csv``
    k, n, j, seed, final_cost, normalized_cost, stalled, c_verdict
``samples.csv``
    index, d_to_identity, d_to_target, params_hash
``hist.csv``
    identity_bin, target_bin, identity_lo, identity_hi, target_lo, target_hi, count
    (200 x 200 bins over [0, 1]^2, every bin listed, row-major in identity_bin)
``record.json``, ``extrema.json``, ``gradcheck.json``
    see :meth:`TrainRecord.to_dict` and the ``cli`` module.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

TRACE_COLUMNS = ["stack", "iteration", "total_iteration", "cost"]
SWEEP_COLUMNS = ["k", "n", "j", "seed", "final_cost", "normalized_cost", "stalled", "c_verdict"]
SAMPLE_COLUMNS = ["index", "d_to_identity", "d_to_target", "params_hash"]
HIST_COLUMNS = ["identity_bin", "target_bin", "identity_lo", "identity_hi",
                "target_lo", "target_hi", "count"]
HIST_BINS = 200


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


def parse_cell(text: str):
    """Inverse of :func:`fmt` for the cell types we emit."""
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def params_hash(params) -> str:
    """Short content hash of a parameter vector (float64 little-endian bytes)."""
    b = np.ascontiguousarray(np.asarray(params, dtype="<f8")).tobytes()
    return hashlib.sha256(b).hexdigest()[:16]


def trace_rows(record):
    total = 0
    for s in record.stacks:
        for i, c in enumerate(s.trace):
            yield (s.index, i, total, float(c))
            total += 1


def histogram2d(d_identity, d_target, bins: int = HIST_BINS) -> np.ndarray:
    h, _, _ = np.histogram2d(d_identity, d_target, bins=bins, range=[[0, 1], [0, 1]])
    return h.astype(np.int64)


def hist_rows(h: np.ndarray):
    bins = h.shape[0]
    edges = np.linspace(0.0, 1.0, bins + 1)
    for a in range(bins):
        for b in range(bins):
            yield (a, b, edges[a], edges[a + 1], edges[b], edges[b + 1], int(h[a, b]))
