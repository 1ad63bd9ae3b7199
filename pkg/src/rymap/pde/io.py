"""CSV export of grid snapshots and probe tables.

A snapshot file starts with two ``#`` lines (field names, then values for
chart, t, spacing, origin and shape) followed by the grid, one row per first
index.  The ``#`` prefix keeps the files readable by plotting tools that
treat it as a comment.  Floats are written with 17 significant digits so a
write/read cycle is lossless.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, List, Sequence

import numpy as np

from .solver import BoundaryCondition, Chart, ConformalGridState

__all__ = [
    "PROBE_COLUMNS",
    "fmt",
    "snapshot_to_csv",
    "snapshot_from_csv",
    "write_snapshot",
    "read_snapshot",
    "write_series",
    "probes_to_csv",
    "write_probes",
    "read_probes",
]

PROBE_COLUMNS = ("t", "coord1", "coord2", "h", "K", "vol_rate")
HEADER = ("chart", "t", "d1", "d2", "o1", "o2", "n1", "n2")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def snapshot_to_csv(state: ConformalGridState) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    buf.write("#")
    w.writerow(HEADER)
    buf.write("#")
    w.writerow([state.chart.value, fmt(state.t), *map(fmt, state.spacing), *map(fmt, state.origin),
                *state.h.shape])
    for row in state.h:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def snapshot_from_csv(text: str, bc: BoundaryCondition = None) -> ConformalGridState:
    lines = text.splitlines()
    if len(lines) < 2 or not lines[0].startswith("#") or not lines[1].startswith("#"):
        raise ValueError("snapshot CSV must start with two '#' header lines")
    names = next(csv.reader([lines[0][1:]]))
    if tuple(names) != HEADER:
        raise ValueError(f"unexpected snapshot header {names}")
    vals = next(csv.reader([lines[1][1:]]))
    chart = Chart(vals[0])
    t, d1, d2, o1, o2 = map(float, vals[1:6])
    n1, n2 = int(vals[6]), int(vals[7])
    h = np.array([[float(x) for x in row] for row in csv.reader(lines[2:])], dtype=float)
    if h.shape != (n1, n2):
        raise ValueError(f"grid has shape {h.shape}, header says {(n1, n2)}")
    return ConformalGridState(chart, h, (d1, d2), (o1, o2), t,
                              bc if bc is not None else BoundaryCondition.periodic())


def write_snapshot(state: ConformalGridState, path) -> Path:
    path = Path(path)
    path.write_text(snapshot_to_csv(state))
    return path


def read_snapshot(path, bc: BoundaryCondition = None) -> ConformalGridState:
    return snapshot_from_csv(Path(path).read_text(), bc)


def write_series(states: Sequence[ConformalGridState], directory, stem: str = "snapshot") -> List[Path]:
    """One file per snapshot, numbered in order: ``stem_0000.csv``, ``stem_0001.csv``, ..."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return [write_snapshot(s, directory / f"{stem}_{k:04d}.csv") for k, s in enumerate(states)]


def probes_to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROBE_COLUMNS)
    for r in rows:
        w.writerow([fmt(r[c]) for c in PROBE_COLUMNS])
    return buf.getvalue()


def write_probes(rows: Iterable[dict], path) -> Path:
    path = Path(path)
    path.write_text(probes_to_csv(rows))
    return path


def read_probes(path) -> List[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in r.items()} for r in csv.DictReader(fh)]
