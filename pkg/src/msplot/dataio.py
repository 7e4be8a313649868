"""Long-format CSV ingestion and the CSV outputs of the pipelines.

The one accepted input layout is a header ``curve_id,t,dim_1,...,dim_p``
with one row per (curve, design point).  Every curve must be observed on
the identical t-grid; t values are compared exactly after canonical float
parsing, so nearby-but-different grids fail loudly instead of being merged.
Floats are written with ``repr``, which round-trips to the exact same
double.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError, RaggedGrid
from .fdmodel import FunctionalSample, Grid, validate
from .functional import OutlyingnessSummary
from .robustdet import DetectionResult

__all__ = [
    "parse_long_csv",
    "format_long_csv",
    "format_truth_csv",
    "format_result_csv",
]


def _split_rows(text: str) -> list[list[str]]:
    rows = []
    for raw in text.split("\n"):
        line = raw.rstrip("\r")
        if line.strip():
            rows.append(line.split(","))
    return rows


def parse_long_csv(text: str) -> FunctionalSample:
    """Parse long-format curve data into a validated sample.

    Curves appear in order of first appearance; the grid is the sorted set
    of t values (which must be identical across curves) with equal weights.

    Raises
    ------
    ParseError
        On a missing/invalid header, wrong column count, an unparseable
        number (reported with its line number), or duplicate (curve, t) rows.
    RaggedGrid
        If curves are observed on differing t sets.
    """
    rows = _split_rows(text)
    if not rows:
        raise ParseError("empty input")
    header = [h.strip() for h in rows[0]]
    if len(header) < 3 or header[0] != "curve_id" or header[1] != "t":
        raise ParseError(
            f"header must be curve_id,t,dim_1,...,dim_p, got {','.join(header)!r}"
        )
    expected_dims = [f"dim_{j + 1}" for j in range(len(header) - 2)]
    if header[2:] != expected_dims:
        raise ParseError(
            f"value columns must be {','.join(expected_dims)}, got {','.join(header[2:])!r}"
        )
    p = len(header) - 2

    per_curve: dict[str, dict[float, list[float]]] = {}
    order: list[str] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"line {lineno}: expected {len(header)} columns, got {len(row)}")
        cid = row[0].strip()
        if not cid:
            raise ParseError(f"line {lineno}: empty curve_id")
        try:
            t = float(row[1])
            vals = [float(v) for v in row[2:]]
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if cid not in per_curve:
            per_curve[cid] = {}
            order.append(cid)
        if t in per_curve[cid]:
            raise ParseError(f"line {lineno}: duplicate observation for curve {cid!r} at t={t!r}")
        per_curve[cid][t] = vals

    first = order[0] if order else None
    if first is None:
        raise ParseError("no data rows")
    grid_t = sorted(per_curve[first])
    if len(grid_t) < 2:
        raise ParseError(f"curve {first!r} has {len(grid_t)} design points, need at least 2")
    for cid in order[1:]:
        if sorted(per_curve[cid]) != grid_t:
            raise RaggedGrid(
                f"curve {cid!r} is observed on a different t-grid than curve {first!r}"
            )

    m = len(grid_t)
    values = np.empty((len(order), m, p))
    for i, cid in enumerate(order):
        curve = per_curve[cid]
        for j, t in enumerate(grid_t):
            values[i, j, :] = curve[t]
    grid = Grid(np.array(grid_t), np.full(m, 1.0 / m))
    return validate(values, grid, order)


def format_long_csv(sample: FunctionalSample) -> str:
    """Inverse of :func:`parse_long_csv`, to full float precision."""
    p = sample.p
    t = sample.grid.t
    lines = ["curve_id,t," + ",".join(f"dim_{j + 1}" for j in range(p))]
    for i, cid in enumerate(sample.ids):
        for j in range(sample.m):
            vals = ",".join(repr(float(v)) for v in sample.values[i, j])
            lines.append(f"{cid},{float(t[j])!r},{vals}")
    return "\n".join(lines) + "\n"


def format_truth_csv(ids, truth) -> str:
    """Ground-truth flags as (curve_id, outlier) rows."""
    lines = ["curve_id,outlier"]
    for cid, flag in zip(ids, truth):
        lines.append(f"{cid},{'true' if flag else 'false'}")
    return "\n".join(lines) + "\n"


def format_result_csv(
    ids,
    summary: OutlyingnessSummary,
    detection: DetectionResult,
) -> str:
    """Detection output: curve_id, mo_1..mo_p, vo, fo, srmd, flagged.

    The srmd column is empty for the boxplot method, which computes no
    distances.
    """
    p = summary.p
    header = ["curve_id"] + [f"mo_{j + 1}" for j in range(p)] + ["vo", "fo", "srmd", "flagged"]
    lines = [",".join(header)]
    for i, cid in enumerate(ids):
        cells = [str(cid)]
        cells += [repr(float(v)) for v in summary.mo[i]]
        cells.append(repr(float(summary.vo[i])))
        cells.append(repr(float(summary.fo[i])))
        cells.append("" if detection.srmd is None else repr(float(detection.srmd[i])))
        cells.append("true" if detection.flags[i] else "false")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
