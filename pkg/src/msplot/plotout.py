"""Standalone SVG/CSV documents for the magnitude-shape graphics.

Every document is self-contained and deterministic: inline styles, no
external assets, fixed 600x600 pixels per panel, floats printed with
``repr`` in CSV payloads so they round-trip exactly.  Each curve appears as
exactly one circle mark per panel; boundary curves and reference parabolas
are paths, never circles, so mark counts stay checkable.

Mark styling uses four roles keyed by what is known: ``quiet`` (non-outlying
grey), ``flagged`` (red), ``false-alarm`` (blue, flagged but actually clean),
``missed`` (cyan, outlying but not flagged).  Without ground truth only
``quiet``/``flagged`` appear.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import ArrayNeedsMultivariate, NoBoundaryGeometry, ShapeMismatch
from .fdmodel import default_ids
from .functional import OutlyingnessSummary, ms_coordinates
from .robustdet import DetectionResult

__all__ = [
    "PlotDocument",
    "emit_msplot",
    "emit_msplot_array",
    "emit_outliergram",
]

PANEL_SIZE = 600
_MARGIN_LEFT = 78
_MARGIN_RIGHT = 24
_MARGIN_TOP = 24
_MARGIN_BOTTOM = 64

_STYLE = (
    "circle.quiet{fill:#9a9a9a;fill-opacity:0.75;stroke:none}"
    "circle.flagged{fill:#d62d20;stroke:none}"
    "circle.false-alarm{fill:#1f6fd6;stroke:none}"
    "circle.missed{fill:#17bebb;stroke:none}"
    "path.boundary{fill:none;stroke:#444444;stroke-width:1.5;stroke-dasharray:6 4}"
    "path.reference{fill:none;stroke:#aa7722;stroke-width:1.5}"
    "line.axis{stroke:#222222;stroke-width:1}"
    "line.tick{stroke:#222222;stroke-width:1}"
    "text{font-family:Helvetica,Arial,sans-serif;font-size:15px;fill:#222222}"
    "text.title{font-size:17px}"
)


@dataclass(frozen=True)
class PlotDocument:
    """A rendered plot: SVG bytes or CSV bytes plus its mark count.

    ``n_marks`` is the number of point marks per panel, i.e. the curve
    count; multi-panel documents contain ``n_marks`` circles in each panel.
    """

    format: str
    payload: bytes
    n_marks: int

    @property
    def text(self) -> str:
        return self.payload.decode("utf-8")


def _mark_roles(
    n: int,
    flags: np.ndarray | None,
    truth: np.ndarray | None,
) -> list[str]:
    if flags is None and truth is None:
        return ["quiet"] * n
    if flags is None:
        return ["flagged" if t else "quiet" for t in truth]
    if truth is None:
        return ["flagged" if f else "quiet" for f in flags]
    roles = []
    for f, t in zip(flags, truth):
        if f and t:
            roles.append("flagged")
        elif f and not t:
            roles.append("false-alarm")
        elif not f and t:
            roles.append("missed")
        else:
            roles.append("quiet")
    return roles


class _Frame:
    """Affine map from data coordinates to one panel's pixel coordinates."""

    def __init__(self, xs: np.ndarray, ys: np.ndarray):
        x_lo, x_hi = float(np.min(xs)), float(np.max(xs))
        y_lo, y_hi = float(np.min(ys)), float(np.max(ys))
        x_pad = 0.05 * (x_hi - x_lo) or 1.0
        y_pad = 0.05 * (y_hi - y_lo) or 1.0
        self.x_lo, self.x_hi = x_lo - x_pad, x_hi + x_pad
        self.y_lo, self.y_hi = y_lo - y_pad, y_hi + y_pad
        self.px_lo = _MARGIN_LEFT
        self.px_hi = PANEL_SIZE - _MARGIN_RIGHT
        self.py_lo = PANEL_SIZE - _MARGIN_BOTTOM
        self.py_hi = _MARGIN_TOP

    def px(self, x: float) -> float:
        f = (x - self.x_lo) / (self.x_hi - self.x_lo)
        return self.px_lo + f * (self.px_hi - self.px_lo)

    def py(self, y: float) -> float:
        f = (y - self.y_lo) / (self.y_hi - self.y_lo)
        return self.py_lo + f * (self.py_hi - self.py_lo)

    def ticks(self, count: int = 5):
        xt = np.linspace(self.x_lo, self.x_hi, count + 2)[1:-1]
        yt = np.linspace(self.y_lo, self.y_hi, count + 2)[1:-1]
        return xt, yt


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _axes_svg(frame: _Frame, xlabel: str, ylabel: str, title: str | None) -> list[str]:
    parts = [
        f'<line class="axis" x1="{frame.px_lo}" y1="{frame.py_lo}" '
        f'x2="{frame.px_hi}" y2="{frame.py_lo}"/>',
        f'<line class="axis" x1="{frame.px_lo}" y1="{frame.py_lo}" '
        f'x2="{frame.px_lo}" y2="{frame.py_hi}"/>',
    ]
    xt, yt = frame.ticks()
    for x in xt:
        px = _fmt(frame.px(float(x)))
        parts.append(
            f'<line class="tick" x1="{px}" y1="{frame.py_lo}" x2="{px}" y2="{frame.py_lo + 6}"/>'
        )
        parts.append(
            f'<text x="{px}" y="{frame.py_lo + 24}" text-anchor="middle">{float(x):.3g}</text>'
        )
    for y in yt:
        py = _fmt(frame.py(float(y)))
        parts.append(
            f'<line class="tick" x1="{frame.px_lo - 6}" y1="{py}" x2="{frame.px_lo}" y2="{py}"/>'
        )
        parts.append(
            f'<text x="{frame.px_lo - 10}" y="{py}" text-anchor="end" '
            f'dominant-baseline="middle">{float(y):.3g}</text>'
        )
    x_mid = (frame.px_lo + frame.px_hi) / 2
    y_mid = (frame.py_lo + frame.py_hi) / 2
    parts.append(
        f'<text x="{x_mid}" y="{PANEL_SIZE - 16}" text-anchor="middle">{escape(xlabel)}</text>'
    )
    parts.append(
        f'<text x="22" y="{y_mid}" text-anchor="middle" '
        f'transform="rotate(-90 22 {y_mid})">{escape(ylabel)}</text>'
    )
    if title:
        parts.append(
            f'<text class="title" x="{x_mid}" y="{_MARGIN_TOP - 6}" '
            f'text-anchor="middle">{escape(title)}</text>'
        )
    return parts


def _path(frame: _Frame, xy: np.ndarray, cls: str, closed: bool) -> str:
    coords = " L ".join(f"{_fmt(frame.px(x))} {_fmt(frame.py(y))}" for x, y in xy)
    tail = " Z" if closed else ""
    return f'<path class="{cls}" d="M {coords}{tail}"/>'


def _scatter_panel(
    xs: np.ndarray,
    ys: np.ndarray,
    roles: Sequence[str],
    xlabel: str,
    ylabel: str,
    *,
    title: str | None = None,
    boundary: np.ndarray | None = None,
    parabola: bool = False,
) -> str:
    bounds_x = [xs]
    bounds_y = [ys]
    if boundary is not None:
        bounds_x.append(boundary[:, 0])
        bounds_y.append(boundary[:, 1])
    if parabola:
        bounds_y.append(np.array([0.0]))
        bounds_x.append(np.array([0.0]))
    frame = _Frame(np.concatenate(bounds_x), np.concatenate(bounds_y))
    parts = _axes_svg(frame, xlabel, ylabel, title)
    if parabola:
        gx = np.linspace(max(frame.x_lo, 0.0), frame.x_hi, 120)
        curve = np.stack([gx, gx * gx], axis=1)
        curve = curve[curve[:, 1] <= frame.y_hi]
        if curve.shape[0] >= 2:
            parts.append(_path(frame, curve, "reference", closed=False))
    if boundary is not None:
        parts.append(_path(frame, boundary, "boundary", closed=True))
    for x, y, role in zip(xs, ys, roles):
        parts.append(
            f'<circle class="{role}" cx="{_fmt(frame.px(float(x)))}" '
            f'cy="{_fmt(frame.py(float(y)))}" r="3.5"/>'
        )
    return "".join(parts)


def _document(panels: list[str], cols: int, rows: int) -> bytes:
    width = PANEL_SIZE * cols
    height = PANEL_SIZE * rows
    body = []
    for idx, panel in enumerate(panels):
        dx = (idx % cols) * PANEL_SIZE
        dy = (idx // cols) * PANEL_SIZE
        body.append(f'<g class="panel" transform="translate({dx} {dy})">{panel}</g>')
    doc = (
        '<?xml version="1.0" encoding="UTF-8"?>'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
        f"<style>{_STYLE}</style>"
        f'{"".join(body)}'
        "</svg>"
    )
    return doc.encode("utf-8")


def _csv_document(header: list[str], rows: list[list[str]]) -> bytes:
    lines = [",".join(header)]
    lines += [",".join(row) for row in rows]
    return ("\n".join(lines) + "\n").encode("utf-8")


def emit_msplot(
    summary: OutlyingnessSummary,
    detection: DetectionResult | None = None,
    *,
    mode: str = "full",
    fmt: str = "svg",
    truth=None,
    ids: Sequence[str] | None = None,
    title: str | None = None,
) -> PlotDocument:
    """Magnitude-shape plot: one mark per curve at its (mo, vo) coordinates.

    ``mode="full"`` uses the directed coordinates.  SVG rendering is planar:
    p = 1 plots (mo, vo) directly with the detection ellipse when available;
    p = 2 full-mode SVG falls back to the norm-mode projection (the full 3-D
    coordinates remain available as CSV); p > 2 full-mode SVG is refused.

    Raises
    ------
    NoBoundaryGeometry
        For ``mode="full"``, ``fmt="svg"`` with p > 2; plot norm mode instead.
    """
    if mode not in ("full", "norm"):
        raise ShapeMismatch(f"unknown mode {mode!r}, expected 'full' or 'norm'")
    if fmt not in ("svg", "csv"):
        raise ShapeMismatch(f"unknown format {fmt!r}, expected 'svg' or 'csv'")
    n, p = summary.n, summary.p
    if ids is None:
        ids = default_ids(n)
    flags = detection.flags if detection is not None else None
    truth_arr = None if truth is None else np.asarray(truth, dtype=bool)
    coords = ms_coordinates(summary, mode=mode)

    if fmt == "csv":
        if mode == "full":
            header = ["curve_id"] + [f"mo_{j + 1}" for j in range(p)] + ["vo"]
        else:
            header = ["curve_id", "mo_norm", "vo"]
        if detection is not None:
            header += ["srmd", "flagged"]
        rows = []
        for i in range(n):
            row = [str(ids[i])] + [repr(float(v)) for v in coords[i]]
            if detection is not None:
                row.append("" if detection.srmd is None else repr(float(detection.srmd[i])))
                row.append("true" if detection.flags[i] else "false")
            rows.append(row)
        return PlotDocument("csv", _csv_document(header, rows), n)

    render_mode = mode
    if mode == "full" and p == 2:
        render_mode = "norm"  # planar fallback; full coordinates exist as csv
    if mode == "full" and p > 2:
        raise NoBoundaryGeometry(
            f"cannot render full-mode coordinates for p={p}; use mode='norm'"
        )
    plot_coords = coords if render_mode == mode else ms_coordinates(summary, mode="norm")
    xlabel = "MO" if render_mode == "full" else "‖MO‖"
    boundary = None
    if (
        detection is not None
        and detection.boundary is not None
        and render_mode == "full"
        and detection.boundary.vertices.shape[1] == 2
    ):
        boundary = detection.boundary.vertices
    roles = _mark_roles(n, flags, truth_arr)
    panel = _scatter_panel(
        plot_coords[:, 0],
        plot_coords[:, 1],
        roles,
        xlabel,
        "VO",
        title=title,
        boundary=boundary,
    )
    return PlotDocument("svg", _document([panel], 1, 1), n)


def emit_msplot_array(
    marginals: Sequence[OutlyingnessSummary],
    joints: Mapping[tuple[int, int], OutlyingnessSummary],
    *,
    truth=None,
) -> PlotDocument:
    """p x p panel grid: marginal plots on the diagonal, joints off it.

    Panel (k, k) is the directed magnitude-shape plot of dimension k; panel
    (k, l) shows the joint summary of dimensions (k, l) in norm mode.  Curve
    styling is consistent across panels (keyed by ``truth`` when given).

    Raises
    ------
    ArrayNeedsMultivariate
        If only one dimension is supplied.
    """
    p = len(marginals)
    if p < 2:
        raise ArrayNeedsMultivariate("the plot array needs p >= 2 dimensions")
    n = marginals[0].n
    truth_arr = None if truth is None else np.asarray(truth, dtype=bool)
    roles = _mark_roles(n, None, truth_arr)
    panels = []
    for row in range(p):
        for col in range(p):
            if row == col:
                coords = ms_coordinates(marginals[row], mode="full")
                panels.append(
                    _scatter_panel(
                        coords[:, 0],
                        coords[:, 1],
                        roles,
                        "MO",
                        "VO",
                        title=f"dim {row + 1}",
                    )
                )
            else:
                key = (min(row, col), max(row, col))
                joint = joints[key]
                coords = ms_coordinates(joint, mode="norm")
                panels.append(
                    _scatter_panel(
                        coords[:, 0],
                        coords[:, 1],
                        roles,
                        "‖MO‖",
                        "VO",
                        title=f"dims {key[0] + 1},{key[1] + 1}",
                    )
                )
    return PlotDocument("svg", _document(panels, p, p), n)


def emit_outliergram(
    summary: OutlyingnessSummary,
    *,
    fmt: str = "svg",
    truth=None,
    ids: Sequence[str] | None = None,
) -> PlotDocument:
    """Scatter of (||mo||, fo) against the reference parabola fo = ||mo||^2.

    The vertical gap between a mark and the parabola is exactly the curve's
    shape outlyingness, so marks never fall below it (within roundoff).
    """
    if fmt not in ("svg", "csv"):
        raise ShapeMismatch(f"unknown format {fmt!r}, expected 'svg' or 'csv'")
    n = summary.n
    if ids is None:
        ids = default_ids(n)
    mo_norm = summary.mo_norm
    if fmt == "csv":
        header = ["id", "mo_norm", "fo", "vo_gap"]
        rows = [
            [
                str(ids[i]),
                repr(float(mo_norm[i])),
                repr(float(summary.fo[i])),
                repr(float(summary.fo[i] - mo_norm[i] ** 2)),
            ]
            for i in range(n)
        ]
        return PlotDocument("csv", _csv_document(header, rows), n)
    truth_arr = None if truth is None else np.asarray(truth, dtype=bool)
    roles = _mark_roles(n, None, truth_arr)
    panel = _scatter_panel(
        mo_norm,
        summary.fo,
        roles,
        "‖MO‖",
        "FO",
        parabola=True,
    )
    return PlotDocument("svg", _document([panel], 1, 1), n)
