"""Data model for discretized functional samples.

A :class:`Grid` holds the ordered design points of the domain together with
quadrature weights that sum to one, so that integrals over the domain become
plain weighted sums.  A :class:`FunctionalSample` binds an ``n x m x p``
tensor of curve evaluations to a grid.  Everything is validated on
construction and immutable afterwards, so instances can be shared freely
between workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DuplicateId,
    InvalidGrid,
    NonFiniteValue,
    ShapeMismatch,
)

__all__ = [
    "Grid",
    "FunctionalSample",
    "LabeledSample",
    "uniform_grid",
    "trapezoid_grid",
    "validate",
]

#: weights must sum to one within this tolerance
WEIGHT_TOL = 1e-12


def _frozen(arr: np.ndarray) -> np.ndarray:
    """Return a read-only float64 copy of ``arr``."""
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Grid:
    """Ordered design points with quadrature weights summing to one.

    Parameters
    ----------
    points : array-like, shape (m,) or (m, q)
        Domain coordinates.  A flat array is treated as a one-dimensional
        domain (q = 1) and must be strictly increasing.
    weights : array-like, shape (m,)
        Nonnegative quadrature weights; must sum to 1 within 1e-12.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise InvalidGrid("points must be an (m,) or (m, q) array")
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.shape[0] != pts.shape[0]:
            raise InvalidGrid(
                f"got {w.shape[0] if w.ndim == 1 else w.shape} weights "
                f"for {pts.shape[0]} points"
            )
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(w)):
            raise InvalidGrid("grid points and weights must be finite")
        if np.any(w < 0):
            raise InvalidGrid("weights must be nonnegative")
        if abs(float(np.sum(w)) - 1.0) > WEIGHT_TOL:
            raise InvalidGrid(
                f"weights sum to {float(np.sum(w))!r}, expected 1 within {WEIGHT_TOL}"
            )
        if pts.shape[1] == 1:
            if np.any(np.diff(pts[:, 0]) <= 0):
                raise InvalidGrid("1-D grid points must be strictly increasing")
        else:
            if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
                raise InvalidGrid("grid points must be distinct")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def m(self) -> int:
        """Number of design points."""
        return self.points.shape[0]

    @property
    def q(self) -> int:
        """Dimension of the design domain."""
        return self.points.shape[1]

    @property
    def t(self) -> np.ndarray:
        """Flat coordinate array; only defined for a 1-D domain."""
        if self.q != 1:
            raise InvalidGrid("flat coordinates are only defined for q = 1")
        return self.points[:, 0]


def uniform_grid(m: int, interval: Sequence[float] = (0.0, 1.0)) -> Grid:
    """Equally spaced grid on ``[a, b]`` with equal weights 1/m.

    Raises
    ------
    InvalidGrid
        If ``m < 2`` or the interval is empty.
    """
    m = int(m)
    if m < 2:
        raise InvalidGrid(f"need at least 2 grid points, got {m}")
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise InvalidGrid(f"interval must satisfy a < b, got [{a}, {b}]")
    points = np.linspace(a, b, m)
    weights = np.full(m, 1.0 / m)
    return Grid(points, weights)


def trapezoid_grid(points: Sequence[float]) -> Grid:
    """1-D grid with normalized trapezoidal (cell-width) weights.

    Useful for non-uniform designs; weights are proportional to the width of
    the cell around each point and normalized to sum to one.
    """
    t = np.array(points, dtype=float)
    if t.ndim != 1 or t.shape[0] < 2:
        raise InvalidGrid("trapezoid weights need a flat grid of >= 2 points")
    if np.any(np.diff(t) <= 0):
        raise InvalidGrid("1-D grid points must be strictly increasing")
    w = np.empty_like(t)
    w[0] = t[1] - t[0]
    w[-1] = t[-1] - t[-2]
    w[1:-1] = t[2:] - t[:-2]
    w /= w.sum()
    return Grid(t, w)


@dataclass(frozen=True)
class FunctionalSample:
    """n curves evaluated at m common grid points in p response dimensions.

    Construct through :func:`validate`, which checks all invariants; the
    constructor itself only freezes the arrays.
    """

    values: np.ndarray  # (n, m, p)
    grid: Grid
    ids: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        object.__setattr__(self, "ids", tuple(self.ids))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def p(self) -> int:
        return self.values.shape[2]

    def select_dims(self, dims: Sequence[int]) -> "FunctionalSample":
        """Sample restricted to the given response dimensions, same grid."""
        dims = [int(d) for d in dims]
        for d in dims:
            if not 0 <= d < self.p:
                raise ShapeMismatch(f"dimension {d} out of range for p={self.p}")
        return FunctionalSample(self.values[:, :, dims], self.grid, self.ids)


def default_ids(n: int) -> tuple[str, ...]:
    """Zero-padded generated curve labels c00, c01, ..."""
    width = max(2, len(str(max(n - 1, 0))))
    return tuple(f"c{i:0{width}d}" for i in range(n))


def validate(values, grid: Grid, ids: Sequence[str] | None = None) -> FunctionalSample:
    """Validate raw values against a grid and return a FunctionalSample.

    Parameters
    ----------
    values : array-like, shape (n, m) or (n, m, p)
        Curve evaluations; a 2-D array is treated as p = 1.
    grid : Grid
        Grid with m points.
    ids : sequence of str, optional
        Distinct curve labels; generated when omitted.

    Raises
    ------
    ShapeMismatch
        If the array is not (n, m[, p]) with n >= 1, m >= 2 matching the grid.
    NonFiniteValue
        If any entry is NaN or infinite (reported with curve id and grid index).
    DuplicateId
        If labels are not distinct.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ShapeMismatch(f"values must be (n, m) or (n, m, p), got shape {arr.shape}")
    n, m, p = arr.shape
    if n < 1 or m < 2 or p < 1:
        raise ShapeMismatch(f"need n >= 1, m >= 2, p >= 1, got (n, m, p) = {(n, m, p)}")
    if m != grid.m:
        raise ShapeMismatch(f"values have {m} grid columns but the grid has {grid.m} points")
    if ids is None:
        ids = default_ids(n)
    ids = tuple(str(i) for i in ids)
    if len(ids) != n:
        raise ShapeMismatch(f"got {len(ids)} ids for {n} curves")
    if len(set(ids)) != n:
        seen: set[str] = set()
        for label in ids:
            if label in seen:
                raise DuplicateId(f"duplicate curve id {label!r}")
            seen.add(label)
    if not np.all(np.isfinite(arr)):
        i, j, _ = np.argwhere(~np.isfinite(arr))[0]
        raise NonFiniteValue(
            f"non-finite value in curve {ids[i]!r} at grid index {j}"
        )
    return FunctionalSample(arr, grid, ids)


@dataclass(frozen=True)
class LabeledSample:
    """A sample plus ground-truth outlier flags from a generating model."""

    sample: FunctionalSample
    truth: np.ndarray  # (n,) bool

    def __post_init__(self):
        truth = np.array(self.truth, dtype=bool)
        if truth.shape != (self.sample.n,):
            raise ShapeMismatch(
                f"truth has shape {truth.shape}, expected ({self.sample.n},)"
            )
        truth.setflags(write=False)
        object.__setattr__(self, "truth", truth)
