"""Curve-level outlyingness summaries and magnitude-shape coordinates.

Integrals over the domain are weighted sums over the grid.  For each curve:

* ``mo`` is the weighted mean of its outlyingness vectors (magnitude, with
  direction),
* ``vo`` is the weighted variance of those vectors about ``mo`` (shape),
* ``fo`` is the weighted mean squared norm (total), and

``fo = ||mo||^2 + vo`` holds as an algebraic identity whenever the weights
sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidGrid, ShapeMismatch
from .fdmodel import FunctionalSample, Grid, _frozen
from .pointwise import (
    DEFAULT_N_DIRECTIONS,
    DirectionSet,
    PointwiseField,
    pointwise_field,
)

__all__ = [
    "OutlyingnessSummary",
    "summarize",
    "summarize_sample",
    "ms_coordinates",
    "array_summaries",
]


@dataclass(frozen=True)
class OutlyingnessSummary:
    """Per-curve magnitude (mo), shape (vo) and total (fo) outlyingness."""

    mo: np.ndarray  # (n, p)
    vo: np.ndarray  # (n,)
    fo: np.ndarray  # (n,)

    def __post_init__(self):
        object.__setattr__(self, "mo", _frozen(self.mo))
        object.__setattr__(self, "vo", _frozen(self.vo))
        object.__setattr__(self, "fo", _frozen(self.fo))

    @property
    def n(self) -> int:
        return self.mo.shape[0]

    @property
    def p(self) -> int:
        return self.mo.shape[1]

    @property
    def mo_norm(self) -> np.ndarray:
        return np.linalg.norm(self.mo, axis=1)


def summarize(field: PointwiseField, grid: Grid) -> OutlyingnessSummary:
    """Aggregate a point-wise field into per-curve (mo, vo, fo).

    Raises
    ------
    InvalidGrid
        If the grid weights do not sum to 1 within 1e-9 (the decomposition
        identity would silently break).
    ShapeMismatch
        If the field and grid disagree on the number of grid points.
    """
    o = field.o_values
    w = np.asarray(grid.weights, dtype=float)
    if o.shape[1] != w.shape[0]:
        raise ShapeMismatch(
            f"field has {o.shape[1]} grid columns but the grid has {w.shape[0]} points"
        )
    wsum = float(np.sum(w))
    if abs(wsum - 1.0) > 1e-9:
        raise InvalidGrid(f"grid weights sum to {wsum!r}, expected 1 within 1e-9")
    mo = (o * w[None, :, None]).sum(axis=1)  # (n, p)
    sq_norm = (o * o).sum(axis=2)  # (n, m)
    fo = (sq_norm * w[None, :]).sum(axis=1)
    centered = o - mo[:, None, :]
    vo = ((centered * centered).sum(axis=2) * w[None, :]).sum(axis=1)
    return OutlyingnessSummary(mo, vo, fo)


def summarize_sample(
    sample: FunctionalSample,
    dims: Sequence[int] | None = None,
    dirs: DirectionSet | None = None,
    *,
    n_directions: int = DEFAULT_N_DIRECTIONS,
    seed: int = 0,
) -> OutlyingnessSummary:
    """Point-wise field plus aggregation in one call.

    ``dims`` restricts the sample to a subset of response dimensions first,
    which is how marginal and pairwise-joint summaries are produced.
    """
    if dims is not None:
        sample = sample.select_dims(dims)
    field = pointwise_field(sample, dirs, n_directions=n_directions, seed=seed)
    return summarize(field, sample.grid)


def ms_coordinates(summary: OutlyingnessSummary, mode: str = "full") -> np.ndarray:
    """Magnitude-shape coordinates, one row per curve.

    ``full`` returns ``(mo_1, ..., mo_p, vo)`` rows of width p + 1;
    ``norm`` returns ``(||mo||, vo)`` rows of width 2.
    """
    if mode == "full":
        return np.hstack([summary.mo, summary.vo[:, None]])
    if mode == "norm":
        return np.hstack([summary.mo_norm[:, None], summary.vo[:, None]])
    raise ShapeMismatch(f"unknown mode {mode!r}, expected 'full' or 'norm'")


def array_summaries(
    sample: FunctionalSample,
    *,
    n_directions: int = DEFAULT_N_DIRECTIONS,
    seed: int = 0,
) -> tuple[list[OutlyingnessSummary], Mapping[tuple[int, int], OutlyingnessSummary]]:
    """Marginal and pairwise-joint summaries for the plot array.

    Returns one univariate summary per response dimension and one bivariate
    summary per unordered pair ``(k, l)`` with ``k < l``.
    """
    marginals = [
        summarize_sample(sample, dims=[k], n_directions=n_directions, seed=seed)
        for k in range(sample.p)
    ]
    joints = {
        (k, l): summarize_sample(
            sample, dims=[k, l], n_directions=n_directions, seed=seed
        )
        for k in range(sample.p)
        for l in range(k + 1, sample.p)
    }
    return marginals, joints
