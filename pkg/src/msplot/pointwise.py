"""Point-wise directional outlyingness of curve evaluations.

At every grid point the cross-section of the sample is an ``n x p`` cloud.
Each point gets an outlyingness vector ``o = sdo * v`` where ``sdo`` is its
Stahel-Donoho outlyingness (largest standardized deviation over 1-D
projections) and ``v`` is the unit vector from the deepest cross-section
point towards it.  For p = 1 this collapses to the exact closed form
``(x - median) / MAD`` with the sign carrying the direction.

The supremum over all projections is approximated by a maximum over a fixed
set of random unit directions shared across grid points, which keeps the
field smooth in t and runs reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateCrossSection,
    DegenerateSample,
    ShapeMismatch,
    UseClosedForm,
)
from .fdmodel import FunctionalSample, _frozen

__all__ = [
    "DirectionSet",
    "PointwiseField",
    "DEFAULT_N_DIRECTIONS",
    "sample_directions",
    "directional_outlyingness_1d",
    "sdo_md",
    "deepest_point",
    "pointwise_field",
]

DEFAULT_N_DIRECTIONS = 200


@dataclass(frozen=True)
class DirectionSet:
    """K unit-length projection directions in p dimensions."""

    directions: np.ndarray  # (K, p)
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "directions", _frozen(self.directions))

    @property
    def k(self) -> int:
        return self.directions.shape[0]

    @property
    def p(self) -> int:
        return self.directions.shape[1]


@dataclass(frozen=True)
class PointwiseField:
    """Directional outlyingness vectors, one per curve and grid point."""

    o_values: np.ndarray  # (n, m, p)

    def __post_init__(self):
        object.__setattr__(self, "o_values", _frozen(self.o_values))


def sample_directions(k: int, p: int, seed: int) -> DirectionSet:
    """K independent directions uniform on the unit sphere in R^p.

    Standard-normal vectors are normalized to unit length; the result is a
    pure function of ``(k, p, seed)``.

    Raises
    ------
    UseClosedForm
        If ``p < 2``; univariate outlyingness has an exact closed form and
        needs no directions.
    """
    k = int(k)
    p = int(p)
    if p < 2:
        raise UseClosedForm("p = 1 outlyingness is exact; no directions needed")
    if k < 1:
        raise ShapeMismatch(f"need at least one direction, got {k}")
    rng = np.random.default_rng(seed)
    vecs = rng.standard_normal((k, p))
    norms = np.linalg.norm(vecs, axis=1)
    while np.any(norms == 0.0):  # essentially impossible, but stay total
        bad = norms == 0.0
        vecs[bad] = rng.standard_normal((int(bad.sum()), p))
        norms = np.linalg.norm(vecs, axis=1)
    return DirectionSet(vecs / norms[:, None], seed=int(seed))


def directional_outlyingness_1d(x: float, cross_section) -> float:
    """Signed outlyingness ``(x - median) / MAD`` of a scalar against a sample.

    Raises
    ------
    DegenerateCrossSection
        If the MAD of ``cross_section`` is zero.
    """
    cs = np.asarray(cross_section, dtype=float).ravel()
    med = float(np.median(cs))
    mad = float(np.median(np.abs(cs - med)))
    if mad == 0.0:
        raise DegenerateCrossSection("cross-section has zero MAD")
    return (float(x) - med) / mad


def _projected_stats(cross_section: np.ndarray, dirs: DirectionSet):
    """Project a cross-section on every direction; return (proj, med, mad).

    ``proj`` has shape (K, n); ``med`` and ``mad`` have shape (K,).
    """
    cs = np.asarray(cross_section, dtype=float)
    if cs.ndim != 2:
        raise ShapeMismatch(f"cross_section must be (n, p), got shape {cs.shape}")
    if cs.shape[1] != dirs.p:
        raise ShapeMismatch(
            f"cross_section has p={cs.shape[1]} but directions have p={dirs.p}"
        )
    proj = dirs.directions @ cs.T  # (K, n)
    med = np.median(proj, axis=1)
    mad = np.median(np.abs(proj - med[:, None]), axis=1)
    return proj, med, mad


def sdo_md(x, cross_section, dirs: DirectionSet) -> float:
    """Stahel-Donoho outlyingness of a p-vector, maximized over ``dirs``.

    Directions along which the projected cross-section has zero MAD are
    skipped; if every direction is degenerate the sample carries no usable
    spread and :class:`DegenerateSample` is raised.
    """
    proj, med, mad = _projected_stats(cross_section, dirs)
    usable = mad > 0.0
    if not np.any(usable):
        raise DegenerateSample("all projection directions have zero MAD")
    xq = np.asarray(x, dtype=float).ravel()
    if xq.shape[0] != dirs.p:
        raise ShapeMismatch(f"query point has length {xq.shape[0]}, expected {dirs.p}")
    px = dirs.directions[usable] @ xq
    dev = np.abs(px - med[usable]) / mad[usable]
    return float(np.max(dev))


def _sample_sdo(cross_section: np.ndarray, dirs: DirectionSet) -> np.ndarray:
    """SDO of every cross-section point against its own sample, shape (n,)."""
    proj, med, mad = _projected_stats(cross_section, dirs)
    usable = mad > 0.0
    if not np.any(usable):
        raise DegenerateSample("all projection directions have zero MAD")
    dev = np.abs(proj[usable] - med[usable, None]) / mad[usable, None]
    return dev.max(axis=0)


def deepest_point(cross_section, dirs: DirectionSet | None = None) -> int:
    """Index of the cross-section point with minimal outlyingness.

    Ties break towards the lowest index.  For p = 1 the exact closed form is
    used and ``dirs`` is ignored.
    """
    cs = np.asarray(cross_section, dtype=float)
    if cs.ndim == 1:
        cs = cs[:, None]
    if cs.shape[1] == 1:
        flat = cs[:, 0]
        if np.all(flat == flat[0]):
            raise DegenerateSample("all cross-section points are identical")
        # distance to the median orders depth even when the MAD degenerates
        return int(np.argmin(np.abs(flat - np.median(flat))))
    if dirs is None:
        dirs = sample_directions(DEFAULT_N_DIRECTIONS, cs.shape[1], seed=0)
    return int(np.argmin(_sample_sdo(cs, dirs)))


def _field_1d(values: np.ndarray) -> np.ndarray:
    """Closed-form field for p = 1; values has shape (n, m)."""
    med = np.median(values, axis=0)
    mad = np.median(np.abs(values - med), axis=0)
    zero = np.nonzero(mad == 0.0)[0]
    if zero.size:
        raise DegenerateCrossSection(
            f"zero MAD at grid index {int(zero[0])}"
        )
    return (values - med) / mad


def _field_md(values: np.ndarray, dirs: DirectionSet) -> np.ndarray:
    """Random-projection field for p >= 2; values has shape (n, m, p)."""
    n, m, p = values.shape
    # (K, m, n) projections of every cross-section in one shot
    proj = np.einsum("kp,nmp->kmn", dirs.directions, values)
    med = np.median(proj, axis=2)
    mad = np.median(np.abs(proj - med[:, :, None]), axis=2)
    usable = mad > 0.0  # (K, m)
    dead = np.nonzero(~usable.any(axis=0))[0]
    if dead.size:
        raise DegenerateCrossSection(
            f"all directions have zero MAD at grid index {int(dead[0])}"
        )
    dev = np.abs(proj - med[:, :, None])
    with np.errstate(divide="ignore", invalid="ignore"):
        dev /= mad[:, :, None]
    dev[~usable] = -np.inf
    sdo = dev.max(axis=0)  # (m, n)

    deepest = sdo.argmin(axis=1)  # (m,)
    z = values[deepest, np.arange(m), :]  # (m, p)
    diff = values - z[None, :, :]
    norm = np.linalg.norm(diff, axis=2)  # (n, m)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = diff / norm[:, :, None]
    v[norm == 0.0] = 0.0
    return sdo.T[:, :, None] * v


def pointwise_field(
    sample: FunctionalSample,
    dirs: DirectionSet | None = None,
    *,
    n_directions: int = DEFAULT_N_DIRECTIONS,
    seed: int = 0,
) -> PointwiseField:
    """Directional outlyingness vector of every curve at every grid point.

    For p = 1 the exact closed form is used.  For p >= 2 one shared
    :class:`DirectionSet` (``dirs`` if given, otherwise freshly sampled from
    ``(n_directions, seed)``) approximates the projection supremum at every
    grid point; the outlyingness vector is the SDO magnitude times the unit
    vector from the deepest cross-section point, and exactly zero for the
    deepest point itself.

    Raises
    ------
    DegenerateCrossSection
        Naming the first grid index whose cross-section carries no spread.
    """
    values = sample.values
    if sample.p == 1:
        o = _field_1d(values[:, :, 0])[:, :, None]
    else:
        if dirs is None:
            dirs = sample_directions(n_directions, sample.p, seed=seed)
        elif dirs.p != sample.p:
            raise ShapeMismatch(
                f"directions have p={dirs.p} but the sample has p={sample.p}"
            )
        o = _field_md(values, dirs)
    return PointwiseField(o)
