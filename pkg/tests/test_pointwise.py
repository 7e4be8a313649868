import numpy as np
import pytest

from msplot.errors import (
    DegenerateCrossSection,
    DegenerateSample,
    ShapeMismatch,
    UseClosedForm,
)
from msplot.fdmodel import uniform_grid, validate
from msplot.pointwise import (
    DirectionSet,
    deepest_point,
    directional_outlyingness_1d,
    pointwise_field,
    sample_directions,
    sdo_md,
)


def angle_grid_sdo(x, cross_section, n_angles=3600):
    """Brute-force oracle: SDO maximized over a dense angular grid (p=2)."""
    theta = np.linspace(0.0, np.pi, n_angles, endpoint=False)
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    proj = dirs @ np.asarray(cross_section).T
    med = np.median(proj, axis=1)
    mad = np.median(np.abs(proj - med[:, None]), axis=1)
    px = dirs @ np.asarray(x)
    ok = mad > 0
    return float(np.max(np.abs(px[ok] - med[ok]) / mad[ok]))


class TestOutlyingness1d:
    def test_unit_above_median(self):
        assert directional_outlyingness_1d(1.0, [-1.0, 0.0, 1.0]) == 1.0

    def test_at_median(self):
        assert directional_outlyingness_1d(0.0, [-1.0, 0.0, 1.0]) == 0.0

    def test_sign_encodes_direction(self):
        assert directional_outlyingness_1d(-3.0, [-1.0, 0.0, 1.0]) == -3.0

    def test_zero_mad_degenerate(self):
        with pytest.raises(DegenerateCrossSection):
            directional_outlyingness_1d(1.0, [5.0, 5.0, 5.0])


class TestSampleDirections:
    def test_unit_norms(self):
        ds = sample_directions(200, 2, seed=1)
        np.testing.assert_allclose(np.linalg.norm(ds.directions, axis=1), 1.0, atol=1e-12)

    def test_reproducible_bit_identical(self):
        a = sample_directions(64, 3, seed=99)
        b = sample_directions(64, 3, seed=99)
        np.testing.assert_array_equal(a.directions, b.directions)

    def test_different_seeds_differ(self):
        a = sample_directions(8, 2, seed=0)
        b = sample_directions(8, 2, seed=1)
        assert not np.array_equal(a.directions, b.directions)

    def test_p1_uses_closed_form(self):
        with pytest.raises(UseClosedForm):
            sample_directions(10, 1, seed=1)

    def test_needs_positive_count(self):
        with pytest.raises(ShapeMismatch):
            sample_directions(0, 2, seed=1)


class TestSdoMd:
    def test_agrees_with_angle_grid_oracle(self):
        rng = np.random.default_rng(3)
        cloud = rng.multivariate_normal([0, 0], [[2.0, 0.7], [0.7, 1.0]], size=50)
        queries = rng.multivariate_normal([0, 0], [[2.0, 0.7], [0.7, 1.0]], size=30)
        dirs = sample_directions(500, 2, seed=11)
        devs = []
        for x in queries:
            approx = sdo_md(x, cloud, dirs)
            exact = angle_grid_sdo(x, cloud)
            assert approx <= exact * (1 + 1e-9)  # max over subset can't exceed sup
            devs.append(abs(approx - exact) / exact)
        assert np.median(devs) <= 0.05

    def test_deepest_point_attains_min_sdo(self):
        rng = np.random.default_rng(5)
        cloud = rng.normal(size=(40, 2))
        dirs = sample_directions(300, 2, seed=7)
        sdos = np.array([sdo_md(cloud[i], cloud, dirs) for i in range(40)])
        idx = deepest_point(cloud, dirs)
        assert sdos[idx] == sdos.min()
        # symmetric sample: the center's own SDO is the sample minimum
        sym = np.vstack([cloud, -cloud, [[0.0, 0.0]]])
        center_sdo = sdo_md([0.0, 0.0], sym, dirs)
        sym_sdos = [sdo_md(pt, sym, dirs) for pt in sym]
        assert center_sdo == min(sym_sdos)

    def test_identical_points_degenerate(self):
        cloud = np.ones((10, 2))
        dirs = sample_directions(16, 2, seed=0)
        with pytest.raises(DegenerateSample):
            sdo_md([1.0, 1.0], cloud, dirs)

    def test_monotone_refinement(self):
        rng = np.random.default_rng(9)
        cloud = rng.normal(size=(30, 2))
        x = rng.normal(size=2)
        small = sample_directions(50, 2, seed=4)
        merged = DirectionSet(
            np.vstack([small.directions, sample_directions(50, 2, seed=5).directions]),
            seed=-1,
        )
        assert sdo_md(x, cloud, merged) >= sdo_md(x, cloud, small)


class TestDeepestPoint:
    def test_univariate_median_is_sample_point(self):
        assert deepest_point(np.array([-1.0, 0.0, 1.0])) == 1

    def test_tie_breaks_to_lowest_index(self):
        assert deepest_point(np.array([0.0, 0.0, 1.0])) == 0

    def test_2d_exhaustive(self):
        rng = np.random.default_rng(21)
        cloud = rng.normal(size=(25, 2))
        dirs = sample_directions(200, 2, seed=2)
        sdos = [sdo_md(pt, cloud, dirs) for pt in cloud]
        assert deepest_point(cloud, dirs) == int(np.argmin(sdos))


class TestPointwiseField:
    def test_three_constant_curves(self):
        g = uniform_grid(4, (0, 1))
        vals = np.tile(np.array([0.0, 1.0, 2.0])[:, None], (1, 4))
        field = pointwise_field(validate(vals, g))
        np.testing.assert_array_equal(field.o_values[0, :, 0], -np.ones(4))
        np.testing.assert_array_equal(field.o_values[1, :, 0], np.zeros(4))
        np.testing.assert_array_equal(field.o_values[2, :, 0], np.ones(4))

    def test_deepest_curve_has_zero_field(self):
        # curve 0 sits at the per-t deepest value of a symmetric bundle
        g = uniform_grid(5, (0, 1))
        t = g.t
        offsets = np.array([0.0, 1.0, -1.0, 2.0, -2.0])
        vals = np.stack([np.sin(t) + c for c in offsets])[:, :, None]
        vals = np.concatenate([vals, vals * 0.5 + 1.0], axis=2)  # p = 2
        field = pointwise_field(validate(vals, g), sample_directions(100, 2, seed=1))
        np.testing.assert_array_equal(field.o_values[0], np.zeros((5, 2)))

    def test_norm_equals_sdo_bivariate(self):
        rng = np.random.default_rng(17)
        g = uniform_grid(6, (0, 1))
        vals = rng.normal(size=(20, 6, 2))
        dirs = sample_directions(150, 2, seed=3)
        field = pointwise_field(validate(vals, g), dirs)
        norms = np.linalg.norm(field.o_values, axis=2)
        for j in range(6):
            cross = vals[:, j, :]
            deepest = deepest_point(cross, dirs)
            for i in range(20):
                sdo = sdo_md(cross[i], cross, dirs)
                if i == deepest:
                    assert norms[i, j] == 0.0
                else:
                    assert abs(norms[i, j] - sdo) <= 1e-12 * max(1.0, sdo)

    def test_degenerate_cross_section_reports_index(self):
        g = uniform_grid(3, (0, 1))
        vals = np.array([[0.0, 5.0, 1.0], [1.0, 5.0, 2.0], [2.0, 5.0, 0.0]])
        with pytest.raises(DegenerateCrossSection) as err:
            pointwise_field(validate(vals, g))
        assert "1" in str(err.value)

    def test_translation_invariance_1d(self):
        rng = np.random.default_rng(2)
        g = uniform_grid(7, (0, 1))
        vals = rng.normal(size=(12, 7))
        base = pointwise_field(validate(vals, g)).o_values
        shifted = pointwise_field(validate(vals + 7.25, g)).o_values
        np.testing.assert_allclose(shifted, base, rtol=0, atol=1e-12)

    def test_translation_invariance_fixed_directions(self):
        rng = np.random.default_rng(4)
        g = uniform_grid(5, (0, 1))
        vals = rng.normal(size=(15, 5, 2))
        dirs = sample_directions(120, 2, seed=8)
        base = pointwise_field(validate(vals, g), dirs).o_values
        shifted = pointwise_field(validate(vals + np.array([3.5, -1.25]), g), dirs).o_values
        np.testing.assert_allclose(shifted, base, rtol=0, atol=1e-10)

    def test_scale_equivariance_1d_power_of_two(self):
        rng = np.random.default_rng(6)
        g = uniform_grid(5, (0, 1))
        vals = rng.normal(size=(9, 5))
        base = pointwise_field(validate(vals, g)).o_values
        doubled = pointwise_field(validate(2.0 * vals, g)).o_values
        np.testing.assert_array_equal(doubled, base)
        negated = pointwise_field(validate(-2.0 * vals, g)).o_values
        np.testing.assert_array_equal(negated, -base)

    def test_scale_equivariance_1d_general(self):
        rng = np.random.default_rng(8)
        g = uniform_grid(4, (0, 1))
        vals = rng.normal(size=(11, 4))
        base = pointwise_field(validate(vals, g)).o_values
        scaled = pointwise_field(validate(3.0 * vals, g)).o_values
        np.testing.assert_allclose(scaled, base, rtol=1e-12, atol=1e-12)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(10)
        g = uniform_grid(5, (0, 1))
        vals = rng.normal(size=(8, 5, 2))
        dirs = sample_directions(80, 2, seed=12)
        base = pointwise_field(validate(vals, g), dirs).o_values
        perm = rng.permutation(8)
        permuted = pointwise_field(validate(vals[perm], g), dirs).o_values
        np.testing.assert_array_equal(permuted, base[perm])

    def test_direction_dimension_checked(self):
        g = uniform_grid(3, (0, 1))
        vals = np.zeros((4, 3, 2))
        vals[:, :, 0] = np.arange(4)[:, None]
        vals[:, :, 1] = np.arange(4)[:, None] ** 2
        with pytest.raises(ShapeMismatch):
            pointwise_field(validate(vals, g), sample_directions(10, 3, seed=0))
