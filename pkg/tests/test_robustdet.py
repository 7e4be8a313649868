import itertools
import math

import numpy as np
import pytest

from msplot.errors import (
    InsufficientData,
    NoBoundaryGeometry,
    ShapeMismatch,
    SingularScatter,
)
from msplot.fdmodel import uniform_grid, validate
from msplot.robustdet import (
    DetectorConfig,
    RobustFit,
    c_step,
    cutoff,
    detect_outliers,
    ellipsoid_boundary,
    estimate_df_mc,
    estimate_df_null,
    fast_mcd,
    hardin_rocke_df,
    mcd_consistency_factor,
    srmd,
)
from msplot.simulate import ModelSpec, model_sample


def subset_det(points, subset):
    return float(np.linalg.det(np.cov(points[list(subset)], rowvar=False, ddof=1)))


class TestCStep:
    def test_determinant_never_increases(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(40, 2))
        for trial in range(20):
            start = rng.choice(40, size=21, replace=False)
            stepped = c_step(pts, start)
            assert subset_det(pts, stepped) <= subset_det(pts, start) * (1 + 1e-12)

    def test_fixed_point_after_convergence(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(30, 3))
        sub = np.sort(rng.choice(30, size=17, replace=False))
        for _ in range(100):
            new = c_step(pts, sub)
            if np.array_equal(new, sub):
                break
            sub = new
        np.testing.assert_array_equal(c_step(pts, sub), sub)

    def test_identical_subset_singular(self):
        pts = np.vstack([np.ones((5, 2)), np.random.default_rng(2).normal(size=(5, 2))])
        with pytest.raises(SingularScatter):
            c_step(pts, np.arange(5))


class TestFastMcd:
    def test_unit_square_plus_far_point(self):
        pts = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [10, 10]], dtype=float)
        fit = fast_mcd(pts, h=4, n_starts=50, seed=0)
        np.testing.assert_array_equal(fit.subset, [0, 1, 2, 3])
        assert abs(fit.det - 1 / 9) < 1e-12
        # exhaustive confirmation over all 5 subsets of size 4
        dets = [subset_det(pts, s) for s in itertools.combinations(range(5), 4)]
        assert abs(min(dets) - fit.det) < 1e-12

    def test_matches_exhaustive_minimum(self):
        hits = 0
        for trial in range(20):
            rng = np.random.default_rng(1000 + trial)
            pts = rng.standard_normal((10, 2))
            exact = min(subset_det(pts, s) for s in itertools.combinations(range(10), 6))
            fit = fast_mcd(pts, h=6, n_starts=500, seed=trial)
            if abs(fit.det - exact) <= 1e-12 * max(1.0, exact):
                hits += 1
        assert hits == 20

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(60, 3))
        a = fast_mcd(pts, seed=42)
        b = fast_mcd(pts, seed=42)
        np.testing.assert_array_equal(a.subset, b.subset)
        np.testing.assert_array_equal(a.scatter, b.scatter)

    def test_det_below_random_subsets(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(size=(50, 2))
        fit = fast_mcd(pts, seed=0)
        for _ in range(50):
            sub = rng.choice(50, size=fit.h, replace=False)
            assert fit.det <= subset_det(pts, sub) * (1 + 1e-12)

    def test_identical_points_singular(self):
        with pytest.raises(SingularScatter):
            fast_mcd(np.ones((12, 2)), seed=0)

    def test_insufficient_data(self):
        with pytest.raises(InsufficientData):
            fast_mcd(np.random.default_rng(0).normal(size=(3, 2)), seed=0)

    def test_h_bounds_checked(self):
        pts = np.random.default_rng(0).normal(size=(10, 2))
        with pytest.raises(InsufficientData):
            fast_mcd(pts, h=2, seed=0)
        with pytest.raises(InsufficientData):
            fast_mcd(pts, h=11, seed=0)

    def test_full_sample_h(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(20, 2))
        fit = fast_mcd(pts, h=20, seed=0)
        np.testing.assert_array_equal(fit.subset, np.arange(20))
        np.testing.assert_allclose(fit.scatter, np.cov(pts, rowvar=False, ddof=1))

    def test_scatter_positive_definite(self):
        rng = np.random.default_rng(6)
        pts = rng.normal(size=(35, 3))
        fit = fast_mcd(pts, seed=1)
        np.linalg.cholesky(fit.scatter)  # raises if not SPD
        assert fit.det > 0


class TestSrmd:
    def _fit(self, loc, scatter, d):
        return RobustFit(
            np.asarray(loc, dtype=float),
            np.asarray(scatter, dtype=float),
            np.arange(d + 2),
            det=1.0,
            h=d + 2,
            n=10,
            d=d,
        )

    def test_zero_at_location(self):
        fit = self._fit([1.0, -2.0], np.eye(2), 2)
        assert srmd(np.array([[1.0, -2.0]]), fit)[0] == 0.0

    def test_identity_scatter_squared_norm(self):
        fit = self._fit([0.0, 0.0], np.eye(2), 2)
        assert srmd(np.array([[3.0, 4.0]]), fit)[0] == pytest.approx(25.0, abs=1e-12)

    def test_affine_invariance_when_subsets_agree(self):
        rng = np.random.default_rng(7)
        pts = rng.normal(size=(60, 2))
        amat = np.array([[2.0, 0.5], [-0.3, 1.5]])
        shift = np.array([4.0, -7.0])
        mapped = pts @ amat.T + shift
        fit1 = fast_mcd(pts, seed=9)
        fit2 = fast_mcd(mapped, seed=9)
        np.testing.assert_array_equal(fit1.subset, fit2.subset)
        np.testing.assert_allclose(srmd(mapped, fit2), srmd(pts, fit1), atol=1e-8)

    def test_dimension_check(self):
        fit = self._fit([0.0, 0.0], np.eye(2), 2)
        with pytest.raises(ShapeMismatch):
            srmd(np.zeros((3, 3)), fit)


class TestCutoff:
    def test_monotone_in_quantile(self):
        for mode in ("f", "chisq"):
            assert cutoff(2, 100, 51, 0.999, mode=mode) > cutoff(2, 100, 51, 0.99, mode=mode)

    def test_chisq_closed_form(self):
        assert cutoff(2, 100, 51, 0.99, mode="chisq") == pytest.approx(9.21034, abs=1e-5)
        assert cutoff(2, 100, 51, 0.99, mode="chisq") == pytest.approx(-2 * math.log(0.01), abs=1e-10)

    def test_quantile_domain(self):
        with pytest.raises(ShapeMismatch):
            cutoff(2, 100, 51, 1.5)

    def test_nu_override(self):
        lighter = cutoff(2, 100, 51, 0.993, mode="f", nu=1e6)
        heavier = cutoff(2, 100, 51, 0.993, mode="f", nu=5.0)
        chisq = cutoff(2, 100, 51, 0.993, mode="chisq")
        assert heavier > lighter
        assert lighter == pytest.approx(chisq, rel=1e-3)  # F tends to chi-square

    def test_gaussian_flag_rate_matches_nominal(self):
        # default F mode, d=2, n=100, q=0.993: flag rate about 0.007 +/- 0.01
        rates = []
        for r in range(200):
            rng = np.random.default_rng(20_000 + r)
            data = rng.standard_normal((100, 2))
            fit = fast_mcd(data, n_starts=100, seed=r)
            rates.append(np.mean(srmd(data, fit) > cutoff(2, 100, fit.h, 0.993)))
        assert abs(np.mean(rates) - 0.007) <= 0.01

    def test_mc_estimate_agrees_with_prediction(self):
        nu_mc = estimate_df_mc(2, 100, reps=30, seed=1)
        nu_hr = hardin_rocke_df(2, 100, 51)
        assert 0.5 <= nu_mc / nu_hr <= 2.0


class TestConsistencyFactor:
    def test_full_sample_is_one(self):
        assert mcd_consistency_factor(2, 100, 100) == 1.0

    def test_half_sample_inflates(self):
        assert mcd_consistency_factor(2, 51, 100) > 2.0


class TestDetectOutliers:
    def test_model1_outliers_all_flagged(self):
        lab = model_sample(ModelSpec(model_id=1, n=100, c=0.1, m=50, seed=7))
        _, det = detect_outliers(lab.sample)
        assert det.flags[lab.truth].all()
        assert det.method == "srmd-f"

    def test_flags_equal_srmd_rule_exactly(self):
        lab = model_sample(ModelSpec(model_id=1, n=60, c=0.1, m=30, seed=3))
        _, det = detect_outliers(lab.sample)
        np.testing.assert_array_equal(det.flags, det.srmd > det.cutoff)

    def test_insufficient_data(self):
        g = uniform_grid(5, (0, 1))
        vals = np.random.default_rng(0).normal(size=(3, 5, 2))
        with pytest.raises(InsufficientData):
            detect_outliers(validate(vals, g))

    def test_boxplot_limits(self):
        lab = model_sample(ModelSpec(model_id=1, n=50, c=0.1, m=20, seed=5))
        _, loose = detect_outliers(
            lab.sample, DetectorConfig(method="boxplot", inflation=math.inf)
        )
        assert not loose.flags.any()
        assert loose.srmd is None and loose.cutoff is None
        summary, tight = detect_outliers(
            lab.sample, DetectorConfig(method="boxplot", inflation=1e-9)
        )
        coords = np.hstack([summary.mo, summary.vo[:, None]])
        q1 = np.percentile(coords, 25, axis=0)
        q3 = np.percentile(coords, 75, axis=0)
        outside = np.any((coords < q1 - 1e-9 * (q3 - q1)) | (coords > q3 + 1e-9 * (q3 - q1)), axis=1)
        np.testing.assert_array_equal(tight.flags, outside)

    def test_boxplot_zero_inflation_limit(self):
        from msplot.robustdet import _boxplot_flags

        rng = np.random.default_rng(31)
        coords = rng.normal(size=(50, 2))
        flags = _boxplot_flags(coords, 0.0)
        q1 = np.percentile(coords, 25, axis=0)
        q3 = np.percentile(coords, 75, axis=0)
        expected = np.any((coords < q1) | (coords > q3), axis=1)
        np.testing.assert_array_equal(flags, expected)

    def test_boxplot_flags_shifted_outlier(self):
        lab = model_sample(ModelSpec(model_id=1, n=80, c=0.1, m=30, seed=11))
        _, det = detect_outliers(lab.sample, DetectorConfig(method="boxplot"))
        assert det.flags[lab.truth].all()

    def test_translation_leaves_flags_unchanged(self):
        lab = model_sample(ModelSpec(model_id=1, n=60, c=0.1, m=25, seed=13))
        cfg = DetectorConfig()
        _, det1 = detect_outliers(lab.sample, cfg)
        shifted = validate(lab.sample.values + 40.0, lab.sample.grid, lab.sample.ids)
        _, det2 = detect_outliers(shifted, cfg)
        np.testing.assert_array_equal(det1.flags, det2.flags)

    def test_boundary_present_for_low_dim(self):
        lab = model_sample(ModelSpec(model_id=1, n=60, c=0.1, m=25, seed=13))
        _, det = detect_outliers(lab.sample)
        assert det.boundary is not None
        assert det.boundary.vertices.shape[1] == 2

    def test_calibrated_mode_null_rate_small(self):
        # one seeded null sample; the calibrated cutoff should flag at most a few
        lab = model_sample(ModelSpec(model_id=1, n=100, c=0.0, m=50, seed=21))
        _, det = detect_outliers(lab.sample, DetectorConfig(cutoff_mode="calibrated"))
        assert det.flags.sum() <= 4


class TestEstimateDfNull:
    def test_cached_and_deterministic(self):
        a = estimate_df_null(40, 20, 1, reps=10, n_starts=50)
        b = estimate_df_null(40, 20, 1, reps=10, n_starts=50)
        assert a == b

    def test_heavier_than_gaussian_prediction(self):
        nu_null = estimate_df_null(100, 50, 1, reps=20, n_starts=50)
        nu_gauss = hardin_rocke_df(2, 100, 51)
        assert nu_null < nu_gauss  # functional null has the heavier tail


class TestEllipsoidBoundary:
    def _fit(self, loc, scatter):
        loc = np.asarray(loc, dtype=float)
        d = loc.shape[0]
        return RobustFit(loc, np.asarray(scatter, dtype=float), np.arange(d + 2), 1.0, d + 2, 10, d)

    def test_unit_circle(self):
        fit = self._fit([0.0, 0.0], np.eye(2))
        geom = ellipsoid_boundary(fit, threshold=1.0, resolution=64)
        assert geom.vertices.shape == (64, 2)
        np.testing.assert_allclose(np.linalg.norm(geom.vertices, axis=1), 1.0, atol=1e-12)

    def test_quadratic_form_on_boundary(self):
        rng = np.random.default_rng(23)
        a = rng.normal(size=(2, 2))
        scatter = a @ a.T + 0.5 * np.eye(2)
        loc = rng.normal(size=2)
        fit = self._fit(loc, scatter)
        geom = ellipsoid_boundary(fit, threshold=7.3, resolution=100)
        inv = np.linalg.inv(scatter)
        diff = geom.vertices - loc
        q = np.einsum("ni,ij,nj->n", diff, inv, diff)
        np.testing.assert_allclose(q, 7.3, atol=1e-9)

    def test_mesh_for_d3(self):
        rng = np.random.default_rng(29)
        a = rng.normal(size=(3, 3))
        scatter = a @ a.T + np.eye(3)
        fit = self._fit(np.zeros(3), scatter)
        geom = ellipsoid_boundary(fit, threshold=2.0, resolution=40)
        assert geom.faces is not None and geom.faces.shape[1] == 3
        inv = np.linalg.inv(scatter)
        q = np.einsum("ni,ij,nj->n", geom.vertices, inv, geom.vertices)
        np.testing.assert_allclose(q, 2.0, atol=1e-9)
        assert geom.faces.min() >= 0 and geom.faces.max() < geom.vertices.shape[0]

    def test_no_geometry_above_three(self):
        fit = self._fit(np.zeros(4), np.eye(4))
        with pytest.raises(NoBoundaryGeometry):
            ellipsoid_boundary(fit, threshold=1.0)
