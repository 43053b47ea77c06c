import numpy as np
import pytest

from actmon import projection
from actmon.errors import DegenerateData, ShapeMismatch


def power_iteration_components(x, k, iterations=5000, seed=0):
    """Independent PCA oracle: deflated power iteration on the covariance."""
    x = np.asarray(x, float)
    cov = np.cov(x, rowvar=False)
    rng = np.random.default_rng(seed)
    comps, vals = [], []
    for _ in range(k):
        v = rng.standard_normal(cov.shape[0])
        v /= np.linalg.norm(v)
        for _ in range(iterations):
            w = cov @ v
            norm = np.linalg.norm(w)
            if norm == 0:
                break
            v = w / norm
        lam = float(v @ cov @ v)
        comps.append(v)
        vals.append(lam)
        cov = cov - lam * np.outer(v, v)
    return np.array(comps), np.array(vals)


class TestFitPca:
    def test_line_y_equals_x(self):
        t = np.linspace(-1, 1, 20)
        pts = np.stack([t, t], axis=1)
        proj = projection.fit_pca(pts, variance_target=0.99)
        assert proj.k == 1
        np.testing.assert_allclose(np.abs(proj.components[0]), [np.sqrt(0.5)] * 2, atol=1e-12)
        # sign convention: largest-magnitude entry positive
        assert proj.components[0][0] > 0

    def test_full_target_preserves_distances(self):
        rng = np.random.default_rng(3)
        pts = rng.standard_normal((40, 4))
        proj = projection.fit_pca(pts, variance_target=1.0)
        assert proj.k == 4
        out = projection.transform(proj, pts)
        for i in range(0, 40, 7):
            for j in range(1, 40, 11):
                orig = np.linalg.norm(pts[i] - pts[j])
                new = np.linalg.norm(out[i] - out[j])
                assert abs(orig - new) <= 1e-8

    def test_against_power_iteration_oracle(self):
        rng = np.random.default_rng(17)
        # anisotropic 5-D data so eigenvalues are well separated
        scales = np.array([3.0, 2.0, 1.2, 0.5, 0.1])
        pts = rng.standard_normal((50, 5)) * scales
        proj = projection.fit_pca(pts, variance_target=1.0)
        oracle_comps, oracle_vals = power_iteration_components(pts, proj.k)
        for mine, ref, lam_mine, lam_ref in zip(
            proj.components, oracle_comps, proj.explained_variance, oracle_vals
        ):
            assert abs(abs(mine @ ref) - 1.0) < 1e-6
            assert abs(lam_mine - lam_ref) < 1e-6

    def test_reconstruction_error_small_at_full_rank(self):
        rng = np.random.default_rng(5)
        pts = rng.standard_normal((50, 5))
        proj = projection.fit_pca(pts, variance_target=1.0)
        rebuilt = proj.mean + projection.transform(proj, pts) @ proj.components
        np.testing.assert_allclose(rebuilt, pts, atol=1e-6)

    def test_orthonormal_components(self):
        rng = np.random.default_rng(8)
        pts = rng.standard_normal((30, 6))
        proj = projection.fit_pca(pts, variance_target=0.9)
        gram = proj.components @ proj.components.T
        np.testing.assert_allclose(gram, np.eye(proj.k), atol=1e-8)

    def test_variance_accounting(self):
        rng = np.random.default_rng(9)
        pts = rng.standard_normal((30, 4)) * np.array([2.0, 1.0, 0.5, 0.1])
        target = 0.9
        proj = projection.fit_pca(pts, variance_target=target)
        total = np.cov(pts, rowvar=False).trace()
        assert proj.explained_variance.sum() <= total + 1e-8
        assert proj.explained_variance.sum() / total >= target - 1e-12
        assert all(
            a >= b for a, b in zip(proj.explained_variance, proj.explained_variance[1:])
        )

    def test_degenerate_data(self):
        pts = np.ones((5, 3))
        with pytest.raises(DegenerateData):
            projection.fit_pca(pts)

    def test_deterministic(self):
        rng = np.random.default_rng(10)
        pts = rng.standard_normal((25, 4))
        p1 = projection.fit_pca(pts, 0.95)
        p2 = projection.fit_pca(pts, 0.95)
        np.testing.assert_array_equal(p1.components, p2.components)


class TestTransform:
    def test_mean_maps_to_zero(self):
        rng = np.random.default_rng(2)
        pts = rng.standard_normal((20, 3))
        proj = projection.fit_pca(pts, 1.0)
        np.testing.assert_allclose(projection.transform(proj, proj.mean), 0.0, atol=1e-12)

    def test_linearity_on_centered_inputs(self):
        rng = np.random.default_rng(4)
        pts = rng.standard_normal((20, 3))
        proj = projection.fit_pca(pts, 1.0)
        a, b = rng.standard_normal(3), rng.standard_normal(3)
        lhs = projection.transform(proj, proj.mean + a + b)
        rhs = projection.transform(proj, proj.mean + a) + projection.transform(
            proj, proj.mean + b
        )
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_hand_example(self):
        proj = projection.Projection(
            mean=np.array([1.0, 0.0, 2.0]),
            components=np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
            explained_variance=np.array([2.0, 1.0]),
        )
        out = projection.transform(proj, np.array([3.0, 9.0, 5.0]))
        # components @ (v - mean) = [(3-1), (5-2)]
        np.testing.assert_array_equal(out, [2.0, 3.0])

    def test_shape_mismatch(self):
        proj = projection.identity_projection(3)
        with pytest.raises(ShapeMismatch):
            projection.transform(proj, np.array([1.0, 2.0]))


class TestIdentityProjection:
    def test_is_identity_map(self):
        proj = projection.identity_projection(3)
        rng = np.random.default_rng(0)
        for _ in range(5):
            v = rng.standard_normal(3)
            np.testing.assert_array_equal(projection.transform(proj, v), v)

    def test_k_equals_dim(self):
        assert projection.identity_projection(4).k == 4

    def test_norm_preserved_after_full_rank_pca(self):
        rng = np.random.default_rng(6)
        pts = rng.standard_normal((30, 3))
        proj = projection.fit_pca(pts, 1.0)
        centered = pts - proj.mean
        out = projection.transform(proj, pts)
        np.testing.assert_allclose(
            np.linalg.norm(centered, axis=1), np.linalg.norm(out, axis=1), atol=1e-8
        )
