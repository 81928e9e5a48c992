import numpy as np
import pytest
from scipy.optimize import brentq

from neukol.convex import (Ellipsoid, Halfspace, Hypograph, check_convexity,
                           neg_quadratic_hypograph, surface_band)
from neukol.errors import GeometryError
from neukol.measure import build_space, sample_mu

from conftest import ones

HALF = Halfspace(direction=np.array([1.0, 0.0]), offset=0.0)
ELL = Ellipsoid(alphas=np.array([1.0, 4.0]), radius=2.0)


class TestProjection:
    def test_halfspace_example(self):
        np.testing.assert_allclose(HALF.project(np.array([3.0, 5.0])), [0.0, 5.0])

    def test_halfspace_distance(self):
        assert HALF.distance(np.array([3.0, 5.0])) == pytest.approx(3.0)
        assert HALF.distance(np.array([-1.0, 2.0])) == 0.0

    def test_ellipsoid_axis_point(self):
        np.testing.assert_allclose(ELL.project(np.array([0.0, 2.0])), [0.0, 1.0],
                                   atol=1e-10)

    def test_ellipsoid_lagrange_oracle(self):
        # independent scalar-root oracle: z = x/(1+t a), G(z(t)) = 0 by brentq
        x = np.array([3.0, 1.0])
        a = ELL.alphas

        def g(t):
            z = x / (1 + t * a)
            return float(np.sum(a * z**2) - ELL.radius**2)

        t_star = brentq(g, 0.0, 50.0, xtol=1e-14)
        oracle = x / (1 + t_star * a)
        p = ELL.project(x)
        np.testing.assert_allclose(p, oracle, atol=1e-8)
        assert abs(ELL.value(p)) < 1e-8
        # x - p parallel to DG(p)
        d = x - p
        dg = ELL.grad(p)
        cross = d[0] * dg[1] - d[1] * dg[0]
        assert abs(cross) < 1e-8 * np.linalg.norm(d) * np.linalg.norm(dg)
        assert ELL.distance(x) == pytest.approx(np.linalg.norm(x - oracle), abs=1e-8)

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(200, 2)) * 2
        for body in (HALF, ELL):
            P = body.project(X)
            np.testing.assert_allclose(body.project(P), P, atol=1e-10)

    def test_firmly_nonexpansive(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(100, 2)) * 3
        Y = rng.normal(size=(100, 2)) * 3
        for body in (HALF, ELL):
            lhs = np.linalg.norm(body.project(X) - body.project(Y), axis=-1)
            rhs = np.linalg.norm(X - Y, axis=-1)
            assert np.all(lhs <= rhs + 1e-12)

    def test_normal_cone(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(50, 2)) * 3
        Z = ELL.project(rng.normal(size=(200, 2)))   # points of C
        P = ELL.project(X)
        for i in range(len(X)):
            inner = (X[i] - P[i]) @ (Z - P[i]).T
            assert np.max(inner) <= 1e-8 * max(1.0, np.linalg.norm(X[i] - P[i]))

    def test_distance_sq_gradient(self):
        # grad dist^2 = 2 (x - proj x), checked by finite differences
        rng = np.random.default_rng(3)
        X = rng.normal(size=(20, 2)) * 3
        X = X[ELL.distance(X) > 0.1]
        eps = 1e-6
        for x in X:
            g = 2 * (x - ELL.project(x))
            for k in range(2):
                e = np.zeros(2)
                e[k] = eps
                fd = (ELL.distance(x + e) ** 2 - ELL.distance(x - e) ** 2) / (2 * eps)
                assert abs(fd - g[k]) < 1e-4 * max(1.0, abs(g[k]))


class TestHypograph:
    def test_affine_is_exact(self):
        from neukol.convex import affine_hypograph
        body = affine_hypograph(0, [0.5], offset=1.0)   # x1 <= 1 + 0.5 x2
        x = np.array([4.0, 2.0])
        p = body.project(x)
        # oracle: projection onto halfspace x1 - 0.5 x2 <= 1
        nvec = np.array([1.0, -0.5])
        oracle = x - max(0.0, (x @ nvec - 1.0)) / (nvec @ nvec) * nvec
        np.testing.assert_allclose(p, oracle, atol=1e-9)

    def test_neg_quadratic_projection(self):
        body = neg_quadratic_hypograph(0, [0.5], offset=1.0)  # x1 <= 1 - 0.5 x2^2
        rng = np.random.default_rng(4)
        X = rng.normal(size=(100, 2)) * 2
        P = body.project(X)
        assert np.max(body.value(P)) < 1e-8
        np.testing.assert_allclose(body.project(P), P, atol=1e-8)
        # variational characterization against sampled members of C
        Z = body.project(rng.normal(size=(200, 2)) * 2)
        out = body.value(X) > 1e-12
        for i in np.flatnonzero(out)[:20]:
            inner = (X[i] - P[i]) @ (Z - P[i]).T
            assert np.max(inner) <= 1e-6


class TestConvexityCheck:
    def test_ellipsoid_clean(self, space_2d):
        rep = check_convexity(ELL, space_2d, samples=300, seed=0)
        assert rep["violations"] == 0

    def test_hypograph_clean(self, space_2d):
        body = neg_quadratic_hypograph(0, [1.0], offset=0.5)
        rep = check_convexity(body, space_2d, samples=300, seed=1)
        assert rep["violations"] == 0

    def test_corrupted_concavity_flagged(self, space_2d):
        # convex bump instead of a concave map: segment test must fire
        bad = Hypograph(axis=0, F=lambda Y: 0.25 * Y[..., 0] ** 2,
                        gradF=lambda Y: 0.5 * Y, hess_diag=np.array([0.5]))
        rep = check_convexity(bad, space_2d, samples=400, seed=2)
        assert rep["violations"] >= 1


class TestSurfaceBand:
    def test_halfline_gaussian_density(self):
        sp = build_space([0.5], box_radius=8.0, cells_per_axis=400)
        body = Halfspace(direction=np.array([1.0]), offset=0.0)
        band = surface_band(body, sp)
        val = band.integrate(np.ones(len(band.weights)))
        assert abs(val - 1 / np.sqrt(np.pi)) < 0.02 / np.sqrt(np.pi)

    def test_zero_integrand(self, space_2d):
        band = surface_band(ELL, space_2d)
        assert band.integrate(np.zeros(len(band.weights))) == 0.0

    def test_delta_doubling_stable(self):
        sp = build_space([0.5], box_radius=8.0, cells_per_axis=400)
        body = Halfspace(direction=np.array([1.0]), offset=0.0)
        b1 = surface_band(body, sp)
        b2 = surface_band(body, sp, delta_band=2 * b1.delta)
        i1 = b1.integrate(np.ones(len(b1.weights)))
        i2 = b2.integrate(np.ones(len(b2.weights)))
        assert abs(i2 - i1) <= 4.0 * b1.delta

    def test_empty_band(self, space_2d):
        far = Halfspace(direction=np.array([1.0, 0.0]), offset=100.0)
        with pytest.raises(GeometryError):
            surface_band(far, space_2d)

    def test_weights_positive(self, space_2d):
        band = surface_band(ELL, space_2d, potential=lambda X: np.abs(X[..., 0]))
        assert np.all(band.weights > 0)


def test_truncated_quadratic_sum_finite(space_2d):
    assert np.isfinite(np.sum(ELL.alphas**2 * space_2d.lambdas))
