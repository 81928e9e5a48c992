import numpy as np
import pytest
from numpy.polynomial.hermite import hermgauss

from neukol.errors import DataError, ResourceError
from neukol.measure import (build_space, check_ibp_mu, gauss_mass_1d,
                            integrate_mu, integrate_nu, rng_stream, sample_mu)

from conftest import ones


def gh_moment(lam, power, n=60):
    """Gauss-Hermite oracle for E x^power under N(0, lam)."""
    x, w = hermgauss(n)
    return float(np.sum(w * (np.sqrt(2 * lam) * x) ** power) / np.sqrt(np.pi))


class TestBuildSpace:
    def test_drift_relation_exact(self):
        sp = build_space([0.5, 0.125], box_radius=8, cells_per_axis=20)
        assert np.all(sp.drift_coeffs * sp.lambdas == -0.5)
        np.testing.assert_allclose(sp.drift_coeffs, [-1.0, -4.0])

    def test_rd_eigenvalue_example(self):
        sp = build_space([1.0 / (2 * np.pi**2)], box_radius=8, cells_per_axis=20)
        np.testing.assert_allclose(sp.drift_coeffs, [-np.pi**2], rtol=1e-14)

    def test_weight_sum_matches_exact_mass(self, space_2d):
        total = float(np.sum(space_2d.mu_node_weights()))
        assert abs(total - space_2d.box_mass()) < 1e-12

    def test_invalid_spectrum(self):
        with pytest.raises(DataError):
            build_space([0.5, -1.0], box_radius=8, cells_per_axis=20)
        with pytest.raises(DataError):
            build_space([0.5], box_radius=3.0, cells_per_axis=20)
        with pytest.raises(DataError):
            build_space([0.5], box_radius=8.0, cells_per_axis=21)

    def test_node_cap(self):
        with pytest.raises(ResourceError):
            build_space([0.5, 0.5, 0.5], box_radius=8, cells_per_axis=400)


class TestIntegrateMu:
    def test_total_mass(self, space_1d):
        assert abs(integrate_mu(space_1d, ones(space_1d)) - 1.0) < 1e-10

    def test_second_moment(self, space_1d):
        val = integrate_mu(space_1d, lambda X: X[..., 0] ** 2)
        assert abs(val - 0.5) < 1e-6

    def test_fourth_moment_against_hermgauss(self, space_1d):
        oracle = gh_moment(0.5, 4)
        assert abs(oracle - 0.75) < 1e-12
        val = integrate_mu(space_1d, lambda X: X[..., 0] ** 4)
        assert abs(val - oracle) < 1e-5 * oracle

    @pytest.mark.parametrize("power", [1, 2, 3, 4])
    def test_moments_2d(self, space_2d, power):
        for k in (0, 1):
            val = integrate_mu(space_2d, lambda X: X[..., k] ** power)
            oracle = gh_moment(space_2d.lambdas[k], power)
            assert abs(val - oracle) <= 1e-5 * max(abs(oracle), 1e-3)

    def test_nan_rejected(self, space_1d):
        f = ones(space_1d)
        f[3] = np.nan
        with pytest.raises(DataError):
            integrate_mu(space_1d, f)

    def test_qmc_branch(self):
        sp = build_space([0.5, 0.4, 0.3, 0.2], box_radius=8, cells_per_axis=16,
                         qmc_samples=2**12)
        assert not sp.grid.is_tensor
        val = integrate_mu(sp, lambda X: X[..., 0] ** 2)
        assert abs(val - 0.5) < 0.05


class TestIntegrateNu:
    def test_zero_potential_equals_mu(self, space_1d):
        f = lambda X: 1 + X[..., 0] ** 2
        assert integrate_nu(space_1d, f, None) == integrate_mu(space_1d, f)

    def test_constant_potential(self, space_1d):
        f = ones(space_1d)
        c = 0.7
        a = integrate_nu(space_1d, f, lambda X: np.full(X.shape[:-1], c))
        b = np.exp(-2 * c) * integrate_mu(space_1d, f)
        assert abs(a - b) < 1e-12 * abs(b)

    def test_gaussian_times_gaussian(self, space_1d):
        # int e^{-2x^2} dmu for mu = N(0,1/2): closed form 1/sqrt(3)
        val = integrate_nu(space_1d, ones(space_1d), lambda X: X[..., 0] ** 2)
        assert abs(val - 1 / np.sqrt(3)) < 1e-6

    def test_monotone_in_potential(self, space_1d):
        f = lambda X: 1 + X[..., 0] ** 2
        u1 = lambda X: np.abs(X[..., 0])
        u2 = lambda X: np.abs(X[..., 0]) + 0.3
        assert integrate_nu(space_1d, f, u1) >= integrate_nu(space_1d, f, u2)

    def test_bounded_by_mass(self, space_1d):
        # U >= C  =>  nu(X) <= e^{-2C} mu(X)
        C = -0.2
        u = lambda X: np.maximum(np.abs(X[..., 0]), C)
        assert integrate_nu(space_1d, ones(space_1d), u) <= \
            np.exp(-2 * C) * integrate_mu(space_1d, ones(space_1d)) + 1e-14

    def test_infinite_potential_nodes_ok(self, space_1d):
        def u(X):
            out = np.zeros(X.shape[:-1])
            out[X[..., 0] > 1.0] = np.inf
            return out
        v = integrate_nu(space_1d, ones(space_1d), u)
        assert 0 < v < 1

    def test_all_infinite_degenerate(self, space_1d):
        with pytest.raises(DataError):
            integrate_nu(space_1d, ones(space_1d),
                         lambda X: np.full(X.shape[:-1], np.inf))


def bump(width, center=0.0):
    return lambda X: np.exp(-(X[..., 0] - center) ** 2 / (2 * width**2))


class TestIntegrationByParts:
    def test_linear_phi(self, space_1d):
        res = check_ibp_mu(space_1d, lambda X: X[..., 0], ones(space_1d), 0)
        assert res < 1e-6

    def test_constants_odd_moment(self, space_1d):
        res = check_ibp_mu(space_1d, ones(space_1d), ones(space_1d), 0)
        assert res < 1e-10

    def test_bump_pair_h2_rate(self):
        w = 1.5 * np.sqrt(0.5)
        phi, psi = bump(w, center=0.4), bump(w, center=-0.3)
        residuals = []
        for m in (100, 200, 400):
            sp = build_space([0.5], box_radius=8.0, cells_per_axis=m)
            h = float(sp.grid.cell_size[0])
            r = check_ibp_mu(sp, phi, psi, 0)
            residuals.append((h, r))
            assert r <= 10 * h**2
        hs = np.log([h for h, _ in residuals])
        rs = np.log([r for _, r in residuals])
        order = np.polyfit(hs, rs, 1)[0]
        assert order > 1.7

    def test_absolute_level_fine_grid(self):
        sp = build_space([0.5], box_radius=8.0, cells_per_axis=400)
        w = 2 * np.sqrt(0.5)
        assert check_ibp_mu(sp, bump(w, 0.4), bump(w, -0.3), 0) <= 1e-5


class TestSampling:
    def test_deterministic(self, space_1d):
        a = sample_mu(space_1d, seed=42, count=2)
        b = sample_mu(space_1d, seed=42, count=2)
        np.testing.assert_array_equal(a, b)

    def test_worker_streams_disjoint(self, space_1d):
        a = sample_mu(space_1d, seed=42, count=100, worker_id=0)
        b = sample_mu(space_1d, seed=42, count=100, worker_id=1)
        assert np.abs(a - b).min() > 0

    def test_variance_band(self, space_1d):
        x = sample_mu(space_1d, seed=7, count=10**6)
        v = float(np.var(x[:, 0]))
        assert 0.497 <= v <= 0.503

    def test_mean_band(self, space_1d):
        x = sample_mu(space_1d, seed=8, count=10**6)
        assert abs(float(np.mean(x[:, 0]))) <= 0.003

    def test_count_validation(self, space_1d):
        with pytest.raises(DataError):
            sample_mu(space_1d, seed=1, count=0)

    def test_rng_stream_reproducible(self):
        assert rng_stream(3, 1).standard_normal(4) == pytest.approx(
            rng_stream(3, 1).standard_normal(4))
