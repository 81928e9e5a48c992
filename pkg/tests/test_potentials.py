import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from neukol.errors import ConfigurationError
from neukol.potentials import (DualModeEnvelope, IntegralPotential,
                               MoreauEnvelope, PenalizedPotential,
                               PROFILE_NAMES, scalar_profile,
                               SeparablePotential, check_my_inequality,
                               moreau_eval)
from neukol.convex import Halfspace

ALL_PROFILES = [scalar_profile(n) for n in PROFILE_NAMES]


def pot(name, **kw):
    return SeparablePotential(scalar_profile(name, **kw))


class TestScalarProfiles:
    def test_huber_is_moreau_of_abs(self):
        # envelope of |t| at level 1: t^2/2 inside [-1,1], |t|-1/2 outside
        U = pot("abs")
        t = np.linspace(-3, 3, 61)[:, None]
        val, grad = moreau_eval(U, 1.0, t)
        expected = np.where(np.abs(t[:, 0]) <= 1, t[:, 0] ** 2 / 2,
                            np.abs(t[:, 0]) - 0.5)
        np.testing.assert_allclose(val, expected, atol=1e-12)

    def test_zero_profile(self):
        val, grad = moreau_eval(pot("zero"), 0.5, np.array([[1.3]]))
        assert val == 0 and grad == 0

    def test_quadratic_half_closed_form(self):
        # U(t) = t^2/2: prox x/2 at alpha=1, envelope t^2/4, gradient t/2
        U = pot("quadratic", coef=0.5)
        t = np.linspace(-2, 2, 41)[:, None]
        val, grad = moreau_eval(U, 1.0, t)
        np.testing.assert_allclose(val, t[:, 0] ** 2 / 4, atol=1e-12)
        np.testing.assert_allclose(grad[:, 0], t[:, 0] / 2, atol=1e-12)
        # numerical argmin oracle on a fine grid
        y = np.linspace(-3, 3, 200001)
        x0 = 1.7
        brute = np.min(y**2 / 2 + (x0 - y) ** 2 / 2)
        assert abs(val[np.argmin(np.abs(t[:, 0] - x0))] - brute) < 1e-8

    def test_quartic_prox_residual(self):
        prof = scalar_profile("quartic")
        x = np.linspace(-5, 5, 101)
        for a in (1.0, 0.1, 0.003):
            p = prof.prox(x, a)
            assert np.max(np.abs(p + 4 * a * p**3 - x)) < 1e-10

    @pytest.mark.parametrize("name", PROFILE_NAMES)
    def test_prox_solves_pointwise_problem(self, name):
        prof = scalar_profile(name)
        xs = np.linspace(-4, 4, 17)
        y = np.linspace(-6, 6, 400001)
        for a in (1.0, 0.25):
            p = prof.prox(xs, a)
            for xi, pi in zip(xs, p):
                brute = y[np.argmin(prof.value(y) + (xi - y) ** 2 / (2 * a))]
                assert abs(pi - brute) < 1e-4  # grid-limited oracle

    @given(x=st.floats(-50, 50), y=st.floats(-50, 50),
           a=st.floats(1e-3, 10), idx=st.integers(0, len(ALL_PROFILES) - 1))
    @settings(max_examples=200, deadline=None)
    def test_prox_nonexpansive(self, x, y, a, idx):
        prof = ALL_PROFILES[idx]
        px, py = prof.prox(np.array([x]), a), prof.prox(np.array([y]), a)
        assert abs(px - py) <= abs(x - y) + 1e-12

    @given(x=st.floats(-20, 20), y=st.floats(-20, 20),
           t=st.floats(0, 1), idx=st.integers(0, len(ALL_PROFILES) - 1))
    @settings(max_examples=200, deadline=None)
    def test_convexity(self, x, y, t, idx):
        prof = ALL_PROFILES[idx]
        z = t * x + (1 - t) * y
        assert prof.value(np.array([z])) <= \
            t * prof.value(np.array([x])) + (1 - t) * prof.value(np.array([y])) + 1e-9


class TestMoreauLaws:
    def test_my_inequality_abs_examples(self):
        U = pot("abs")
        assert check_my_inequality(U, 1.0, np.array([[2.0]])) == 0.0
        # t=0.5: grad 0.5, minimal subgradient 1: 0.25 <= 1 - 0.25
        assert check_my_inequality(U, 1.0, np.array([[0.5]])) == 0.0

    def test_my_inequality_quadratic_random(self):
        U = pot("quadratic", coef=0.5)
        rng = np.random.default_rng(0)
        x = rng.normal(size=(100, 1)) * 3
        for a in (1.0, 0.1):
            assert check_my_inequality(U, a, x) < 1e-10

    def test_my_inequality_all_profiles(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(1000, 1)) * 2
        alphas = 10.0 ** rng.uniform(-3, 1, size=5)
        for prof in ALL_PROFILES:
            U = SeparablePotential(prof)
            for a in alphas:
                assert check_my_inequality(U, a, x) <= 1e-8

    def test_envelope_below_and_monotone(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(50, 2)) * 2
        for prof in ALL_PROFILES:
            U = SeparablePotential(prof)
            base = U.value(x)
            prev = None
            for a in (1.0, 0.3, 0.1, 0.03, 0.01):
                val = MoreauEnvelope(U, a).value(x)
                assert np.all(val <= base + 1e-12)
                assert np.all(val >= U.lower_bound - 1e-12)
                if prev is not None:
                    assert np.all(val >= prev - 1e-12)   # increases as alpha drops
                prev = val

    def test_envelope_converges_for_lipschitz(self):
        # |t| is Lipschitz on the box: gap below 1e-3 at alpha = 1e-4
        U = pot("abs")
        x = np.linspace(-5, 5, 41)[:, None]
        gap = U.value(x) - MoreauEnvelope(U, 1e-4).value(x)
        assert np.max(gap) < 1e-3

    def test_gradient_norm_monotone_bounded(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(50, 2)) * 2
        for prof in ALL_PROFILES:
            U = SeparablePotential(prof)
            g0 = np.linalg.norm(U.min_subgradient(x), axis=-1)
            prev = None
            for a in (1.0, 0.1, 0.01):
                g = np.linalg.norm(MoreauEnvelope(U, a).gradient(x), axis=-1)
                assert np.all(g <= g0 + 1e-9)
                if prev is not None:
                    assert np.all(g >= prev - 1e-9)
                prev = g

    def test_gradient_lipschitz_bound(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(100, 2)) * 3
        y = rng.normal(size=(100, 2)) * 3
        for a in (1.0, 0.2):
            env = MoreauEnvelope(pot("quartic"), a)
            num = np.linalg.norm(env.gradient(x) - env.gradient(y), axis=-1)
            den = np.linalg.norm(x - y, axis=-1)
            assert np.all(num <= den / a * (1 + 1e-10))

    def test_gradient_fd_consistency(self):
        env = MoreauEnvelope(pot("quartic"), 0.5)
        x = np.array([0.7, -1.2])
        g = env.gradient(x)
        eps = 1e-6
        for k in range(2):
            e = np.zeros(2)
            e[k] = eps
            fd = (env.value(x + e) - env.value(x - e)) / (2 * eps)
            assert abs(fd - g[k]) < 1e-4


class TestPenalized:
    BODY = Halfspace(direction=np.array([1.0, 0.0]), offset=0.5)

    def test_value_and_gradient(self):
        env = MoreauEnvelope(pot("quadratic"), 0.5)
        pen = PenalizedPotential(envelope=env, body=self.BODY, alpha=0.5)
        x = np.array([[2.5, 1.0]])
        d = self.BODY.distance(x)
        assert pen.value(x) == pytest.approx(env.value(x) + d**2 / 1.0)
        g = pen.gradient(x)
        expected = env.gradient(x) + (x - self.BODY.project(x)) / 0.5
        np.testing.assert_allclose(g, expected)

    def test_gradient_lipschitz_two_over_alpha(self):
        env = MoreauEnvelope(pot("abs"), 0.25)
        pen = PenalizedPotential(envelope=env, body=self.BODY, alpha=0.25)
        rng = np.random.default_rng(5)
        x = rng.normal(size=(200, 2)) * 2
        y = rng.normal(size=(200, 2)) * 2
        num = np.linalg.norm(pen.gradient(x) - pen.gradient(y), axis=-1)
        den = np.linalg.norm(x - y, axis=-1)
        assert np.all(num <= 2 / 0.25 * den * (1 + 1e-10))

    def test_bounded_below(self):
        env = MoreauEnvelope(pot("relu2"), 0.3)
        pen = PenalizedPotential(envelope=env, body=self.BODY, alpha=0.3)
        rng = np.random.default_rng(6)
        x = rng.normal(size=(500, 2)) * 4
        assert np.all(pen.value(x) >= pen.lower_bound - 1e-12)


class TestIntegralPotential:
    def test_zero_profile(self):
        U = IntegralPotential(scalar_profile("zero"), modes=2)
        x = np.array([[0.3, -0.7]])
        assert U.value(x) == 0
        np.testing.assert_allclose(MoreauEnvelope(U, 0.5).gradient(x), 0.0)

    def test_single_mode_quadratic(self):
        # Phi = t^2, x = c e_1: closed form c^2 (basis normalization)
        U = IntegralPotential(scalar_profile("quadratic"), modes=1)
        for c in (0.5, -1.2):
            assert U.value(np.array([[c]])) == pytest.approx(c**2, rel=1e-9)

    def test_min_subgradient_matches_fd(self):
        U = IntegralPotential(scalar_profile("quartic"), modes=3)
        x = np.array([0.4, -0.2, 0.1])
        g = U.min_subgradient(x)
        eps = 1e-5
        for k in range(3):
            e = np.zeros(3)
            e[k] = eps
            fd = (U.value(x + e) - U.value(x - e)) / (2 * eps)
            assert abs(fd - g[k]) < 1e-4

    def test_prox_nonexpansive_batch(self):
        U = IntegralPotential(scalar_profile("quartic"), modes=2)
        rng = np.random.default_rng(7)
        x = rng.normal(size=(50, 2))
        y = rng.normal(size=(50, 2))
        px, py = U.prox(x, 0.3), U.prox(y, 0.3)
        assert np.all(np.linalg.norm(px - py, axis=-1)
                      <= np.linalg.norm(x - y, axis=-1) + 1e-10)

    def test_aliasing_guard(self):
        with pytest.raises(ConfigurationError):
            IntegralPotential(scalar_profile("quadratic"), modes=4, n_xi=8)


class TestDualModeEnvelope:
    def test_resolvent_factors(self):
        env = DualModeEnvelope(scalar_profile("quartic"), alpha=0.1, modes=2)
        assert env.resolvent_factors[1] == pytest.approx(1 / (1 + 0.4 * np.pi**2),
                                                         rel=1e-15)

    def test_zero_profile(self):
        env = DualModeEnvelope(scalar_profile("zero"), alpha=0.1, modes=2)
        x = np.array([[0.2, -0.1]])
        assert env.value(x) == 0
        np.testing.assert_allclose(env.gradient(x), 0.0)

    def test_jensen_bound(self):
        env = DualModeEnvelope(scalar_profile("quartic"), alpha=0.1, modes=2)
        rng = np.random.default_rng(8)
        lams = 1.0 / (2 * (np.arange(1, 3) * np.pi) ** 4)
        x = rng.normal(size=(100, 2)) * np.sqrt(lams)
        slack = env.base_value(x) - env.value(x)
        assert np.min(slack) >= -1e-8

    def test_gradient_fd_consistency(self):
        env = DualModeEnvelope(scalar_profile("quartic"), alpha=0.2, modes=2)
        x = np.array([0.01, -0.005])
        g = env.gradient(x)
        eps = 1e-6
        for k in range(2):
            e = np.zeros(2)
            e[k] = eps
            fd = (env.value(x + e) - env.value(x - e)) / (2 * eps)
            assert abs(fd - g[k]) < 1e-4

    def test_aliasing_guard(self):
        with pytest.raises(ConfigurationError):
            DualModeEnvelope(scalar_profile("quartic"), alpha=0.1, modes=3, n_xi=10)
