"""Convex potentials, proximal maps, and inf-convolution smoothing.

A potential U is convex and bounded below; its smoothed version at level
alpha is

    U_alpha(x) = U(prox(x, alpha)) + |x - prox(x, alpha)|^2 / (2 alpha),
    DU_alpha(x) = (x - prox(x, alpha)) / alpha,

with prox(x, alpha) = argmin_y { U(y) + |x - y|^2 / (2 alpha) }.  The scalar
profile catalogue (t^2, t^4, huber, |t|, relu^2) has closed-form proxes except
for t^4, which uses a guarded Newton iteration.

Two function-space constructions are included: the integral potential
U(x) = int_0^1 Phi(x(s)) ds on a sine basis (prox factorizes pointwise on a
collocation grid and is re-projected onto the modes), and its dual-space
variant on a cosine basis where smoothing happens through the diagonal
resolvent (I + alpha B)^{-1} of the stiffness operator B, with gradient
B (I + alpha B)^{-1} Phi_alpha'((I + alpha B)^{-1} x) read in the dual norm.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DataError, SolverError


# ---------------------------------------------------------------------------
# scalar profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarProfile:
    """1-D convex profile with value, derivative, minimal subgradient and prox."""

    name: str
    value: object
    deriv: object          # minimal-norm subgradient (equals derivative when C^1)
    prox: object           # (t, alpha) -> prox point
    lower_bound: float = 0.0
    growth_p: float = 2.0  # |deriv| <= C (1 + |t|^{p-1})

    def moreau_value(self, t, alpha):
        p = self.prox(t, alpha)
        return self.value(p) + (t - p) ** 2 / (2 * alpha)

    def moreau_deriv(self, t, alpha):
        return (t - self.prox(t, alpha)) / alpha


def _quartic_prox(x, alpha, coef):
    """Solve y + 4 c a y^3 = x (strictly increasing cubic) by guarded Newton."""
    x = np.asarray(x, dtype=float)
    c = 4.0 * coef * alpha
    y = x / np.cbrt(1.0 + 3.0 * c * x**2)
    for _ in range(80):
        r = y + c * y**3 - x
        y = y - r / (1.0 + 3.0 * c * y**2)
        if np.max(np.abs(r)) < 1e-14 * max(1.0, float(np.max(np.abs(x)))):
            break
    r = np.abs(y + c * y**3 - x)
    if np.max(r) > 1e-10 * max(1.0, float(np.max(np.abs(x)))):
        raise SolverError(f"quartic prox Newton stalled, residual {np.max(r):.2e}")
    return y


def scalar_profile(name: str, coef: float = 1.0, delta: float = 1.0) -> ScalarProfile:
    if coef <= 0:
        raise DataError("profile coefficient must be positive")
    if name == "zero":
        return ScalarProfile("zero", lambda t: np.zeros_like(np.asarray(t, float)),
                             lambda t: np.zeros_like(np.asarray(t, float)),
                             lambda t, a: np.asarray(t, float).copy(), 0.0, 1.0)
    if name == "quadratic":
        return ScalarProfile("quadratic",
                             lambda t: coef * np.asarray(t, float) ** 2,
                             lambda t: 2 * coef * np.asarray(t, float),
                             lambda t, a: np.asarray(t, float) / (1 + 2 * coef * a),
                             0.0, 2.0)
    if name == "quartic":
        return ScalarProfile("quartic",
                             lambda t: coef * np.asarray(t, float) ** 4,
                             lambda t: 4 * coef * np.asarray(t, float) ** 3,
                             lambda t, a: _quartic_prox(t, a, coef),
                             0.0, 4.0)
    if name == "huber":
        if delta <= 0:
            raise DataError("huber delta must be positive")

        def hval(t):
            t = np.asarray(t, float)
            at = np.abs(t)
            return coef * np.where(at <= delta, t**2 / 2, delta * (at - delta / 2))

        def hder(t):
            t = np.asarray(t, float)
            return coef * np.clip(t, -delta, delta)

        def hprox(t, a):
            t = np.asarray(t, float)
            ca = coef * a
            small = np.abs(t) <= delta * (1 + ca)
            return np.where(small, t / (1 + ca), t - ca * delta * np.sign(t))

        return ScalarProfile("huber", hval, hder, hprox, 0.0, 2.0)
    if name == "abs":
        return ScalarProfile("abs",
                             lambda t: coef * np.abs(np.asarray(t, float)),
                             lambda t: coef * np.sign(np.asarray(t, float)),
                             lambda t, a: np.sign(t) * np.maximum(np.abs(np.asarray(t, float)) - coef * a, 0.0),
                             0.0, 1.0)
    if name == "relu2":
        def rprox(t, a):
            t = np.asarray(t, float)
            return np.where(t <= 0, t, t / (1 + 2 * coef * a))

        return ScalarProfile("relu2",
                             lambda t: coef * np.maximum(np.asarray(t, float), 0.0) ** 2,
                             lambda t: 2 * coef * np.maximum(np.asarray(t, float), 0.0),
                             rprox, 0.0, 2.0)
    raise ConfigurationError(f"unknown scalar profile {name!r}")


PROFILE_NAMES = ("zero", "quadratic", "quartic", "huber", "abs", "relu2")


# ---------------------------------------------------------------------------
# potentials on R^n
# ---------------------------------------------------------------------------

class Potential:
    """Convex U: R^n -> R with prox and minimal subgradient."""

    lower_bound = 0.0
    grid_heavy = False   # hint: evaluate on nodes + interpolate in the solver

    def value(self, X):
        raise NotImplementedError

    def prox(self, X, alpha):
        raise NotImplementedError

    def min_subgradient(self, X):
        raise NotImplementedError


@dataclass
class SeparablePotential(Potential):
    """U(x) = sum_k profile(x_k); prox and subgradients act coordinatewise."""

    profile: ScalarProfile

    def __post_init__(self):
        self.lower_bound = 0.0

    def value(self, X):
        X = np.asarray(X, dtype=float)
        return np.sum(self.profile.value(X), axis=-1)

    def prox(self, X, alpha):
        return self.profile.prox(np.asarray(X, dtype=float), alpha)

    def min_subgradient(self, X):
        return self.profile.deriv(np.asarray(X, dtype=float))


class ZeroPotential(SeparablePotential):
    def __init__(self):
        super().__init__(scalar_profile("zero"))


@dataclass
class MoreauEnvelope:
    """Smoothed potential U_alpha with 1/alpha-Lipschitz gradient."""

    base: Potential
    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise DataError("alpha must be positive")
        self.lower_bound = self.base.lower_bound
        self.grid_heavy = getattr(self.base, "grid_heavy", False)

    def value(self, X):
        X = np.asarray(X, dtype=float)
        p = self.base.prox(X, self.alpha)
        return self.base.value(p) + np.sum((X - p) ** 2, axis=-1) / (2 * self.alpha)

    def gradient(self, X):
        X = np.asarray(X, dtype=float)
        return (X - self.base.prox(X, self.alpha)) / self.alpha


def moreau_eval(potential: Potential, alpha: float, x):
    """(U_alpha(x), DU_alpha(x)) at a single point or batch."""
    env = MoreauEnvelope(potential, alpha)
    return env.value(x), env.gradient(x)


def check_my_inequality(potential: Potential, alpha: float, x) -> float:
    """Positive part of |DU_a - D0U|^2 - (|D0U|^2 - |DU_a|^2); 0 in exact arithmetic."""
    env = MoreauEnvelope(potential, alpha)
    g = np.asarray(env.gradient(x), dtype=float)
    g0 = np.asarray(potential.min_subgradient(x), dtype=float)
    lhs = np.sum((g - g0) ** 2, axis=-1)
    rhs = np.sum(g0**2, axis=-1) - np.sum(g**2, axis=-1)
    return float(np.max(np.maximum(lhs - rhs, 0.0)))


@dataclass
class PenalizedPotential:
    """V_alpha = U_alpha + dist(., C)^2 / (2 alpha); gradient is 2/alpha-Lipschitz."""

    envelope: object          # MoreauEnvelope or DualModeEnvelope
    body: object
    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise DataError("alpha must be positive")
        self.lower_bound = self.envelope.lower_bound
        self.grid_heavy = getattr(self.envelope, "grid_heavy", False)

    def value(self, X):
        X = np.asarray(X, dtype=float)
        d = self.body.distance(X)
        return self.envelope.value(X) + d**2 / (2 * self.alpha)

    def gradient(self, X):
        X = np.asarray(X, dtype=float)
        return self.envelope.gradient(X) + (X - self.body.project(X)) / self.alpha


# ---------------------------------------------------------------------------
# integral potential on the sine basis
# ---------------------------------------------------------------------------

def _xi_grid(n_xi: int):
    xs = np.linspace(0.0, 1.0, n_xi + 1)
    tw = np.full(n_xi + 1, 1.0 / n_xi)
    tw[0] *= 0.5
    tw[-1] *= 0.5
    return xs, tw


@dataclass
class IntegralPotential(Potential):
    """U(x) = int_0^1 Phi(x(s)) ds on n sine modes e_k(s) = sqrt(2) sin(k pi s).

    prox factorizes pointwise on the collocation grid and is re-projected onto
    the mode coefficients; the minimal subgradient is Phi'(x(.)) pointwise.
    """

    profile: ScalarProfile
    modes: int
    n_xi: int = 512
    grid_heavy = True

    def __post_init__(self):
        if self.modes < 1:
            raise DataError("need at least one mode")
        if self.n_xi < 4 * self.modes:
            raise ConfigurationError(
                f"collocation grid {self.n_xi} too coarse for {self.modes} modes "
                f"(need >= {4 * self.modes})")
        self.xi, self.tw = _xi_grid(self.n_xi)
        k = np.arange(1, self.modes + 1)
        self.basis = np.sqrt(2.0) * np.sin(np.outer(k, np.pi * self.xi))
        self.lower_bound = self.profile.lower_bound
        if self.profile.growth_p is None:
            warnings.warn("profile has no declared growth bound; integral "
                          "potential may be ill-behaved", stacklevel=2)

    def _field(self, X):
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape[:-1] + (self.n_xi + 1,))
        for k in range(self.modes):
            out += X[..., k, None] * self.basis[k]
        return out

    def _coeffs(self, vals):
        out = np.empty(vals.shape[:-1] + (self.modes,))
        for k in range(self.modes):
            out[..., k] = np.sum(vals * (self.tw * self.basis[k]), axis=-1)
        return out

    def value(self, X):
        return np.sum(self.profile.value(self._field(X)) * self.tw, axis=-1)

    def prox(self, X, alpha):
        return self._coeffs(self.profile.prox(self._field(X), alpha))

    def min_subgradient(self, X):
        return self._coeffs(self.profile.deriv(self._field(X)))


# ---------------------------------------------------------------------------
# dual-space potential on the cosine basis
# ---------------------------------------------------------------------------

@dataclass
class DualModeEnvelope:
    """Smoothed integral potential in the dual norm of the mean-zero H^1 space.

    Coordinates live on the basis f_k(s) = sqrt(2) k pi cos(k pi s) which is
    orthonormal for the dual inner product; the stiffness operator B acts
    diagonally with eigenvalue (k pi)^2 and smoothing uses the resolvent
    (I + alpha B)^{-1}.  The gradient is returned in dual coordinates.
    """

    profile: ScalarProfile
    alpha: float
    modes: int
    n_xi: int = 512
    grid_heavy = True

    def __post_init__(self):
        if self.alpha <= 0:
            raise DataError("alpha must be positive")
        if self.n_xi < 4 * self.modes:
            raise ConfigurationError(
                f"collocation grid {self.n_xi} too coarse for {self.modes} modes "
                f"(need >= {4 * self.modes})")
        self.xi, self.tw = _xi_grid(self.n_xi)
        k = np.arange(1, self.modes + 1)
        self.b_eigs = (k * np.pi) ** 2
        self.resolvent_factors = 1.0 / (1.0 + self.alpha * self.b_eigs)
        self.cosines = np.sqrt(2.0) * np.cos(np.outer(k, np.pi * self.xi))
        self.basis = self.cosines * (k * np.pi)[:, None]   # f_k on the grid
        self.lower_bound = 0.0

    def _field(self, coeffs, factors=None):
        coeffs = np.asarray(coeffs, dtype=float)
        out = np.zeros(coeffs.shape[:-1] + (self.n_xi + 1,))
        for k in range(self.modes):
            c = coeffs[..., k] if factors is None else coeffs[..., k] * factors[k]
            out += c[..., None] * self.basis[k]
        return out

    def value(self, X):
        y = self._field(X, self.resolvent_factors)
        return np.sum(self.profile.moreau_value(y, self.alpha) * self.tw, axis=-1)

    def gradient(self, X):
        y = self._field(X, self.resolvent_factors)
        w = self.profile.moreau_deriv(y, self.alpha)
        k = np.arange(1, self.modes + 1)
        out = np.empty(np.asarray(X, dtype=float).shape)
        for j in range(self.modes):
            cj = np.sum(w * (self.tw * self.cosines[j]), axis=-1)
            out[..., j] = cj * (k[j] * np.pi) * self.resolvent_factors[j]
        return out

    def base_value(self, X):
        """Unsmoothed U(x) = int Phi(x(s)) ds for the same dual coordinates."""
        y = self._field(X)
        return np.sum(self.profile.value(y) * self.tw, axis=-1)
