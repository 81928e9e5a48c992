"""Concrete mode-truncated models on the unit interval.

* diffusion model: state space L^2(0,1) with the sine basis
  e_k(s) = sqrt(2) sin(k pi s); covariance eigenvalues 1/(2 k^2 pi^2), so the
  drift diagonal reproduces the second-derivative eigenvalues -(k pi)^2.
* conserved-order-parameter model: the dual of mean-zero H^1 with the basis
  f_k = sqrt(2) k pi cos(k pi s); the stiffness operator B has eigenvalue
  (k pi)^2 on mode k, the linear drift is -B^2 with eigenvalues -(k pi)^4 and
  covariance eigenvalues 1/(2 k^4 pi^4).

Both factories return a measure space plus the matching potential object.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .measure import MeasureSpace, build_space, rng_stream
from .potentials import (DualModeEnvelope, IntegralPotential, ScalarProfile,
                         scalar_profile)

RD_MODE_CAP = 6
CH_MODE_CAP = 4


@dataclass
class RDModel:
    modes: int
    lambdas: np.ndarray
    xi: np.ndarray
    trapz_weights: np.ndarray
    basis: np.ndarray            # (modes, n_xi + 1) sine basis values

    def field(self, X):
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape[:-1] + (len(self.xi),))
        for k in range(self.modes):
            out += X[..., k, None] * self.basis[k]
        return out

    def gram(self):
        return (self.basis * self.trapz_weights) @ self.basis.T


@dataclass
class CHModel:
    modes: int
    lambdas: np.ndarray
    b_eigs: np.ndarray           # (k pi)^2
    xi: np.ndarray
    trapz_weights: np.ndarray
    basis: np.ndarray            # (modes, n_xi + 1) values of f_k
    cosines: np.ndarray          # sqrt(2) cos(k pi s)

    def field(self, X):
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape[:-1] + (len(self.xi),))
        for k in range(self.modes):
            out += X[..., k, None] * self.basis[k]
        return out

    def dual_inner_from_l2(self, y_coeffs, g_coeffs):
        """<B^{-1} y, g>_{L^2} computed on the collocation grid."""
        yb = np.zeros(len(self.xi))
        for k in range(self.modes):
            yb += (y_coeffs[k] / self.b_eigs[k]) * self.basis[k]
        gf = np.zeros(len(self.xi))
        for k in range(self.modes):
            gf += g_coeffs[k] * self.basis[k]
        return float(np.sum(self.trapz_weights * yb * gf))


def _xi(n_xi: int):
    xs = np.linspace(0.0, 1.0, n_xi + 1)
    tw = np.full(n_xi + 1, 1.0 / n_xi)
    tw[0] *= 0.5
    tw[-1] *= 0.5
    return xs, tw


def _resolve_profile(phi) -> ScalarProfile:
    if isinstance(phi, ScalarProfile):
        return phi
    if isinstance(phi, str):
        return scalar_profile(phi)
    raise ConfigurationError(f"unsupported profile spec {phi!r}")


def build_rd(modes: int, phi, xi_grid: int = 512, box_radius: float = 6.0,
             cells_per_axis: int = 48, mode_cap: int = RD_MODE_CAP):
    """(MeasureSpace, IntegralPotential, RDModel) for the sine-basis truncation."""
    if not 1 <= modes <= mode_cap:
        raise ConfigurationError(f"modes must be in [1, {mode_cap}] for tensor solves")
    profile = _resolve_profile(phi)
    k = np.arange(1, modes + 1)
    lambdas = 1.0 / (2.0 * (k * np.pi) ** 2)
    space = build_space(lambdas, box_radius=box_radius, cells_per_axis=cells_per_axis)
    potential = IntegralPotential(profile=profile, modes=modes, n_xi=xi_grid)
    xs, tw = _xi(xi_grid)
    basis = np.sqrt(2.0) * np.sin(np.outer(k, np.pi * xs))
    model = RDModel(modes=modes, lambdas=lambdas, xi=xs, trapz_weights=tw, basis=basis)
    return space, potential, model


def build_ch(modes: int, phi, alpha: float, xi_grid: int = 512,
             box_radius: float = 6.0, cells_per_axis: int = 48,
             mode_cap: int = CH_MODE_CAP):
    """(MeasureSpace, DualModeEnvelope, CHModel) for the cosine-basis truncation."""
    if not 1 <= modes <= mode_cap:
        raise ConfigurationError(f"modes must be in [1, {mode_cap}] for tensor solves")
    profile = _resolve_profile(phi)
    k = np.arange(1, modes + 1)
    lambdas = 1.0 / (2.0 * (k * np.pi) ** 4)
    space = build_space(lambdas, box_radius=box_radius, cells_per_axis=cells_per_axis)
    envelope = DualModeEnvelope(profile=profile, alpha=alpha, modes=modes, n_xi=xi_grid)
    xs, tw = _xi(xi_grid)
    cosines = np.sqrt(2.0) * np.cos(np.outer(k, np.pi * xs))
    basis = cosines * (k * np.pi)[:, None]
    model = CHModel(modes=modes, lambdas=lambdas, b_eigs=(k * np.pi) ** 2,
                    xi=xs, trapz_weights=tw, basis=basis, cosines=cosines)
    return space, envelope, model


def check_lp_masses(space: MeasureSpace, model, q: float, p: float,
                    samples: int = 2000, seed: int = 11) -> dict:
    """Monte Carlo E ||x||_{L^p(0,1)}^q under the truncated Gaussian law.

    Also reports the relative change when the top mode is dropped (truncation
    stability) and the largest sampled mean value for mean-zero bases.
    """
    if samples < 1000:
        raise ConfigurationError("need at least 10^3 samples")
    rng = rng_stream(seed, 0)

    def estimate(m, lam):
        Z = rng.standard_normal((samples, m)) * np.sqrt(lam)
        fields = np.zeros((samples, len(model.xi)))
        for k in range(m):
            fields += Z[:, k, None] * model.basis[k]
        norms = np.sum(model.trapz_weights * np.abs(fields) ** p, axis=-1) ** (1.0 / p)
        return float(np.mean(norms**q)), fields

    full, fields = estimate(model.modes, model.lambdas)
    reduced, _ = estimate(model.modes - 1, model.lambdas[:-1]) if model.modes > 1 \
        else (full, None)
    means = np.sum(model.trapz_weights * fields, axis=-1)
    return {
        "value": full,
        "value_one_mode_fewer": reduced,
        "relative_change": abs(full - reduced) / max(abs(full), 1e-300),
        "finite": bool(np.isfinite(full)),
        "max_abs_field_mean": float(np.max(np.abs(means))),
        "samples": samples,
    }
