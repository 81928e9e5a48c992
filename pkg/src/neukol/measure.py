"""Finite-dimensional Gaussian measure structure.

A truncation keeps n modes of a diagonal covariance Q with eigenvalues
lambda_1..lambda_n, so mu = N(0, diag(lambdas)) on R^n and the drift operator
is A = -Q^{-1}/2 with diagonal a_k = -1/(2 lambda_k).  Quadrature lives on a
box [-R sigma_k, R sigma_k] per axis:

* n <= 3: a uniform tensor node lattice with composite-Simpson weights folded
  with the Gaussian density, rescaled per axis to the exact Gaussian mass of
  the box (so the weight sum is exact and moment errors are O(h^4)).
* n > 3: equal-weight quasi-Monte Carlo nodes drawn from mu restricted to the
  box (scrambled Sobol mapped through the inverse Gaussian CDF).

The weighted measures nu = e^{-2U} mu and nu_alpha are handled by passing a
potential to :func:`integrate_nu`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.special import erf, ndtri
from scipy.stats import qmc

from .errors import DataError, ResourceError
from .fields import grad_axis

TENSOR_DIM_MAX = 3
DEFAULT_NODE_CAP = 2**25  # ~ 34M nodes; above this the tensor grid refuses to build


def gauss_mass_1d(a: float, b: float, sigma: float) -> float:
    """Mass of N(0, sigma^2) on [a, b]."""
    s = sigma * np.sqrt(2.0)
    return 0.5 * float(erf(b / s) - erf(a / s))


def _simpson_axis_weights(nodes: np.ndarray, sigma: float) -> np.ndarray:
    m = len(nodes) - 1
    h = nodes[1] - nodes[0]
    w = np.ones(m + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= h / 3.0
    rho = np.exp(-(nodes**2) / (2 * sigma**2)) / (sigma * np.sqrt(2 * np.pi))
    w = w * rho
    w *= gauss_mass_1d(nodes[0], nodes[-1], sigma) / w.sum()
    return w


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and mu-weights; tensor form for n <= 3, QMC for larger n."""

    axes: tuple = ()                  # per-axis node coordinates
    axis_weights: tuple = ()          # per-axis mu-weights (tensor grids)
    cell_size: np.ndarray = None      # per-axis spacing h_k
    qmc_nodes: np.ndarray = None      # (N, n) nodes for the QMC branch
    qmc_weight: float = 0.0           # equal weight: box mass / N

    @property
    def is_tensor(self) -> bool:
        return self.qmc_nodes is None

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)


@dataclass(frozen=True)
class MeasureSpace:
    lambdas: np.ndarray
    box_radius: float
    cells_per_axis: int
    qmc_samples: int = 2**13
    qmc_seed: int = 0
    grid: QuadratureGrid = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @property
    def sigmas(self) -> np.ndarray:
        return np.sqrt(self.lambdas)

    @property
    def drift_coeffs(self) -> np.ndarray:
        """Diagonal of A = -Q^{-1}/2."""
        return -0.5 / self.lambdas

    def nodes(self) -> np.ndarray:
        """All quadrature nodes as an (..., n) array."""
        if self.grid.is_tensor:
            return np.stack(np.meshgrid(*self.grid.axes, indexing="ij"), axis=-1)
        return self.grid.qmc_nodes

    def mu_node_weights(self) -> np.ndarray:
        """Tensor-product mu-weights on the node lattice."""
        if not self.grid.is_tensor:
            return np.full(len(self.grid.qmc_nodes), self.grid.qmc_weight)
        return reduce(np.multiply.outer, self.grid.axis_weights)

    def gaussian_density(self, X: np.ndarray) -> np.ndarray:
        q = np.zeros(X.shape[:-1])
        for k in range(self.n):
            q = q + X[..., k] ** 2 / (2 * self.lambdas[k])
        z = float(np.prod(np.sqrt(2 * np.pi * self.lambdas)))
        return np.exp(-q) / z

    def box_mass(self) -> float:
        out = 1.0
        for k in range(self.n):
            L = self.box_radius * self.sigmas[k]
            out *= gauss_mass_1d(-L, L, self.sigmas[k])
        return out


def build_space(lambdas, box_radius: float = 8.0, cells_per_axis: int = 200,
                qmc_samples: int = 2**13, qmc_seed: int = 0,
                node_cap: int = DEFAULT_NODE_CAP) -> MeasureSpace:
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 1 or len(lambdas) == 0 or np.any(lambdas <= 0) or not np.all(np.isfinite(lambdas)):
        raise DataError("covariance eigenvalues must be finite and positive")
    if box_radius < 4:
        raise DataError(f"box_radius must be >= 4, got {box_radius}")
    if cells_per_axis < 8:
        raise DataError(f"cells_per_axis must be >= 8, got {cells_per_axis}")
    if cells_per_axis % 2 != 0:
        raise DataError("cells_per_axis must be even (composite Simpson weights)")
    n = len(lambdas)
    if n <= TENSOR_DIM_MAX:
        if (cells_per_axis + 1) ** n > node_cap:
            raise ResourceError(
                f"tensor grid would need {(cells_per_axis + 1) ** n} nodes (cap {node_cap})")
        axes, weights = [], []
        for lk in lambdas:
            s = float(np.sqrt(lk))
            L = box_radius * s
            ax = np.linspace(-L, L, cells_per_axis + 1)
            ax[cells_per_axis // 2] = 0.0  # exact symmetry of the central node
            axes.append(ax)
            weights.append(_simpson_axis_weights(ax, s))
        grid = QuadratureGrid(
            axes=tuple(axes), axis_weights=tuple(weights),
            cell_size=np.array([a[1] - a[0] for a in axes]))
    else:
        sob = qmc.Sobol(d=n, scramble=True, seed=qmc_seed)
        U = sob.random(qmc_samples)
        nodes = np.empty_like(U)
        mass = 1.0
        for k in range(n):
            s = float(np.sqrt(lambdas[k]))
            L = box_radius * s
            lo = 0.5 * (1 + erf(-L / (s * np.sqrt(2))))
            hi = 0.5 * (1 + erf(L / (s * np.sqrt(2))))
            nodes[:, k] = ndtri(lo + (hi - lo) * U[:, k]) * s
            mass *= hi - lo
        grid = QuadratureGrid(qmc_nodes=nodes, qmc_weight=mass / qmc_samples,
                              cell_size=None)
    return MeasureSpace(lambdas=lambdas, box_radius=float(box_radius),
                        cells_per_axis=int(cells_per_axis),
                        qmc_samples=int(qmc_samples), qmc_seed=int(qmc_seed),
                        grid=grid)


def _as_field(space: MeasureSpace, f) -> np.ndarray:
    if callable(f):
        f = f(space.nodes())
    f = np.asarray(f, dtype=float)
    want = space.grid.shape if space.grid.is_tensor else (len(space.grid.qmc_nodes),)
    if f.shape != want:
        raise DataError(f"grid function has shape {f.shape}, expected {want}")
    return f


def integrate_mu(space: MeasureSpace, f) -> float:
    """Quadrature approximation of the mu-integral of a grid function."""
    F = _as_field(space, f)
    if np.any(np.isnan(F)):
        raise DataError("grid function contains NaN")
    return float(np.sum(space.mu_node_weights() * F))


def integrate_nu(space: MeasureSpace, f, potential=None) -> float:
    """Integral of f against nu = e^{-2U} mu.

    The potential may be None (U = 0), a callable on points, or any object
    with a ``value(X)`` method.  +inf values of U give weight 0.
    """
    F = _as_field(space, f)
    if np.any(np.isnan(F)):
        raise DataError("grid function contains NaN")
    if potential is None:
        return float(np.sum(space.mu_node_weights() * F))
    X = space.nodes()
    u = potential(X) if callable(potential) else potential.value(X)
    u = np.asarray(u, dtype=float)
    if np.all(np.isinf(u)):
        raise DataError("potential is +inf on every node: nu degenerates to 0")
    w = np.where(np.isinf(u), 0.0, np.exp(-2 * np.where(np.isinf(u), 0.0, u)))
    return float(np.sum(space.mu_node_weights() * F * w))


def check_ibp_mu(space: MeasureSpace, phi, psi, k: int) -> float:
    """Residual of the Gaussian integration-by-parts identity along axis k.

    For smooth phi, psi decaying inside the box,
    int D_k(phi) psi dmu + int D_k(psi) phi dmu - (1/lambda_k) int x_k phi psi dmu
    vanishes; finite differences make the residual O(h^2).
    """
    if not space.grid.is_tensor:
        raise DataError("integration-by-parts check needs a tensor grid")
    P = _as_field(space, phi)
    S = _as_field(space, psi)
    h = float(space.grid.cell_size[k])
    dP = grad_axis(P, k, h)
    dS = grad_axis(S, k, h)
    xk = space.nodes()[..., k]
    lhs = integrate_mu(space, dP * S)
    rhs = -integrate_mu(space, dS * P) + integrate_mu(space, xk * P * S) / space.lambdas[k]
    return abs(lhs - rhs)


def rng_stream(seed: int, worker_id: int = 0) -> np.random.Generator:
    """Disjoint per-worker stream split from a master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(worker_id,)))


def sample_mu(space: MeasureSpace, seed: int, count: int,
              worker_id: int = 0) -> np.ndarray:
    """(count, n) i.i.d. draws with x_k ~ N(0, lambda_k); reproducible per seed."""
    if count < 1:
        raise DataError("count must be >= 1")
    rng = rng_stream(seed, worker_id)
    return rng.standard_normal((count, space.n)) * space.sigmas
