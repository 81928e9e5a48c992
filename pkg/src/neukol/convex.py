"""Convex bodies C = {G <= 0} with projections, distances and surface bands.

The catalogue covers halfspaces G(x) = <y,x> - c, ellipsoids
G(x) = sum_k a_k x_k^2 - r^2, and hypographs G(x) = x_k - F(x_perp) of concave
maps F.  Projections are exact for halfspaces, a scalar root-find on the
Lagrange multiplier for ellipsoids, and a small damped-Newton solve for
hypographs.

Surface integrals over G^{-1}(0) are approximated by a coarea band: nodes
with |G| <= delta get weight  mu_weight * e^{-2U} * ||DG|| / (2 delta),
which converges to the Gaussian-density-weighted surface measure as
delta -> 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, GeometryError, SolverError

PROJ_TOL = 1e-12
PROJ_MAX_ITER = 200


class ConvexBody:
    """Base class; subclasses provide value/grad/project and the Hessian action."""

    kind = "abstract"

    def value(self, X):
        raise NotImplementedError

    def grad(self, X):
        raise NotImplementedError

    def hess_vec(self, X, V):
        """D^2G(x) @ V, pointwise over the batch."""
        raise NotImplementedError

    def project(self, X):
        raise NotImplementedError

    def distance(self, X):
        X = np.asarray(X, dtype=float)
        return np.linalg.norm(X - self.project(X), axis=-1)

    def contains(self, X, tol=1e-12):
        return self.value(X) <= tol


@dataclass
class Halfspace(ConvexBody):
    direction: np.ndarray
    offset: float
    kind = "halfspace"

    def __post_init__(self):
        self.direction = np.asarray(self.direction, dtype=float)
        nrm2 = float(self.direction @ self.direction)
        if nrm2 <= 0:
            raise DataError("halfspace direction must be nonzero")
        self._nrm2 = nrm2

    def value(self, X):
        X = np.asarray(X, dtype=float)
        return np.sum(X * self.direction, axis=-1) - self.offset

    def grad(self, X):
        X = np.asarray(X, dtype=float)
        return np.broadcast_to(self.direction, X.shape).copy()

    def hess_vec(self, X, V):
        return np.zeros_like(np.asarray(V, dtype=float))

    def project(self, X):
        X = np.asarray(X, dtype=float)
        g = np.maximum(self.value(X), 0.0)
        return X - (g / self._nrm2)[..., None] * self.direction


@dataclass
class Ellipsoid(ConvexBody):
    alphas: np.ndarray
    radius: float
    kind = "ellipsoid"

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        if np.any(self.alphas <= 0):
            raise DataError("ellipsoid coefficients must be positive")
        if self.radius <= 0:
            raise DataError("ellipsoid radius must be positive")
        # truncated analogue of the summability condition on (alpha_k^2 lambda_k)
        if not np.all(np.isfinite(self.alphas**2)):
            raise DataError("ellipsoid coefficients overflow")

    def value(self, X):
        X = np.asarray(X, dtype=float)
        return np.sum(self.alphas * X**2, axis=-1) - self.radius**2

    def grad(self, X):
        X = np.asarray(X, dtype=float)
        return 2.0 * self.alphas * X

    def hess_vec(self, X, V):
        return 2.0 * self.alphas * np.asarray(V, dtype=float)

    def project(self, X):
        X = np.asarray(X, dtype=float)
        flat = X.reshape(-1, X.shape[-1])
        out = flat.copy()
        outside = self.value(flat) > 0
        if np.any(outside):
            out[outside] = self._project_outside(flat[outside])
        return out.reshape(X.shape)

    def _project_outside(self, P):
        # z_k = x_k / (1 + t a_k); find t > 0 with sum a_k z_k^2 = r^2.
        # phi(t) is strictly decreasing, so bisection brackets are safe;
        # Newton accelerates inside the bracket.
        a = self.alphas
        r2 = self.radius**2

        def phi(t):
            z = P / (1.0 + np.outer(t, a))
            return np.sum(a * z**2, axis=-1) - r2

        lo = np.zeros(len(P))
        hi = np.full(len(P), 1.0 / a.min())
        for _ in range(200):
            bad = phi(hi) > 0
            if not np.any(bad):
                break
            hi[bad] *= 2.0
        else:
            raise SolverError("ellipsoid projection: bracket expansion failed")
        t = 0.5 * (lo + hi)
        for _ in range(PROJ_MAX_ITER):
            v = phi(t)
            if np.max(np.abs(v)) < PROJ_TOL * max(r2, 1.0):
                break
            lo = np.where(v > 0, t, lo)
            hi = np.where(v > 0, hi, t)
            z = P / (1.0 + np.outer(t, a))
            dv = np.sum(-2.0 * a**2 * z**2 / (1.0 + np.outer(t, a)), axis=-1)
            with np.errstate(divide="ignore", invalid="ignore"):
                t_newton = t - v / dv
            inside = (t_newton > lo) & (t_newton < hi) & np.isfinite(t_newton)
            t = np.where(inside, t_newton, 0.5 * (lo + hi))
        else:
            raise SolverError(
                f"ellipsoid projection did not converge: residual {np.max(np.abs(phi(t))):.2e}")
        return P / (1.0 + np.outer(t, a))


@dataclass
class Hypograph(ConvexBody):
    """C = {x : x_axis <= F(x_perp)} for a concave map F of the other coordinates."""

    axis: int
    F: object            # callable Y -> values; optional gradF/hessF attributes
    gradF: object = None
    hess_diag: np.ndarray = None   # diagonal of D^2F when available (else zero)
    kind = "hypograph"

    def _split(self, X):
        X = np.asarray(X, dtype=float)
        xk = X[..., self.axis]
        Y = np.delete(X, self.axis, axis=-1)
        return xk, Y

    def value(self, X):
        xk, Y = self._split(X)
        return xk - self.F(Y)

    def grad(self, X):
        X = np.asarray(X, dtype=float)
        xk, Y = self._split(X)
        g = np.zeros_like(X)
        g[..., self.axis] = 1.0
        if self.gradF is not None:
            gF = np.asarray(self.gradF(Y), dtype=float)
            others = [i for i in range(X.shape[-1]) if i != self.axis]
            for j, i in enumerate(others):
                g[..., i] = -gF[..., j]
        return g

    def hess_vec(self, X, V):
        X = np.asarray(X, dtype=float)
        V = np.asarray(V, dtype=float)
        out = np.zeros_like(V)
        if self.hess_diag is not None:
            others = [i for i in range(X.shape[-1]) if i != self.axis]
            for j, i in enumerate(others):
                out[..., i] = -self.hess_diag[j] * V[..., i]
        return out

    def project(self, X):
        X = np.asarray(X, dtype=float)
        flat = X.reshape(-1, X.shape[-1])
        out = flat.copy()
        outside = self.value(flat) > 0
        if np.any(outside):
            out[outside] = self._project_outside(flat[outside])
        return out.reshape(X.shape)

    def _project_outside(self, P):
        # minimize 0.5|y - x_perp|^2 + 0.5 (x_k - F(y))_+^2 by damped gradient
        # steps (convex since F is concave); 200-iteration cap.
        xk = P[:, self.axis]
        others = [i for i in range(P.shape[1]) if i != self.axis]
        Xp = P[:, others]
        Y = Xp.copy()
        step = np.full(len(P), 1.0)

        def obj(Y):
            s = np.maximum(xk - self.F(Y), 0.0)
            return 0.5 * np.sum((Y - Xp) ** 2, axis=-1) + 0.5 * s**2

        def grad(Y):
            s = np.maximum(xk - self.F(Y), 0.0)
            if self.gradF is not None:
                gF = np.asarray(self.gradF(Y), dtype=float)
            else:
                gF = _fd_grad(self.F, Y)
            return (Y - Xp) - s[:, None] * gF

        val = obj(Y)
        for _ in range(PROJ_MAX_ITER):
            g = grad(Y)
            gn2 = np.sum(g**2, axis=-1)
            if np.max(gn2) < PROJ_TOL**2:
                break
            for _ in range(30):
                Ytry = Y - step[:, None] * g
                vtry = obj(Ytry)
                shrink = vtry > val - 0.25 * step * gn2
                if not np.any(shrink):
                    break
                step = np.where(shrink, 0.5 * step, step)
            Y = Y - step[:, None] * g
            val = obj(Y)
            step = np.minimum(step * 1.5, 4.0)
        zk = np.minimum(xk, self.F(Y))
        Z = np.empty_like(P)
        Z[:, others] = Y
        Z[:, self.axis] = zk
        return Z


def _fd_grad(F, Y, eps=1e-7):
    g = np.empty_like(Y)
    for j in range(Y.shape[1]):
        Yp = Y.copy(); Yp[:, j] += eps
        Ym = Y.copy(); Ym[:, j] -= eps
        g[:, j] = (F(Yp) - F(Ym)) / (2 * eps)
    return g


def affine_hypograph(axis, slopes, offset):
    slopes = np.asarray(slopes, dtype=float)
    return Hypograph(
        axis=axis,
        F=lambda Y: Y @ slopes + offset,
        gradF=lambda Y: np.broadcast_to(slopes, Y.shape).copy(),
        hess_diag=np.zeros(len(slopes)),
    )


def neg_quadratic_hypograph(axis, curvatures, offset):
    curv = np.asarray(curvatures, dtype=float)
    if np.any(curv < 0):
        raise DataError("neg-quadratic hypograph needs nonnegative curvatures")
    return Hypograph(
        axis=axis,
        F=lambda Y: offset - np.sum(curv * Y**2, axis=-1),
        gradF=lambda Y: -2.0 * curv * Y,
        hess_diag=-2.0 * curv,
    )


@dataclass
class SurfaceBand:
    """Coarea-band sampler for integrals over G^{-1}(0) against e^{-2U} d(surface)."""

    indices: np.ndarray       # flat indices into the node lattice
    points: np.ndarray        # (nb, n)
    weights: np.ndarray       # quadrature weights (density-normalized)
    delta: float
    side: str                 # "two" or "inside"

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(self.weights * values))


def surface_band(body: ConvexBody, space, potential=None, delta_band=None,
                 side: str = "two") -> SurfaceBand:
    """Band sampler on the node lattice.

    side="two" uses |G| <= delta with weights /(2 delta); side="inside" uses
    -delta <= G <= 0 with weights /delta (for fields defined only on C).
    """
    if not space.grid.is_tensor:
        raise GeometryError("surface bands need a tensor grid")
    X = space.nodes()
    G = body.value(X)
    DG = body.grad(X)
    ndg = np.linalg.norm(DG, axis=-1)
    hmax = float(np.max(space.grid.cell_size))
    if delta_band is None:
        probe = np.abs(G) <= 4 * 3 * hmax * max(1.0, float(np.max(ndg)))
        if not np.any(probe):
            raise GeometryError("level set G = 0 does not meet the box")
        delta_band = 3 * hmax * float(np.max(ndg[probe]))
    if side == "two":
        sel = np.abs(G) <= delta_band
        denom = 2 * delta_band
    elif side == "inside":
        sel = (G <= 0) & (G >= -delta_band)
        denom = delta_band
    else:
        raise DataError(f"unknown band side {side!r}")
    if not np.any(sel):
        raise GeometryError("surface band is empty")
    muw = space.mu_node_weights()
    if potential is None:
        ew = 1.0
    else:
        u = potential(X[sel]) if callable(potential) else potential.value(X[sel])
        ew = np.exp(-2 * np.asarray(u, dtype=float))
    w = muw[sel] * ew * ndg[sel] / denom
    flat = np.flatnonzero(sel.ravel())
    return SurfaceBand(indices=flat, points=X[sel], weights=w,
                       delta=float(delta_band), side=side)


def check_convexity(body: ConvexBody, space, samples: int = 200, seed: int = 0) -> dict:
    """Segment test: G(t x + (1-t) y) <= tol for sampled x, y in C. Report only."""
    if samples < 100:
        raise DataError("need at least 100 samples")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    raw = rng.standard_normal((2 * samples, space.n)) * space.sigmas
    pts = body.project(raw)           # membership by construction
    x, y = pts[:samples], pts[samples:]
    t = rng.uniform(size=(samples, 1))
    vals = body.value(t * x + (1 - t) * y)
    tol = 1e-9 * max(1.0, float(np.max(np.abs(body.value(raw)))))
    bad = vals > tol
    return {
        "checked": samples,
        "violations": int(np.sum(bad)),
        "max_slack": float(np.max(vals)),
        "tolerance": tol,
    }
