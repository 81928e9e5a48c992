"""Weighted-Galerkin and reflected-diffusion toolkit for elliptic resolvent
problems with natural boundary behaviour on convex sets."""

__version__ = "0.1.0"

from .measure import MeasureSpace, build_space, integrate_mu, integrate_nu, sample_mu
from .convex import Ellipsoid, Halfspace, Hypograph, surface_band
from .potentials import (MoreauEnvelope, PenalizedPotential, SeparablePotential,
                         scalar_profile)
from .solver import WeakProblem, solve, estimate_report, flux_trace
from .sde import SDESettings, feynman_kac, sample_invariant
from .models import build_ch, build_rd

__all__ = [
    "MeasureSpace", "build_space", "integrate_mu", "integrate_nu", "sample_mu",
    "Ellipsoid", "Halfspace", "Hypograph", "surface_band",
    "MoreauEnvelope", "PenalizedPotential", "SeparablePotential", "scalar_profile",
    "WeakProblem", "solve", "estimate_report", "flux_trace",
    "SDESettings", "feynman_kac", "sample_invariant",
    "build_ch", "build_rd",
    "__version__",
]
