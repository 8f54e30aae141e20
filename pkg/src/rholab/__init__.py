"""
rholab: norm derivatives and rho-lambda orthogonality in finite-dimensional normed spaces.

This package computes the one-sided norm derivatives rho-(x, y), rho+(x, y)
and their convex combinations rho_lambda, tests the orthogonality relations
they induce, and probes inclusions, inner-product characterizations, uniform
convexity and orthogonality-preserving linear maps numerically.
"""

__version__ = "1.0.0"
__author__ = "rholab developers"

from rholab.derivatives import DerivativePair, rho_lambda, rho_pair
from rholab.exceptions import (
    ConfigError,
    DimensionMismatchError,
    NonSmoothPointError,
    RholabError,
    ZeroVectorError,
)
from rholab.models import (
    LinearImageNorm,
    LinearMap,
    LpNorm,
    OrthogonalityRelation,
    PolyhedralNorm,
    WeightedLpNorm,
)
from rholab.normcore import eval_norm
from rholab.orthogonality import check

__all__ = [
    "ConfigError",
    "DerivativePair",
    "DimensionMismatchError",
    "LinearImageNorm",
    "LinearMap",
    "LpNorm",
    "NonSmoothPointError",
    "OrthogonalityRelation",
    "PolyhedralNorm",
    "RholabError",
    "WeightedLpNorm",
    "ZeroVectorError",
    "check",
    "eval_norm",
    "rho_lambda",
    "rho_pair",
]
