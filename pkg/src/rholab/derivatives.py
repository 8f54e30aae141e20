"""
One-sided norm derivatives rho-, rho+ and the functionals built from them.

rho+(x, y) = ||x|| lim_{t->0+} (||x + t y|| - ||x||) / t and rho- is the
left-hand analogue. Closed forms exist for every catalogue family through the
reduction x -> ||M x||_p; a numerical enclosure based on the monotone
difference quotient of a convex function is available for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Sequence, Union

import numpy as np
import structlog

from rholab.exceptions import DimensionMismatchError, NonSmoothPointError, ZeroVectorError
from rholab.models import NormSpec, Vector
from rholab.normcore import ACTIVE_TOL, CompiledNorm, as_vector, compile_norm, lp_value

logger = structlog.get_logger()

# Step schedule of the numerical enclosure: t_k = 2^-k for k = 4..40.
T_START = 2.0**-4
T_MIN = 2.0**-40
BRACKET_TOL = 1e-10
# Rounding bound of one norm-difference quotient is NOISE_FACTOR * eps / t at unit scale.
NOISE_FACTOR = 8.0
_EPS = float(np.finfo(np.float64).eps)


class DerivativeMethod(str, Enum):
    AUTO = "auto"
    EXACT = "exact"
    NUMERICAL = "numerical"


def validate_lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    return lam


@dataclass(frozen=True)
class DerivativePair:
    """rho-(x, y) and rho+(x, y), each accurate to enclosure_radius."""

    rho_minus: float
    rho_plus: float
    enclosure_radius: float = 0.0
    method: DerivativeMethod = DerivativeMethod.EXACT
    converged: bool = True

    def rho_lambda(self, lam: float) -> float:
        return lam * self.rho_minus + (1.0 - lam) * self.rho_plus

    @property
    def mid(self) -> float:
        return (self.rho_minus + self.rho_plus) / 2.0

    @property
    def star(self) -> float:
        return self.rho_minus * self.rho_plus

    @property
    def gap(self) -> float:
        return self.rho_plus - self.rho_minus

    def to_dict(self) -> dict[str, Any]:
        return {
            "rho_minus": self.rho_minus,
            "rho_plus": self.rho_plus,
            "enclosure_radius": self.enclosure_radius,
            "method": self.method.value,
            "converged": self.converged,
        }


def _pair_vectors(spec: NormSpec, x: Any, y: Any) -> tuple[Vector, Vector]:
    xv = as_vector(x)
    yv = as_vector(y)
    if xv.size != spec.dim:
        raise DimensionMismatchError(spec.dim, xv.size, "x")
    if yv.size != spec.dim:
        raise DimensionMismatchError(spec.dim, yv.size, "y")
    return xv, yv


def exact_reduced_pair(u: Vector, v: Vector, p: float) -> tuple[float, float]:
    """(rho-, rho+) of ||.||_p at u in direction v."""
    s = lp_value(u, p)
    if s == 0.0:
        return 0.0, 0.0
    if math.isinf(p):
        active = (s - np.abs(u)) <= ACTIVE_TOL * s
        vals = np.sign(u[active]) * v[active]
        return s * float(np.min(vals)), s * float(np.max(vals))
    if p == 1:
        zero = np.abs(u) <= ACTIVE_TOL * s
        base = float(np.sum(np.sign(u[~zero]) * v[~zero]))
        extra = float(np.sum(np.abs(v[zero])))
        return s * (base - extra), s * (base + extra)
    if p == 2:
        r = float(u @ v)
        return r, r
    r = s * float(np.sum(np.sign(u) * (np.abs(u) / s) ** (p - 1.0) * v))
    return r, r


def _exact_pair(compiled: CompiledNorm, x: Vector, y: Vector) -> DerivativePair:
    minus, plus = exact_reduced_pair(compiled.lift(x), compiled.lift(y), compiled.p)
    return DerivativePair(minus, plus, 0.0, DerivativeMethod.EXACT)


def _numerical_pair(compiled: CompiledNorm, x: Vector, y: Vector, tol: float) -> DerivativePair:
    nx = compiled.value(x)
    ny = compiled.value(y)
    if nx == 0.0 or ny == 0.0:
        return DerivativePair(0.0, 0.0, 0.0, DerivativeMethod.NUMERICAL)
    xh = x / nx
    yh = y / ny
    base = compiled.value(xh)

    best: Optional[tuple[float, float, float]] = None
    prev: Optional[tuple[float, float]] = None
    t = T_START
    while t >= T_MIN:
        q_plus = (compiled.value(xh + t * yh) - base) / t
        q_minus = (compiled.value(xh - t * yh) - base) / (-t)
        noise = NOISE_FACTOR * _EPS * (base + t) / t
        if prev is not None:
            change = max(abs(q_plus - prev[1]), abs(q_minus - prev[0]))
            bound = change + 2.0 * noise
            if best is None or bound < best[0]:
                best = (bound, q_minus, q_plus)
            if change < BRACKET_TOL or 2.0 * noise > best[0]:
                break
        prev = (q_minus, q_plus)
        t /= 2.0

    assert best is not None
    bound, q_minus, q_plus = best
    scale = nx * ny * base
    radius = bound * nx * ny
    converged = radius <= tol * nx * ny
    if not converged:
        logger.warning(
            "numerical_enclosure_not_converged", radius=radius, tol=tol, scale=nx * ny
        )
    return DerivativePair(
        q_minus * scale, q_plus * scale, radius, DerivativeMethod.NUMERICAL, converged
    )


def rho_pair(
    spec: NormSpec,
    x: Union[Vector, Sequence[float]],
    y: Union[Vector, Sequence[float]],
    method: Union[DerivativeMethod, str] = DerivativeMethod.AUTO,
    tol: float = 1e-6,
) -> DerivativePair:
    """Compute (rho-(x, y), rho+(x, y)).

    Args:
        spec: Norm of the space
        x: Base point; x = 0 gives (0, 0) exactly
        y: Direction
        method: auto/exact use the closed forms, numerical forces the enclosure
        tol: Requested accuracy of the numerical enclosure (relative to ||x|| ||y||)

    Returns:
        DerivativePair; a numerical pair that missed ``tol`` has converged=False
    """
    xv, yv = _pair_vectors(spec, x, y)
    method = DerivativeMethod(method)
    compiled = compile_norm(spec)
    if not np.any(xv):
        return DerivativePair(0.0, 0.0, 0.0, DerivativeMethod.EXACT)
    if method is DerivativeMethod.NUMERICAL:
        return _numerical_pair(compiled, xv, yv, tol)
    return _exact_pair(compiled, xv, yv)


def rho_lambda(spec: NormSpec, lam: float, x: Any, y: Any) -> float:
    """lambda * rho-(x, y) + (1 - lambda) * rho+(x, y)."""
    return rho_pair(spec, x, y).rho_lambda(validate_lambda(lam))


def rho_mid(spec: NormSpec, x: Any, y: Any) -> float:
    return rho_pair(spec, x, y).mid


def rho_star(spec: NormSpec, x: Any, y: Any) -> float:
    return rho_pair(spec, x, y).star


def inner_product_candidate(spec: NormSpec, lam: float, x: Any, y: Any) -> float:
    """(rho_lambda(x, y) + rho_{1-lambda}(x, y)) / 2; identically rho(x, y)."""
    lam = validate_lambda(lam)
    pair = rho_pair(spec, x, y)
    return (pair.rho_lambda(lam) + pair.rho_lambda(1.0 - lam)) / 2.0


@dataclass(frozen=True)
class SmoothnessResult:
    smooth: bool
    witness: Optional[Vector] = None
    gap: float = 0.0

    def __bool__(self) -> bool:
        return self.smooth


def _structural_witness(compiled: CompiledNorm, x: Vector) -> Optional[Vector]:
    """A direction with rho+ > rho- read off the active structure, or None if smooth."""
    if compiled.is_smooth:
        return None
    rows = compiled.rows
    u = rows @ x
    s = lp_value(u, compiled.p)
    if math.isinf(compiled.p):
        active = np.flatnonzero((s - np.abs(u)) <= ACTIVE_TOL * s)
        signed = np.sign(u[active])[:, None] * rows[active]
        for r in signed[1:]:
            if not np.allclose(r, signed[0], rtol=0.0, atol=1e-12 * np.abs(signed[0]).max()):
                return r - signed[0]
        return None
    zero = np.flatnonzero(np.abs(u) <= ACTIVE_TOL * s)
    if zero.size == 0:
        return None
    return rows[zero[0]].copy()


def is_smooth_at(
    spec: NormSpec,
    x: Any,
    directions: int = 32,
    tol: float = 1e-9,
    method: Union[DerivativeMethod, str] = DerivativeMethod.AUTO,
    seed: int = 0,
) -> SmoothnessResult:
    """Decide whether rho-(x, .) = rho+(x, .), returning a violating direction if not.

    The exact path reads the answer from the active-set structure; the numerical
    path compares enclosures over basis and random directions.
    """
    xv = as_vector(x, spec.dim)
    if not np.any(xv):
        raise ZeroVectorError("smoothness is undefined at the origin")
    compiled = compile_norm(spec)
    method = DerivativeMethod(method)

    if method is not DerivativeMethod.NUMERICAL:
        eye = np.eye(spec.dim)
        candidates = [eye[j] for j in range(spec.dim)]
        structural = _structural_witness(compiled, xv)
        if structural is None:
            return SmoothnessResult(True)
        candidates.append(structural)
        nx = compiled.value(xv)
        for y in candidates:
            pair = _exact_pair(compiled, xv, y)
            if pair.gap > tol * nx * compiled.value(y):
                return SmoothnessResult(False, y, pair.gap)
        return SmoothnessResult(False, structural, _exact_pair(compiled, xv, structural).gap)

    rng = np.random.default_rng(seed)
    nx = compiled.value(xv)
    probes = list(np.eye(spec.dim)) + list(rng.standard_normal((directions, spec.dim)))
    for y in probes:
        pair = _numerical_pair(compiled, xv, y, tol=1e-6)
        if pair.gap > tol * nx * compiled.value(y) + 2.0 * pair.enclosure_radius:
            return SmoothnessResult(False, np.asarray(y), pair.gap)
    return SmoothnessResult(True)


@dataclass(frozen=True)
class GateauxDifferential:
    """The derivative functional f_x(y) = rho(x, y) / ||x|| at a smooth point."""

    coefficients: Vector
    base_point: Vector

    def apply(self, y: Any) -> float:
        return float(self.coefficients @ as_vector(y, self.coefficients.size))

    def to_dict(self) -> dict[str, Any]:
        return {
            "coefficients": self.coefficients.tolist(),
            "base_point": self.base_point.tolist(),
        }


def gateaux_differential(spec: NormSpec, x: Any) -> GateauxDifferential:
    """Assemble f_x from rho(x, e_j) / ||x||; raises NonSmoothPointError at kinks."""
    xv = as_vector(x, spec.dim)
    smooth = is_smooth_at(spec, xv)
    if not smooth:
        raise NonSmoothPointError(
            f"norm is not smooth at x={xv.tolist()}", witness=smooth.witness, gap=smooth.gap
        )
    compiled = compile_norm(spec)
    nx = compiled.value(xv)
    eye = np.eye(spec.dim)
    coeffs = np.array([_exact_pair(compiled, xv, eye[j]).mid / nx for j in range(spec.dim)])
    return GateauxDifferential(coeffs, xv)
