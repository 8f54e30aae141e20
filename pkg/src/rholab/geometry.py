"""
Characterization functionals of a normed space.

Triangle-inequality refinement gap, slacks of the rho_lambda bounds, symmetry
and quartic defects (inner-product tests), the convexity modulus and the
rho_lambda bound it implies for uniformly convex norms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Optional, Sequence

import numpy as np
import structlog

from rholab.derivatives import _pair_vectors, inner_product_candidate, rho_pair, validate_lambda
from rholab.exceptions import ZeroVectorError
from rholab.models import NormSpec, Vector
from rholab.normcore import (
    CompiledNorm,
    compile_norm,
    random_unit_vector,
    sample_unit_sphere,
    structured_points,
)
from rholab.search import multi_start

logger = structlog.get_logger()

# xi_hat at or below this makes the uniform-convexity bound vacuous.
VACUOUS_XI = 1e-6
# Cap on structured pairs added to a sweep.
_STRUCTURED_PAIRS = 400


def _unit(compiled: CompiledNorm, v: Vector) -> Vector:
    return v / compiled.value(v)


def maligranda_gap(spec: NormSpec, x: Any, y: Any) -> float:
    """||x|| + ||y|| - (2 - ||x/||x|| + y/||y||||) min(||x||, ||y||) - ||x + y||; never negative."""
    xv, yv = _pair_vectors(spec, x, y)
    compiled = compile_norm(spec)
    nx, ny = compiled.value(xv), compiled.value(yv)
    if nx == 0 or ny == 0:
        raise ZeroVectorError("maligranda_gap needs nonzero x and y")
    unit_sum = compiled.value(xv / nx + yv / ny)
    return nx + ny - (2.0 - unit_sum) * min(nx, ny) - compiled.value(xv + yv)


@dataclass(frozen=True)
class BoundMargins:
    """Slacks (bound minus functional or functional minus bound) of the rho_lambda bounds."""

    v_lo: float
    v_hi: float
    vi: float
    vii_lo: float
    vii_hi: float
    refined_lower: float
    refined_upper: float

    def minimum(self) -> float:
        return min(self.v_lo, self.v_hi, self.vi, self.vii_lo, self.vii_hi)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.v_lo, self.v_hi, self.vi, self.vii_lo, self.vii_hi)

    def to_dict(self) -> dict[str, float]:
        return {
            "v_lo": self.v_lo,
            "v_hi": self.v_hi,
            "vi": self.vi,
            "vii_lo": self.vii_lo,
            "vii_hi": self.vii_hi,
            "refined_lower": self.refined_lower,
            "refined_upper": self.refined_upper,
        }


def rho_bounds_margins(spec: NormSpec, lam: float, x: Any, y: Any) -> BoundMargins:
    """Slacks of

    (||x|| - ||x - y||) ||x|| <= rho_lambda(x, y) <= (||x + y|| - ||x||) ||x||,
    |rho_lambda(x, y)| <= ||x|| ||y||, and the refined bounds with unit vectors
    (1 - ||x^ - y^||) ||x|| ||y|| <= rho_lambda <= (||x^ + y^|| - 1) ||x|| ||y||.
    """
    lam = validate_lambda(lam)
    xv, yv = _pair_vectors(spec, x, y)
    compiled = compile_norm(spec)
    nx, ny = compiled.value(xv), compiled.value(yv)
    if nx == 0 or ny == 0:
        raise ZeroVectorError("rho_bounds_margins needs nonzero x and y")
    r = rho_pair(spec, xv, yv).rho_lambda(lam)
    xh, yh = xv / nx, yv / ny
    refined_lower = 1.0 - compiled.value(xh - yh)
    refined_upper = compiled.value(xh + yh) - 1.0
    return BoundMargins(
        v_lo=r - (nx - compiled.value(xv - yv)) * nx,
        v_hi=(compiled.value(xv + yv) - nx) * nx - r,
        vi=nx * ny - abs(r),
        vii_lo=r - refined_lower * nx * ny,
        vii_hi=refined_upper * nx * ny - r,
        refined_lower=refined_lower,
        refined_upper=refined_upper,
    )


@dataclass
class DefectReport:
    """A maximal defect together with the arguments that produce it."""

    value: float
    arg_pair: tuple[Vector, Vector]
    lam: Optional[float] = None
    samples: int = 0
    arg_extra: Optional[Vector] = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "value": self.value,
            "x": self.arg_pair[0].tolist(),
            "y": self.arg_pair[1].tolist(),
            "lambda": self.lam,
            "samples": self.samples,
        }
        if self.arg_extra is not None:
            out["z"] = self.arg_extra.tolist()
        return out


def _sweep_pairs(
    spec: NormSpec,
    samples: int,
    seed: int,
    extra_pairs: Iterable[tuple[Any, Any]] = (),
) -> list[tuple[Vector, Vector]]:
    """Structured unit pairs, random unit pairs and injected pairs (normalized)."""
    compiled = compile_norm(spec)
    points = structured_points(spec)
    pairs = list(itertools.permutations(points, 2))[:_STRUCTURED_PAIRS]
    sphere = sample_unit_sphere(spec, 2 * samples, seed)
    pairs.extend(zip(sphere[::2], sphere[1::2]))
    for x, y in extra_pairs:
        xv, yv = _pair_vectors(spec, x, y)
        if compiled.value(xv) > 0 and compiled.value(yv) > 0:
            pairs.append((_unit(compiled, xv), _unit(compiled, yv)))
    return pairs


def symmetry_defect(
    spec: NormSpec,
    lam: float,
    samples: int,
    seed: int,
    extra_pairs: Iterable[tuple[Any, Any]] = (),
) -> DefectReport:
    """max |rho_lambda(x, y) - rho_lambda(y, x)| over unit pairs."""
    lam = validate_lambda(lam)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    best = -1.0
    arg: tuple[Vector, Vector] = (np.zeros(spec.dim), np.zeros(spec.dim))
    pairs = _sweep_pairs(spec, samples, seed, extra_pairs)
    for x, y in pairs:
        d = abs(rho_pair(spec, x, y).rho_lambda(lam) - rho_pair(spec, y, x).rho_lambda(lam))
        if d > best:
            best, arg = d, (x, y)
    return DefectReport(best, arg, lam, len(pairs))


def quartic_identity_defect(spec: NormSpec, lam: float, x: Any, y: Any) -> float:
    """||x+y||^4 - ||x-y||^4 - 8(||x||^2 rho_lambda(x, y) + ||y||^2 rho_lambda(y, x))."""
    lam = validate_lambda(lam)
    xv, yv = _pair_vectors(spec, x, y)
    compiled = compile_norm(spec)
    nx, ny = compiled.value(xv), compiled.value(yv)
    lhs = compiled.value(xv + yv) ** 4 - compiled.value(xv - yv) ** 4
    rhs = 8.0 * (
        nx**2 * rho_pair(spec, xv, yv).rho_lambda(lam)
        + ny**2 * rho_pair(spec, yv, xv).rho_lambda(lam)
    )
    return lhs - rhs


def quartic_identity_sweep(
    spec: NormSpec,
    lam: float,
    samples: int,
    seed: int,
    extra_pairs: Iterable[tuple[Any, Any]] = (),
) -> DefectReport:
    """Largest quartic defect relative to ||x||^4 + ||y||^4 (signed value of the maximizer)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    pairs = _sweep_pairs(spec, samples, seed, extra_pairs)
    compiled = compile_norm(spec)
    best = -1.0
    signed = 0.0
    arg: tuple[Vector, Vector] = pairs[0]
    for x, y in pairs:
        d = quartic_identity_defect(spec, lam, x, y)
        rel = abs(d) / (compiled.value(x) ** 4 + compiled.value(y) ** 4)
        if rel > best:
            best, signed, arg = rel, d, (x, y)
    report = DefectReport(best, arg, lam, len(pairs))
    logger.debug("quartic_sweep", spec=spec.label, lam=lam, relative=best, signed=signed)
    return report


def parallelogram_defect(spec: NormSpec, x: Any, y: Any) -> float:
    """||x+y||^2 + ||x-y||^2 - 2(||x||^2 + ||y||^2)."""
    xv, yv = _pair_vectors(spec, x, y)
    c = compile_norm(spec)
    sides = c.value(xv) ** 2 + c.value(yv) ** 2
    return c.value(xv + yv) ** 2 + c.value(xv - yv) ** 2 - 2.0 * sides


def additivity_defect(spec: NormSpec, lam: float, samples: int, seed: int) -> DefectReport:
    """max |<x+y, z> - <x, z> - <y, z>| for <x, y> := (rho_lambda + rho_{1-lambda}) / 2.

    The candidate is additive in its first argument exactly when the norm
    comes from an inner product.
    """
    lam = validate_lambda(lam)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    compiled = compile_norm(spec)
    rng = np.random.default_rng(seed)
    points = structured_points(spec)
    triples = list(itertools.permutations(points[: 2 * spec.dim + 4], 3))
    for _ in range(samples):
        x, y, z = (random_unit_vector(compiled, rng) for _ in range(3))
        triples.append((x, y, z))
    best = -1.0
    arg = triples[0]
    for x, y, z in triples:
        d = abs(
            inner_product_candidate(spec, lam, x + y, z)
            - inner_product_candidate(spec, lam, x, z)
            - inner_product_candidate(spec, lam, y, z)
        )
        if d > best:
            best, arg = d, (x, y, z)
    return DefectReport(best, (arg[0], arg[1]), lam, len(triples), arg_extra=arg[2])


class BoundDirection(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass
class ModulusEstimate:
    """delta_hat(epsilon) = 1 - best ||(x+y)/2|| found; an upper bound on the modulus."""

    epsilon: float
    delta_hat: float
    maximizer: tuple[Vector, Vector]
    bound: BoundDirection = BoundDirection.UPPER
    starts: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "delta_hat": self.delta_hat,
            "x": self.maximizer[0].tolist(),
            "y": self.maximizer[1].tolist(),
            "bound": self.bound.value,
            "starts": self.starts,
        }


def _separate(compiled: CompiledNorm, x: Vector, y: Vector, epsilon: float) -> Vector:
    """Push the unit vector y away from x until ||x - y|| >= epsilon."""
    s = 1.0
    while compiled.value(x - y) < epsilon and s < 1e6:
        y = _unit(compiled, y + s * (y - x)) if compiled.value(y - x) > 0 else -x
        s *= 2.0
    if compiled.value(x - y) < epsilon:
        y = -x
    return y


def _admissible_pairs(
    compiled: CompiledNorm, epsilon: float, count: int, rng: np.random.Generator
) -> list[tuple[Vector, Vector]]:
    pairs = []
    for _ in range(count):
        x = random_unit_vector(compiled, rng)
        y = _separate(compiled, x, random_unit_vector(compiled, rng), epsilon)
        pairs.append((x, y))
    return pairs


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon <= 2.0:
        raise ValueError(f"epsilon must lie in (0, 2], got {epsilon}")
    return epsilon


def convexity_modulus(
    spec: NormSpec,
    epsilon: float,
    budget: int = 200,
    seed: int = 0,
    steps: int = 120,
    warm_starts: Sequence[tuple[Vector, Vector]] = (),
) -> ModulusEstimate:
    """Estimate delta(epsilon) = 1 - sup{||(x+y)/2|| : ||x|| = ||y|| = 1, ||x - y|| >= epsilon}.

    Multi-start projected local search over sphere pairs; structured pairs and
    ``warm_starts`` come first, random admissible pairs fill the budget.
    """
    epsilon = _check_epsilon(epsilon)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    compiled = compile_norm(spec)
    n = spec.dim
    rng = np.random.default_rng(seed)

    def objective(z: Vector) -> float:
        return compiled.value((z[:n] + z[n:]) / 2.0)

    def project(z: Vector) -> Optional[Vector]:
        a, b = z[:n], z[n:]
        na, nb = compiled.value(a), compiled.value(b)
        if na == 0 or nb == 0:
            return None
        a, b = a / na, b / nb
        if compiled.value(a - b) < epsilon:
            return None
        return np.concatenate([a, b])

    starts: list[Vector] = []
    for x, y in warm_starts:
        if compiled.value(x - y) >= epsilon:
            starts.append(np.concatenate([x, y]))
    points = structured_points(spec)
    for x, y in itertools.permutations(points, 2):
        if len(starts) >= budget // 2:
            break
        if compiled.value(x - y) >= epsilon:
            starts.append(np.concatenate([x, y]))
    for x, y in _admissible_pairs(compiled, epsilon, max(budget - len(starts), 1), rng):
        starts.append(np.concatenate([x, y]))

    result = multi_start(objective, starts, project, rng, steps=steps)
    x, y = result.point[:n], result.point[n:]
    delta_hat = min(1.0, max(0.0, 1.0 - result.value))
    return ModulusEstimate(epsilon, delta_hat, (x, y), BoundDirection.UPPER, result.starts)


def modulus_curve(
    spec: NormSpec, epsilons: Sequence[float], budget: int = 200, seed: int = 0
) -> list[ModulusEstimate]:
    """Estimates for several epsilons, nondecreasing in epsilon.

    Larger epsilons are solved first and their maximizers seed the smaller
    ones (an admissible pair for epsilon stays admissible below it).
    """
    order = sorted({_check_epsilon(e) for e in epsilons}, reverse=True)
    warm: list[tuple[Vector, Vector]] = []
    estimates: dict[float, ModulusEstimate] = {}
    for eps in order:
        est = convexity_modulus(spec, eps, budget, seed, warm_starts=warm)
        warm.append(est.maximizer)
        estimates[eps] = est
    return [estimates[e] for e in sorted(estimates)]


def xi_from_rho_certificate(epsilon: float, delta: float) -> float:
    """Modulus certificate min{epsilon/4, delta^2 / (1 + delta^2)} from a rho_lambda bound."""
    return min(epsilon / 4.0, delta**2 / (1.0 + delta**2))


def delta_from_xi(xi: float) -> float:
    """delta = sqrt(xi / (1 - xi)), for which (1 - delta^2) / (1 + delta^2) = 1 - 2 xi."""
    if not 0.0 <= xi < 1.0:
        raise ValueError("xi must lie in [0, 1)")
    return math.sqrt(xi / (1.0 - xi))


class UcStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    VACUOUS = "vacuous"


@dataclass
class UniformConvexityCheck:
    """Outcome of rho_lambda(x, y) <= 1 - 2 xi_hat on admissible unit pairs."""

    status: UcStatus
    epsilon: float
    lam: float
    xi_hat: float
    bound: float
    trials: int
    witness: Optional[tuple[Vector, Vector]] = None
    residual: float = 0.0
    modulus: Optional[ModulusEstimate] = field(default=None, repr=False)

    @property
    def delta(self) -> float:
        return delta_from_xi(self.xi_hat)

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "epsilon": self.epsilon,
            "lambda": self.lam,
            "xi_hat": self.xi_hat,
            "bound": self.bound,
            "trials": self.trials,
            "residual": self.residual,
            "witness": None
            if self.witness is None
            else {"x": self.witness[0].tolist(), "y": self.witness[1].tolist()},
        }


def uc_rho_bound_check(
    spec: NormSpec,
    lam: float,
    epsilon: float,
    trials: int,
    seed: int,
    tol: float = 1e-9,
    budget: int = 200,
    estimate: Optional[ModulusEstimate] = None,
) -> UniformConvexityCheck:
    """Check rho_lambda(x, y) <= 1 - 2 xi_hat for unit pairs with ||x - y|| >= epsilon.

    xi_hat comes from ``convexity_modulus`` (or a precomputed ``estimate`` for
    the same epsilon) and is tightened by the sampled admissible pairs
    themselves, so it stays an upper bound on the modulus.
    """
    lam = validate_lambda(lam)
    epsilon = _check_epsilon(epsilon)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    compiled = compile_norm(spec)
    if estimate is None or estimate.epsilon != epsilon:
        estimate = convexity_modulus(spec, epsilon, budget, seed)
    rng = np.random.default_rng([seed, 1])
    pairs = _admissible_pairs(compiled, epsilon, trials, rng)

    best_mid = 1.0 - estimate.delta_hat
    for x, y in pairs:
        best_mid = max(best_mid, compiled.value((x + y) / 2.0))
    xi_hat = min(1.0, max(0.0, 1.0 - best_mid))
    bound = 1.0 - 2.0 * xi_hat
    status = UcStatus.VACUOUS if xi_hat <= VACUOUS_XI else UcStatus.PASS

    for x, y in pairs:
        r = rho_pair(spec, x, y).rho_lambda(lam)
        if r > bound + tol:
            logger.warning("uc_bound_violation", spec=spec.label, lam=lam, residual=r - bound)
            return UniformConvexityCheck(
                UcStatus.FAIL, epsilon, lam, xi_hat, bound, trials, (x, y), r - bound, estimate
            )
    if status is UcStatus.VACUOUS:
        logger.info("uc_bound_vacuous", spec=spec.label, epsilon=epsilon, xi_hat=xi_hat)
    return UniformConvexityCheck(status, epsilon, lam, xi_hat, bound, trials, modulus=estimate)
