"""
Orthogonality relations, the Birkhoff interval, rho_lambda-orthogonalization
and the relation inclusion probe.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Optional

import numpy as np
import structlog
from scipy.optimize import brentq

from rholab.derivatives import (
    DerivativePair,
    _pair_vectors,
    is_smooth_at,
    rho_pair,
    validate_lambda,
)
from rholab.exceptions import ZeroVectorError
from rholab.models import NormSpec, OrthogonalityRelation, RelationKind, Vector
from rholab.normcore import compile_norm, random_unit_vector, structured_points

logger = structlog.get_logger()

DEFAULT_TOL = 1e-8
MAX_ATTEMPTS_PER_TRIAL = 100

# lambda weight of rho- for each member of the rho-family.
_FAMILY_LAMBDA = {
    RelationKind.RHO_MINUS: 1.0,
    RelationKind.RHO_PLUS: 0.0,
    RelationKind.RHO_MID: 0.5,
}


@dataclass(frozen=True)
class OrthResult:
    """Outcome of one orthogonality test: orthogonal iff |residual| <= tol_used * scale."""

    orthogonal: bool
    residual: float
    tol_used: float
    scale: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "orthogonal": self.orthogonal,
            "residual": self.residual,
            "tol_used": self.tol_used,
            "scale": self.scale,
        }


def relation_value(relation: OrthogonalityRelation, pair: DerivativePair) -> float:
    """The functional whose zero set defines a rho-family relation."""
    kind = relation.kind
    if kind is RelationKind.RHO_STAR:
        return pair.star
    if kind is RelationKind.RHO_LAMBDA:
        assert relation.lam is not None
        return pair.rho_lambda(relation.lam)
    if kind in _FAMILY_LAMBDA:
        return pair.rho_lambda(_FAMILY_LAMBDA[kind])
    raise ValueError(f"{relation.name} is not a rho-family relation")


def check(
    relation: OrthogonalityRelation,
    spec: NormSpec,
    x: Any,
    y: Any,
    tol: float = DEFAULT_TOL,
) -> OrthResult:
    """Test x ⊥ y for the given relation.

    Birkhoff uses the sign test rho-(x, y) <= 0 <= rho+(x, y). Isosceles
    takes ||x + y|| - ||x - y|| against the scale (||x|| + ||y||)^2.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    xv, yv = _pair_vectors(spec, x, y)
    compiled = compile_norm(spec)
    nx, ny = compiled.value(xv), compiled.value(yv)

    if relation.kind is RelationKind.ISOSCELES:
        residual = compiled.value(xv + yv) - compiled.value(xv - yv)
        scale = (nx + ny) ** 2
    else:
        pair = rho_pair(spec, xv, yv)
        scale = nx * ny
        if relation.kind is RelationKind.BIRKHOFF:
            residual = max(pair.rho_minus, -pair.rho_plus, 0.0)
        else:
            residual = relation_value(relation, pair)
            if relation.kind is RelationKind.RHO_STAR:
                scale = scale**2
    return OrthResult(abs(residual) <= tol * scale, residual, tol, scale)


@dataclass(frozen=True)
class BirkhoffInterval:
    """All t with x ⊥_B t x + y."""

    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, t: float) -> bool:
        return self.lo <= t <= self.hi

    def point(self, fraction: float) -> float:
        return self.lo + fraction * self.width


def birkhoff_interval(spec: NormSpec, x: Any, y: Any) -> BirkhoffInterval:
    """[-rho+(x, y) / ||x||^2, -rho-(x, y) / ||x||^2]."""
    xv, yv = _pair_vectors(spec, x, y)
    if not np.any(xv):
        raise ZeroVectorError("birkhoff_interval needs x != 0")
    nx2 = compile_norm(spec).value(xv) ** 2
    pair = rho_pair(spec, xv, yv)
    lo = -pair.rho_plus / nx2 + 0.0
    hi = -pair.rho_minus / nx2 + 0.0
    return BirkhoffInterval(lo, hi)


@dataclass(frozen=True)
class Orthogonalization:
    """z = t x + y with rho_lambda(x, z) = 0 unless flagged."""

    t: float
    z: Vector
    residual: float
    flagged: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "z": self.z.tolist(),
            "residual": self.residual,
            "flagged": self.flagged,
        }


def rho_lambda_orthogonalize(
    spec: NormSpec, lam: float, x: Any, y: Any, tol: float = DEFAULT_TOL
) -> Orthogonalization:
    """Shift y along x so that rho_lambda(x, z) = 0."""
    lam = validate_lambda(lam)
    xv, yv = _pair_vectors(spec, x, y)
    if not np.any(xv):
        raise ZeroVectorError("rho_lambda_orthogonalize needs x != 0")
    compiled = compile_norm(spec)
    nx = compiled.value(xv)
    t = -rho_pair(spec, xv, yv).rho_lambda(lam) / nx**2 + 0.0
    z = t * xv + yv
    residual = rho_pair(spec, xv, z).rho_lambda(lam)
    flagged = abs(residual) > tol * nx * compiled.value(z)
    if flagged:
        logger.warning("orthogonalization_flagged", lam=lam, residual=residual, spec=spec.label)
    return Orthogonalization(t, z, residual, flagged)


def construct_orthogonal_pair(
    relation: OrthogonalityRelation,
    spec: NormSpec,
    x: Vector,
    y: Vector,
    rng: Optional[np.random.Generator] = None,
    fraction: Optional[float] = None,
) -> tuple[Vector, Vector]:
    """Build (x', z) with x' ⊥ z for the relation, starting from x and the direction y.

    ``fraction`` picks the point of the Birkhoff interval (or which zero set of
    rho* is used); when omitted it is drawn from ``rng``.
    """
    compiled = compile_norm(spec)
    nx2 = compiled.value(x) ** 2
    kind = relation.kind

    if kind is RelationKind.ISOSCELES:
        ny = compiled.value(y)
        yv = y * (math.sqrt(nx2) / (4.0 * ny)) if ny > 0 else y

        def h(s: float) -> float:
            return compiled.value(x + yv + s * x) - compiled.value(x - yv - s * x)

        s = brentq(h, -1.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        return x, yv + s * x

    if fraction is None:
        fraction = float(rng.uniform()) if rng is not None else 0.5

    pair = rho_pair(spec, x, y)
    if kind is RelationKind.BIRKHOFF:
        t = -pair.rho_plus / nx2 + fraction * pair.gap / nx2
    elif kind is RelationKind.RHO_STAR:
        t = -(pair.rho_minus if fraction < 0.5 else pair.rho_plus) / nx2
    else:
        t = -relation_value(relation, pair) / nx2
    z = t * x + y

    if rng is not None:
        # positive rescaling keeps every non-isosceles zero set
        x = x * math.exp(rng.uniform(-1.0, 1.0))
        z = z * math.exp(rng.uniform(-1.0, 1.0))
    return x, z


class ProbeStatus(str, Enum):
    PASS = "pass"
    WITNESS = "witness"
    STARVED = "starved"
    DEGENERATE = "degenerate"


@dataclass
class ProbeResult:
    """Outcome of searching pairs in relation A that violate relation B."""

    status: ProbeStatus
    relation_a: str
    relation_b: str
    trials: int = 0
    attempts: int = 0
    structured_probes: int = 0
    witness: Optional[tuple[Vector, Vector]] = None
    residual: float = 0.0
    scale: float = 0.0
    starved_trials: int = 0
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status is ProbeStatus.PASS

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "relation_a": self.relation_a,
            "relation_b": self.relation_b,
            "trials": self.trials,
            "attempts": self.attempts,
            "structured_probes": self.structured_probes,
            "witness": None
            if self.witness is None
            else {"x": self.witness[0].tolist(), "y": self.witness[1].tolist()},
            "residual": self.residual,
            "scale": self.scale,
            "starved_trials": self.starved_trials,
            "detail": self.detail,
        }


def is_witness(
    rel_a: OrthogonalityRelation,
    rel_b: OrthogonalityRelation,
    spec: NormSpec,
    x: Vector,
    y: Vector,
    tol: float = DEFAULT_TOL,
) -> tuple[bool, bool, OrthResult]:
    """(member of A at tol/10, witness against B at tol, result of B)."""
    member = check(rel_a, spec, x, y, tol / 10.0).orthogonal
    result_b = check(rel_b, spec, x, y, tol)
    return member, member and not result_b.orthogonal, result_b


@dataclass
class _TrialOutcome:
    index: int
    attempts: int
    starved: bool = False
    witness: Optional[tuple[Vector, Vector]] = None
    result_b: Optional[OrthResult] = None


def _run_trial(
    index: int,
    rel_a: OrthogonalityRelation,
    rel_b: OrthogonalityRelation,
    spec: NormSpec,
    seed: int,
    tol: float,
    seeds: list[Vector],
) -> _TrialOutcome:
    compiled = compile_norm(spec)
    rng = np.random.default_rng([seed, index])
    for attempt in range(1, MAX_ATTEMPTS_PER_TRIAL + 1):
        if seeds and rng.uniform() < 0.5:
            x = seeds[int(rng.integers(len(seeds)))]
        else:
            x = random_unit_vector(compiled, rng)
        y = rng.standard_normal(spec.dim)
        try:
            xa, za = construct_orthogonal_pair(rel_a, spec, x, y, rng)
        except ValueError:
            continue
        if not np.any(za):
            continue
        member, witness, result_b = is_witness(rel_a, rel_b, spec, xa, za, tol)
        if not member:
            continue
        if witness:
            return _TrialOutcome(index, attempt, witness=(xa, za), result_b=result_b)
        return _TrialOutcome(index, attempt)
    return _TrialOutcome(index, MAX_ATTEMPTS_PER_TRIAL, starved=True)


def _run_chunk(indices: range, stop_early: bool, **kwargs: Any) -> list[_TrialOutcome]:
    out = []
    for i in indices:
        outcome = _run_trial(i, **kwargs)
        out.append(outcome)
        if stop_early and outcome.witness is not None:
            break
    return out


def _structured_candidates(
    relation: OrthogonalityRelation, spec: NormSpec
) -> list[tuple[Vector, Vector, float]]:
    points = structured_points(spec)
    xs = sorted(points, key=lambda v: bool(is_smooth_at(spec, v)))
    ys = points[: 2 * spec.dim + 2 * spec.dim * (spec.dim - 1)]
    if relation.kind is RelationKind.BIRKHOFF:
        fractions = [0.0, 1.0, 0.5]
    elif relation.kind is RelationKind.RHO_STAR:
        fractions = [0.0, 1.0]
    else:
        fractions = [0.5]
    return [(x, y, f) for x in xs for y in ys for f in fractions]


def inclusion_probe(
    rel_a: OrthogonalityRelation,
    rel_b: OrthogonalityRelation,
    spec: NormSpec,
    trials: int,
    seed: int,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
    structured: bool = True,
    max_structured: Optional[int] = None,
) -> ProbeResult:
    """Look for x ⊥_A y with x not ⊥_B y.

    Pairs in A are constructed (never only rejected) and must satisfy A at
    tol/10; B must fail beyond tol * scale. Structured seed points are tried
    first, then ``trials`` random trials whose generators are split from the
    seed per trial index, so the result does not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    result = ProbeResult(ProbeStatus.PASS, rel_a.name, rel_b.name)

    seeds: list[Vector] = []
    if structured:
        seeds = structured_points(spec)
        candidates = _structured_candidates(rel_a, spec)
        if max_structured is not None:
            candidates = candidates[:max_structured]
        for x, y, fraction in candidates:
            result.structured_probes += 1
            try:
                xa, za = construct_orthogonal_pair(rel_a, spec, x, y, fraction=fraction)
            except ValueError:
                continue
            if not np.any(za):
                continue
            _, witness, result_b = is_witness(rel_a, rel_b, spec, xa, za, tol)
            if witness:
                result.status = ProbeStatus.WITNESS
                result.witness = (xa, za)
                result.residual = result_b.residual
                result.scale = result_b.scale
                logger.info(
                    "inclusion_witness",
                    relation_a=rel_a.name,
                    relation_b=rel_b.name,
                    spec=spec.label,
                    structured=True,
                )
                return result

    kwargs = dict(rel_a=rel_a, rel_b=rel_b, spec=spec, seed=seed, tol=tol, seeds=seeds)
    if workers <= 1:
        outcomes = _run_chunk(range(trials), stop_early=True, **kwargs)
    else:
        size = math.ceil(trials / workers)
        chunks = [range(s, min(s + size, trials)) for s in range(0, trials, size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(lambda c: _run_chunk(c, stop_early=True, **kwargs), chunks)
            outcomes = sorted((o for part in parts for o in part), key=lambda o: o.index)

    first = next((o for o in outcomes if o.witness is not None), None)
    counted = [o for o in outcomes if first is None or o.index <= first.index]
    result.trials = len(counted)
    result.attempts = sum(o.attempts for o in counted)
    result.starved_trials = sum(o.starved for o in counted)

    if first is not None:
        assert first.result_b is not None and first.witness is not None
        result.status = ProbeStatus.WITNESS
        result.witness = first.witness
        result.residual = first.result_b.residual
        result.scale = first.result_b.scale
        logger.info(
            "inclusion_witness", relation_a=rel_a.name, relation_b=rel_b.name, spec=spec.label
        )
    elif result.starved_trials:
        result.status = ProbeStatus.STARVED
        result.detail = f"{result.starved_trials} trials produced no {rel_a.name} pair"
        logger.warning(
            "inclusion_probe_starved",
            relation_a=rel_a.name,
            spec=spec.label,
            starved=result.starved_trials,
        )
    return result


_SHRINK_DENOMINATORS = (1, 2, 3, 4, 6, 8, 12, 16, 32, 64)


def _round(v: Vector, denominator: int) -> Vector:
    return np.array([float(Fraction(c).limit_denominator(denominator)) for c in v])


def shrink_witness(
    rel_a: OrthogonalityRelation,
    rel_b: OrthogonalityRelation,
    spec: NormSpec,
    x: Vector,
    y: Vector,
    tol: float = DEFAULT_TOL,
) -> tuple[Vector, Vector]:
    """Round a witness to small rationals when the rounded pair is still a witness."""
    compiled = compile_norm(spec)
    # bring the largest coordinate to 1 first; positive scaling keeps witness-hood
    # for every relation except isosceles
    if rel_a.kind is not RelationKind.ISOSCELES and rel_b.kind is not RelationKind.ISOSCELES:
        x = x / np.abs(x).max()
        y = y / np.abs(y).max()
    for d in _SHRINK_DENOMINATORS:
        xr, yr = _round(x, d), _round(y, d)
        if compiled.value(xr) == 0 or compiled.value(yr) == 0:
            continue
        if is_witness(rel_a, rel_b, spec, xr, yr, tol)[1]:
            return xr, yr
    return x, y
