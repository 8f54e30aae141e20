"""
Linear maps between finite-dimensional normed spaces.

Operator norm, similarity defect, preservation of orthogonality relations, the
rho_lambda scaling identity and the two-norm rho_lambda equivalence constants.
A linear map preserves rho_lambda-orthogonality exactly when it is a
similarity, exactly when rho_lambda(Tx, Ty) = ||T||^2 rho_lambda(x, y);
``similarity_verdict`` evaluates all three conditions side by side.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import structlog

from rholab.derivatives import rho_pair, validate_lambda
from rholab.models import LinearMap, LpNorm, NormSpec, OrthogonalityRelation, Vector
from rholab.normcore import compile_norm, random_unit_vector, sample_unit_sphere, structured_points
from rholab.orthogonality import (
    MAX_ATTEMPTS_PER_TRIAL,
    ProbeResult,
    ProbeStatus,
    check,
    construct_orthogonal_pair,
)
from rholab.search import multi_start

logger = structlog.get_logger()

ORTH_TOL = 1e-8
DEFECT_TOL = 1e-6
RESIDUAL_TOL = 1e-6
_STRUCTURED_PAIRS = 400


@dataclass
class OperatorNormEstimate:
    """Best ||T x|| found on the domain unit sphere; exact for an l1 domain."""

    value: float
    lower_witness: Vector
    is_exact: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "lower_witness": self.lower_witness.tolist(),
            "is_exact": self.is_exact,
        }


def operator_norm(
    linear_map: LinearMap, budget: int = 64, seed: int = 0, steps: int = 200
) -> OperatorNormEstimate:
    """||T|| = sup ||T x|| over the domain unit sphere.

    An Lp(1) domain uses the column formula max_j ||T e_j||; otherwise the value
    is the best of a multi-start local search (a lower bound on ||T||).
    """
    t = linear_map.array
    dom = compile_norm(linear_map.domain)
    cod = compile_norm(linear_map.codomain)
    n = linear_map.domain.dim

    if not np.any(t):
        logger.warning("zero_map", domain=linear_map.domain.label)
        return OperatorNormEstimate(0.0, np.eye(n)[0], True)

    if isinstance(linear_map.domain, LpNorm) and linear_map.domain.p == 1:
        values = [cod.value(t[:, j]) for j in range(n)]
        j = int(np.argmax(values))
        return OperatorNormEstimate(float(values[j]), np.eye(n)[j], True)

    rng = np.random.default_rng(seed)

    def objective(x: Vector) -> float:
        return cod.value(t @ x)

    def project(x: Vector) -> Optional[Vector]:
        nx = dom.value(x)
        return x / nx if nx > 0 else None

    starts = structured_points(linear_map.domain)
    starts += [random_unit_vector(dom, rng) for _ in range(budget)]
    result = multi_start(objective, starts, project, rng, steps=steps)
    return OperatorNormEstimate(result.value, result.point, False)


@dataclass
class SimilarityDefect:
    """Extremes of ||T x|| over sampled unit vectors x."""

    ratio_max: float
    ratio_min: float
    witness_max: Vector
    witness_min: Vector
    degenerate: bool = False
    samples: int = 0

    @property
    def defect(self) -> float:
        return self.ratio_max - self.ratio_min

    @property
    def relative_defect(self) -> float:
        return self.defect / self.ratio_max if self.ratio_max > 0 else math.inf

    def is_similarity(self, tol: float = DEFECT_TOL) -> bool:
        return not self.degenerate and self.relative_defect <= tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "ratio_max": self.ratio_max,
            "ratio_min": self.ratio_min,
            "defect": self.defect,
            "relative_defect": self.relative_defect,
            "witness_max": self.witness_max.tolist(),
            "witness_min": self.witness_min.tolist(),
            "degenerate": self.degenerate,
            "samples": self.samples,
        }


def similarity_defect(
    linear_map: LinearMap, budget: int = 1000, seed: int = 0
) -> SimilarityDefect:
    """max and min of ||T x|| over structured and sampled unit vectors of the domain."""
    t = linear_map.array
    cod = compile_norm(linear_map.codomain)
    points = structured_points(linear_map.domain)
    points += sample_unit_sphere(linear_map.domain, budget, seed)
    ratios = np.array([cod.value(t @ x) for x in points])
    i_max, i_min = int(np.argmax(ratios)), int(np.argmin(ratios))
    degenerate = bool(not linear_map.is_injective or ratios[i_min] <= 1e-12 * ratios[i_max])
    if degenerate:
        logger.warning("similarity_degenerate_map", rank=linear_map.rank)
    return SimilarityDefect(
        float(ratios[i_max]),
        float(ratios[i_min]),
        points[i_max],
        points[i_min],
        degenerate,
        len(points),
    )


def preserves_orthogonality(
    linear_map: LinearMap,
    relation: OrthogonalityRelation,
    trials: int,
    seed: int,
    tol: float = ORTH_TOL,
    structured: bool = True,
) -> ProbeResult:
    """Search for x ⊥ z in the domain with T x not ⊥ T z in the codomain."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    name = relation.name
    result = ProbeResult(ProbeStatus.PASS, f"{name} (domain)", f"{name} (codomain)")
    if not linear_map.is_injective:
        result.status = ProbeStatus.DEGENERATE
        result.detail = f"map has rank {linear_map.rank} < {linear_map.domain.dim}"
        logger.warning("preservation_degenerate_map", rank=linear_map.rank)
        return result

    domain, codomain = linear_map.domain, linear_map.codomain
    t = linear_map.array
    dom = compile_norm(domain)

    def test(x: Vector, z: Vector) -> bool:
        if not np.any(z) or not check(relation, domain, x, z, tol / 10.0).orthogonal:
            return False
        mapped = check(relation, codomain, t @ x, t @ z, tol)
        if mapped.orthogonal:
            return False
        result.status = ProbeStatus.WITNESS
        result.witness = (x, z)
        result.residual = mapped.residual
        result.scale = mapped.scale
        return True

    seeds = structured_points(domain) if structured else []
    if structured:
        ys = seeds[: 2 * domain.dim + 2 * domain.dim * (domain.dim - 1)]
        for x, y in itertools.product(seeds, ys):
            for fraction in (0.0, 1.0, 0.5):
                result.structured_probes += 1
                try:
                    xa, za = construct_orthogonal_pair(relation, domain, x, y, fraction=fraction)
                except ValueError:
                    continue
                if test(xa, za):
                    return result

    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        for _ in range(MAX_ATTEMPTS_PER_TRIAL):
            if seeds and rng.uniform() < 0.5:
                x = seeds[int(rng.integers(len(seeds)))]
            else:
                x = random_unit_vector(dom, rng)
            y = rng.standard_normal(domain.dim)
            result.attempts += 1
            try:
                xa, za = construct_orthogonal_pair(relation, domain, x, y, rng)
            except ValueError:
                continue
            if not np.any(za) or not check(relation, domain, xa, za, tol / 10.0).orthogonal:
                continue
            result.trials += 1
            if test(xa, za):
                return result
            break
        else:
            result.starved_trials += 1
    if result.starved_trials:
        result.status = ProbeStatus.STARVED
    return result


def preserves_rho_lambda(
    linear_map: LinearMap, lam: float, trials: int, seed: int, tol: float = ORTH_TOL
) -> ProbeResult:
    """Does T map rho_lambda-orthogonal pairs to rho_lambda-orthogonal pairs?"""
    relation = OrthogonalityRelation.rho_lambda(validate_lambda(lam))
    return preserves_orthogonality(linear_map, relation, trials, seed, tol)


@dataclass
class ScalingResidual:
    """max |rho_lambda(Tx, Ty) - ||T||^2 rho_lambda(x, y)| / (||T||^2 ||x|| ||y||)."""

    value: float
    witness: Optional[tuple[Vector, Vector]]
    operator_norm: OperatorNormEstimate
    degenerate: bool = False
    samples: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "witness": None
            if self.witness is None
            else {"x": self.witness[0].tolist(), "y": self.witness[1].tolist()},
            "operator_norm": self.operator_norm.to_dict(),
            "degenerate": self.degenerate,
            "samples": self.samples,
        }


def _unit_pairs(spec: NormSpec, trials: int, seed: int) -> list[tuple[Vector, Vector]]:
    points = structured_points(spec)
    pairs = list(itertools.product(points, repeat=2))[:_STRUCTURED_PAIRS]
    sphere = sample_unit_sphere(spec, 2 * trials, seed)
    pairs.extend(zip(sphere[::2], sphere[1::2]))
    return pairs


def scaling_identity_residual(
    linear_map: LinearMap, lam: float, trials: int, seed: int, budget: int = 64
) -> ScalingResidual:
    lam = validate_lambda(lam)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    norm = operator_norm(linear_map, budget, seed)
    if norm.value == 0 or not linear_map.is_injective:
        return ScalingResidual(math.inf, None, norm, degenerate=True)
    t = linear_map.array
    dom = compile_norm(linear_map.domain)
    n2 = norm.value**2
    best, arg = -1.0, None
    pairs = _unit_pairs(linear_map.domain, trials, seed)
    for x, y in pairs:
        lhs = rho_pair(linear_map.codomain, t @ x, t @ y).rho_lambda(lam)
        rhs = n2 * rho_pair(linear_map.domain, x, y).rho_lambda(lam)
        r = abs(lhs - rhs) / (n2 * dom.value(x) * dom.value(y))
        if r > best:
            best, arg = r, (x, y)
    return ScalingResidual(best, arg, norm, samples=len(pairs))


@dataclass
class NormRatioReport:
    """Range of |rho_lambda,2| / |rho_lambda,1| and an orthogonality-breaking pair if any."""

    m_hat: float
    M_hat: float
    witness_min: Optional[tuple[Vector, Vector]]
    witness_max: Optional[tuple[Vector, Vector]]
    breaking_witness: Optional[tuple[Vector, Vector]] = None
    breaking_residual: float = 0.0
    pairs_used: int = 0

    @property
    def spread(self) -> float:
        return self.M_hat / self.m_hat if self.m_hat > 0 else math.inf

    def to_dict(self) -> dict[str, Any]:
        def pair(p: Optional[tuple[Vector, Vector]]) -> Optional[dict[str, list[float]]]:
            return None if p is None else {"x": p[0].tolist(), "y": p[1].tolist()}

        return {
            "m_hat": self.m_hat,
            "M_hat": self.M_hat,
            "spread": self.spread,
            "witness_min": pair(self.witness_min),
            "witness_max": pair(self.witness_max),
            "breaking_witness": pair(self.breaking_witness),
            "breaking_residual": self.breaking_residual,
            "pairs_used": self.pairs_used,
        }


def two_norm_rho_ratio(
    spec1: NormSpec,
    spec2: NormSpec,
    lam: float,
    trials: int,
    seed: int,
    threshold: float = 1e-6,
    tol: float = ORTH_TOL,
) -> NormRatioReport:
    """Estimate m, M with m |rho_lambda,1| <= |rho_lambda,2| <= M |rho_lambda,1|.

    Pairs where rho_lambda,1 vanishes but rho_lambda,2 does not break any such
    equivalence and are reported as breaking witnesses.
    """
    lam = validate_lambda(lam)
    if spec1.dim != spec2.dim:
        raise ValueError(f"norms live in different dimensions ({spec1.dim} vs {spec2.dim})")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    c1 = compile_norm(spec1)
    relation = OrthogonalityRelation.rho_lambda(lam)
    m_hat, M_hat = math.inf, 0.0
    w_min = w_max = None
    used = 0
    for x, y in _unit_pairs(spec1, trials, seed):
        r1 = rho_pair(spec1, x, y).rho_lambda(lam)
        if abs(r1) <= threshold * c1.value(x) * c1.value(y):
            continue
        ratio = abs(rho_pair(spec2, x, y).rho_lambda(lam)) / abs(r1)
        used += 1
        if ratio < m_hat:
            m_hat, w_min = ratio, (x, y)
        if ratio > M_hat:
            M_hat, w_max = ratio, (x, y)

    report = NormRatioReport(m_hat if used else 0.0, M_hat, w_min, w_max, pairs_used=used)
    rng = np.random.default_rng([seed, 1])
    candidates = list(itertools.product(structured_points(spec1), repeat=2))[:_STRUCTURED_PAIRS]
    for _ in range(trials):
        candidates.append((random_unit_vector(c1, rng), rng.standard_normal(spec1.dim)))
    for x, y in candidates:
        xa, za = construct_orthogonal_pair(relation, spec1, x, y)
        if not np.any(za) or not check(relation, spec1, xa, za, tol / 10.0).orthogonal:
            continue
        second = check(relation, spec2, xa, za, tol)
        if not second.orthogonal:
            report.breaking_witness = (xa, za)
            report.breaking_residual = second.residual
            break
    return report


@dataclass
class SimilarityVerdict:
    """The three equivalent similarity conditions evaluated at matched tolerances."""

    preserves: ProbeResult
    similarity: SimilarityDefect
    scaling: ScalingResidual
    conditions: dict[str, bool] = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return (
            self.preserves.status is ProbeStatus.DEGENERATE
            or self.similarity.degenerate
            or self.scaling.degenerate
        )

    @property
    def consistent(self) -> bool:
        return len(set(self.conditions.values())) <= 1

    @property
    def is_similarity(self) -> bool:
        return self.consistent and all(self.conditions.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "conditions": dict(self.conditions),
            "consistent": self.consistent,
            "degenerate": self.degenerate,
            "preserves": self.preserves.to_dict(),
            "similarity": self.similarity.to_dict(),
            "scaling": self.scaling.to_dict(),
        }


def similarity_verdict(
    linear_map: LinearMap, lam: float, trials: int, seed: int, budget: int = 64
) -> SimilarityVerdict:
    preserves = preserves_rho_lambda(linear_map, lam, trials, seed, ORTH_TOL)
    similarity = similarity_defect(linear_map, max(trials, 100), seed)
    scaling = scaling_identity_residual(linear_map, lam, trials, seed, budget)
    verdict = SimilarityVerdict(preserves, similarity, scaling)
    verdict.conditions = {
        "preserves_orthogonality": preserves.status is ProbeStatus.PASS,
        "similarity": similarity.is_similarity(DEFECT_TOL),
        "scaling_identity": not scaling.degenerate and scaling.value <= RESIDUAL_TOL,
    }
    if not verdict.consistent:
        logger.warning("similarity_conditions_disagree", conditions=verdict.conditions)
    return verdict
