"""
Check-suite harness.

Builds the checks of every selected suite over norms x lambdas (and linear
maps for the mappings suite), runs them with per-check seeds derived from the
config seed and assembles a SuiteReport. Check order and results do not depend
on the number of workers.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Union

import numpy as np
import pandas as pd
import structlog

from rholab.derivatives import DerivativeMethod, is_smooth_at, rho_pair
from rholab.geometry import (
    ModulusEstimate,
    UcStatus,
    additivity_defect,
    convexity_modulus,
    maligranda_gap,
    parallelogram_defect,
    quartic_identity_sweep,
    rho_bounds_margins,
    symmetry_defect,
    uc_rho_bound_check,
)
from rholab.mappings import similarity_verdict, two_norm_rho_ratio
from rholab.models import (
    LinearMap,
    LpNorm,
    NormSpec,
    OrthogonalityRelation,
    RelationKind,
    Vector,
    WeightedLpNorm,
)
from rholab.normcore import (
    SmoothnessClass,
    compile_norm,
    is_inner_product_norm,
    random_unit_vector,
    sample_unit_sphere,
    smoothness_class,
    structured_points,
    validate_norm_axioms,
)
from rholab.orthogonality import ProbeStatus, inclusion_probe, rho_lambda_orthogonalize
from rholab.reference import reproduce_reference_examples
from rholab.suite_config import SuiteConfig, SuiteName
from utils.logging import check_context

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

# Relative slack allowed for inequalities that hold exactly in theory.
PROPERTY_SLACK = 1e-9
SYMMETRY_TOL = 1e-8
QUARTIC_TOL = 1e-6
# A defect above this certifies a non-inner-product norm.
CERTIFIED_DEFECT = 1e-6
NUMERICAL_AGREEMENT = 1e-6
NUMERICAL_PAIRS = 1000
_STRUCTURED_PAIRS = 100
_HOMOGENEITY_FACTORS = (2.0, 0.5, 1.0, -1.0, -0.5, -2.0)
_SHIFTS = (-2.0, -0.5, 0.5, 2.0)


def stable_seed(*parts: object) -> int:
    """Create a deterministic seed from text parts."""
    text = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    VACUOUS = "vacuous"
    DEGENERATE = "degenerate"
    NUMERICAL_FAILURE = "numerical_failure"


def _json_float(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def pair_witness(x: Vector, y: Vector, **extra: Any) -> dict[str, Any]:
    out: dict[str, Any] = {"x": np.asarray(x).tolist(), "y": np.asarray(y).tolist()}
    out.update(extra)
    return out


@dataclass
class Outcome:
    status: CheckStatus
    residual: float = 0.0
    witness: Optional[dict[str, Any]] = None
    detail: str = ""


@dataclass
class CheckRecord:
    """Result of one check."""

    check_id: str
    suite: SuiteName
    status: CheckStatus
    residual: float = 0.0
    witness: Optional[dict[str, Any]] = None
    detail: str = ""
    runtime_ms: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        out = {
            "check_id": self.check_id,
            "suite": self.suite.value,
            "status": self.status.value,
            "residual": _json_float(self.residual),
            "witness": self.witness,
            "detail": self.detail,
        }
        if include_timing:
            out["runtime_ms"] = round(self.runtime_ms, 3)
        return out


@dataclass
class SuiteReport:
    """All check records of a run, in build order."""

    name: str
    seed: int
    records: list[CheckRecord] = field(default_factory=list)

    @property
    def summary(self) -> dict[str, int]:
        counts = Counter(r.status for r in self.records)
        return {status.value: counts.get(status, 0) for status in CheckStatus}

    @property
    def exit_code(self) -> int:
        """1 if any check failed, else 3 if any numerical failure, else 0."""
        statuses = {r.status for r in self.records}
        if CheckStatus.FAIL in statuses:
            return EXIT_FAIL
        if CheckStatus.NUMERICAL_FAILURE in statuses:
            return EXIT_NUMERICAL
        return EXIT_OK

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if r.status is CheckStatus.FAIL]

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        return {
            "name": self.name,
            "seed": self.seed,
            "summary": self.summary,
            "exit_code": self.exit_code,
            "records": [r.to_dict(include_timing) for r in self.records],
        }

    def to_json(self, include_timing: bool = False) -> str:
        """Canonical JSON: sorted keys, no runtime unless requested."""
        return json.dumps(self.to_dict(include_timing), sort_keys=True, indent=2)

    def to_frame(self) -> pd.DataFrame:
        rows = [r.to_dict(include_timing=True) for r in self.records]
        for row in rows:
            row["witness"] = json.dumps(row["witness"], sort_keys=True) if row["witness"] else ""
        columns = ["check_id", "suite", "status", "residual", "witness", "detail", "runtime_ms"]
        return pd.DataFrame(rows, columns=columns)

    def to_csv(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False)


@dataclass
class Check:
    check_id: str
    suite: SuiteName
    run: Callable[[int], Outcome]


# =============================================================================
# Sampling helpers
# =============================================================================


def _scaled_pairs(spec: NormSpec, count: int, seed: int) -> list[tuple[Vector, Vector]]:
    """Structured unit pairs plus random pairs with norms spread over [0.1, 10]."""
    compiled = compile_norm(spec)
    points = structured_points(spec)
    pairs = [(x, y) for x in points for y in points][:_STRUCTURED_PAIRS]
    rng = np.random.default_rng(seed)
    for _ in range(count):
        x = random_unit_vector(compiled, rng) * 10.0 ** rng.uniform(-1.0, 1.0)
        y = random_unit_vector(compiled, rng) * 10.0 ** rng.uniform(-1.0, 1.0)
        pairs.append((x, y))
    return pairs


def _slack_check(
    pairs: Iterable[tuple[Vector, Vector]],
    slack: Callable[[Vector, Vector], tuple[float, float]],
) -> Outcome:
    """Pass when slack / scale >= -PROPERTY_SLACK for every pair; residual is the worst ratio."""
    worst, arg = math.inf, None
    for x, y in pairs:
        value, scale = slack(x, y)
        ratio = value / scale if scale > 0 else value
        if ratio < worst:
            worst, arg = ratio, (x, y)
    if arg is None:
        return Outcome(CheckStatus.VACUOUS, detail="no pairs")
    if worst >= -PROPERTY_SLACK:
        return Outcome(CheckStatus.PASS, worst)
    return Outcome(CheckStatus.FAIL, worst, pair_witness(*arg))


# =============================================================================
# Properties
# =============================================================================


def _order_check(spec: NormSpec, trials: int) -> Callable[[int], Outcome]:
    compiled = compile_norm(spec)

    def run(seed: int) -> Outcome:
        def slack(x: Vector, y: Vector) -> tuple[float, float]:
            pair = rho_pair(spec, x, y)
            return pair.rho_plus - pair.rho_minus, compiled.value(x) * compiled.value(y)

        return _slack_check(_scaled_pairs(spec, trials, seed), slack)

    return run


def _bound_check(spec: NormSpec, lam: float, trials: int) -> Callable[[int], Outcome]:
    compiled = compile_norm(spec)

    def run(seed: int) -> Outcome:
        def slack(x: Vector, y: Vector) -> tuple[float, float]:
            scale = compiled.value(x) * compiled.value(y)
            return scale - abs(rho_pair(spec, x, y).rho_lambda(lam)), scale

        return _slack_check(_scaled_pairs(spec, trials, seed), slack)

    return run


def _homogeneity_check(spec: NormSpec, lam: float, trials: int) -> Callable[[int], Outcome]:
    """rho_lambda(tx, y) = rho_lambda(x, ty) = t rho_mu(x, y).

    mu = lambda for t > 0 and 1 - lambda for t < 0.
    """
    compiled = compile_norm(spec)

    def run(seed: int) -> Outcome:
        def slack(x: Vector, y: Vector) -> tuple[float, float]:
            pair = rho_pair(spec, x, y)
            scale = compiled.value(x) * compiled.value(y)
            worst = 0.0
            for t in _HOMOGENEITY_FACTORS:
                expected = t * pair.rho_lambda(lam if t > 0 else 1.0 - lam)
                for a, b in ((t * x, y), (x, t * y)):
                    dev = abs(rho_pair(spec, a, b).rho_lambda(lam) - expected) / abs(t)
                    worst = max(worst, dev)
            return -worst, scale

        return _slack_check(_scaled_pairs(spec, trials, seed), slack)

    return run


def _shift_check(spec: NormSpec, lam: float, trials: int) -> Callable[[int], Outcome]:
    """rho_lambda(x, tx + y) = t ||x||^2 + rho_lambda(x, y)."""
    compiled = compile_norm(spec)

    def run(seed: int) -> Outcome:
        def slack(x: Vector, y: Vector) -> tuple[float, float]:
            nx, ny = compiled.value(x), compiled.value(y)
            base = rho_pair(spec, x, y).rho_lambda(lam)
            worst = 0.0
            for t in _SHIFTS:
                shifted = rho_pair(spec, x, t * x + y).rho_lambda(lam)
                dev = abs(shifted - t * nx**2 - base) / (nx * (abs(t) * nx + ny))
                worst = max(worst, dev)
            return -worst, 1.0

        return _slack_check(_scaled_pairs(spec, trials, seed), slack)

    return run


def _sandwich_check(
    spec: NormSpec, lam: float, trials: int, refined: bool
) -> Callable[[int], Outcome]:
    compiled = compile_norm(spec)

    def run(seed: int) -> Outcome:
        def slack(x: Vector, y: Vector) -> tuple[float, float]:
            m = rho_bounds_margins(spec, lam, x, y)
            scale = compiled.value(x) * compiled.value(y)
            if not refined:
                return min(m.v_lo, m.v_hi, m.vi), scale
            # the refined bounds must also stay inside [-1, 1]
            range_slack = min(1.0 + m.refined_lower, 1.0 - m.refined_upper) * scale
            return min(m.vii_lo, m.vii_hi, range_slack), scale

        return _slack_check(_scaled_pairs(spec, trials, seed), slack)

    return run


def _maligranda_check(spec: NormSpec, trials: int) -> Callable[[int], Outcome]:
    compiled = compile_norm(spec)

    def run(seed: int) -> Outcome:
        def slack(x: Vector, y: Vector) -> tuple[float, float]:
            return maligranda_gap(spec, x, y), compiled.value(x) + compiled.value(y)

        return _slack_check(_scaled_pairs(spec, trials, seed), slack)

    return run


def _independence_check(spec: NormSpec, lam: float, trials: int) -> Callable[[int], Outcome]:
    """Nonzero rho_lambda-orthogonal pairs are linearly independent."""

    def run(seed: int) -> Outcome:
        worst, arg, used = math.inf, None, 0
        for x, y in _scaled_pairs(spec, trials, seed):
            z = rho_lambda_orthogonalize(spec, lam, x, y).z
            if not np.any(z):
                continue
            used += 1
            s = np.linalg.svd(np.vstack([x, z]), compute_uv=False)
            ratio = float(s[-1] / s[0])
            if ratio < worst:
                worst, arg = ratio, (x, z)
        if arg is None:
            return Outcome(CheckStatus.VACUOUS, detail="no nonzero orthogonal pairs")
        if worst > 1e-12:
            return Outcome(CheckStatus.PASS, worst, detail=f"{used} pairs")
        return Outcome(CheckStatus.FAIL, worst, pair_witness(*arg))

    return run


def _numerical_agreement_check(spec: NormSpec, trials: int) -> Callable[[int], Outcome]:
    """Forced numerical rho+- against exact dispatch on unit pairs."""

    def run(seed: int) -> Outcome:
        count = min(trials, NUMERICAL_PAIRS)
        sphere = sample_unit_sphere(spec, 2 * count, seed)
        worst, arg = 0.0, None
        loose = unconverged = 0
        for x, y in zip(sphere[::2], sphere[1::2]):
            exact = rho_pair(spec, x, y)
            numeric = rho_pair(spec, x, y, method=DerivativeMethod.NUMERICAL)
            err = max(
                abs(numeric.rho_minus - exact.rho_minus), abs(numeric.rho_plus - exact.rho_plus)
            )
            unconverged += not numeric.converged
            if err > numeric.enclosure_radius or (err > NUMERICAL_AGREEMENT):
                loose += 1
            if err > worst:
                worst, arg = err, (x, y)
        detail = f"{count} pairs, {unconverged} unconverged"
        if loose == 0:
            return Outcome(CheckStatus.PASS, worst, detail=detail)
        assert arg is not None
        witness = pair_witness(*arg)
        if unconverged:
            return Outcome(CheckStatus.NUMERICAL_FAILURE, worst, witness, detail)
        return Outcome(CheckStatus.FAIL, worst, witness, detail)

    return run


def _axioms_check(spec: NormSpec, trials: int) -> Callable[[int], Outcome]:
    def run(seed: int) -> Outcome:
        report = validate_norm_axioms(spec, trials, seed)
        if report.passed:
            return Outcome(CheckStatus.PASS, 0.0, detail=f"{report.trials} trials")
        return Outcome(
            CheckStatus.FAIL, report.residual, report.witness, detail=str(report.failed_axiom)
        )

    return run


def _properties_checks(config: SuiteConfig) -> list[Check]:
    suite = SuiteName.PROPERTIES
    n = config.trials
    checks = []
    for spec in config.norms:
        label = spec.label
        checks.append(Check(f"properties/axioms/{label}", suite, _axioms_check(spec, n)))
        checks.append(Check(f"properties/order/{label}", suite, _order_check(spec, n)))
        checks.append(Check(f"properties/maligranda/{label}", suite, _maligranda_check(spec, n)))
        checks.append(
            Check(
                f"properties/exact_vs_numerical/{label}",
                suite,
                _numerical_agreement_check(spec, n),
            )
        )
        for lam in config.lambdas:
            tag = f"{label}/lam={lam:g}"
            checks.extend(
                [
                    Check(f"properties/bound/{tag}", suite, _bound_check(spec, lam, n)),
                    Check(f"properties/homogeneity/{tag}", suite, _homogeneity_check(spec, lam, n)),
                    Check(f"properties/shift/{tag}", suite, _shift_check(spec, lam, n)),
                    Check(
                        f"properties/sandwich/{tag}", suite, _sandwich_check(spec, lam, n, False)
                    ),
                    Check(f"properties/refined/{tag}", suite, _sandwich_check(spec, lam, n, True)),
                    Check(
                        f"properties/independence/{tag}", suite, _independence_check(spec, lam, n)
                    ),
                ]
            )
    return checks


# =============================================================================
# Inclusions and smoothness
# =============================================================================


def _probe_outcome(
    rel_a: OrthogonalityRelation,
    rel_b: OrthogonalityRelation,
    spec: NormSpec,
    trials: int,
    tol: float,
    expect_witness: bool,
) -> Callable[[int], Outcome]:
    def run(seed: int) -> Outcome:
        probe = inclusion_probe(rel_a, rel_b, spec, trials, seed, tol)
        detail = f"{probe.structured_probes} structured, {probe.trials} random trials"
        if probe.status is ProbeStatus.DEGENERATE:
            return Outcome(CheckStatus.DEGENERATE, detail=probe.detail)
        if probe.status is ProbeStatus.STARVED and not expect_witness:
            return Outcome(CheckStatus.NUMERICAL_FAILURE, detail=probe.detail)
        if probe.status is ProbeStatus.WITNESS:
            assert probe.witness is not None
            witness = pair_witness(*probe.witness)
            relative = probe.residual / probe.scale if probe.scale > 0 else probe.residual
            status = CheckStatus.PASS if expect_witness else CheckStatus.FAIL
            return Outcome(status, relative, witness, detail)
        if expect_witness:
            return Outcome(CheckStatus.FAIL, detail=f"no witness found; {detail}")
        return Outcome(CheckStatus.PASS, detail=detail)

    return run


_RHO_STAR = OrthogonalityRelation(kind=RelationKind.RHO_STAR)


def _inclusions_checks(config: SuiteConfig) -> list[Check]:
    """rho_lambda and rho* orthogonality imply Birkhoff orthogonality on every norm."""
    birkhoff = OrthogonalityRelation.birkhoff()
    checks = []
    for spec in config.norms:
        run = _probe_outcome(_RHO_STAR, birkhoff, spec, config.trials, config.tol, False)
        checks.append(Check(f"inclusions/rho*->B/{spec.label}", SuiteName.INCLUSIONS, run))
        for lam in config.lambdas:
            rel = OrthogonalityRelation.rho_lambda(lam)
            run = _probe_outcome(rel, birkhoff, spec, config.trials, config.tol, False)
            check_id = f"inclusions/{rel.name}->B/{spec.label}"
            checks.append(Check(check_id, SuiteName.INCLUSIONS, run))
    return checks


def relations_coincide(rel: OrthogonalityRelation, lam: float) -> bool:
    """rho, rho- and rho+ coincide with rho_lambda at lambda = 1/2, 1 and 0."""
    return (
        (rel.kind is RelationKind.RHO_MID and lam == 0.5)
        or (rel.kind is RelationKind.RHO_MINUS and lam == 1.0)
        or (rel.kind is RelationKind.RHO_PLUS and lam == 0.0)
    )


def _vacuous(reason: str) -> Callable[[int], Outcome]:
    def run(seed: int) -> Outcome:
        return Outcome(CheckStatus.VACUOUS, detail=reason)

    return run


def _kink_check(spec: NormSpec) -> Callable[[int], Outcome]:
    """A nonsmooth norm must expose a nonsmooth structured point; a smooth one none."""
    predicted_smooth = smoothness_class(spec) is SmoothnessClass.SMOOTH

    def run(seed: int) -> Outcome:
        for x in structured_points(spec):
            result = is_smooth_at(spec, x, seed=seed)
            if not result.smooth:
                assert result.witness is not None
                witness = {"x": x.tolist(), "direction": result.witness.tolist()}
                status = CheckStatus.FAIL if predicted_smooth else CheckStatus.PASS
                return Outcome(status, result.gap, witness)
        if predicted_smooth:
            return Outcome(CheckStatus.PASS)
        return Outcome(CheckStatus.FAIL, detail="no nonsmooth structured point")

    return run


_SMOOTHNESS_SOURCES = (
    OrthogonalityRelation(kind=RelationKind.BIRKHOFF),
    OrthogonalityRelation(kind=RelationKind.RHO_MID),
    OrthogonalityRelation(kind=RelationKind.RHO_MINUS),
    OrthogonalityRelation(kind=RelationKind.RHO_PLUS),
)


def _smoothness_checks(config: SuiteConfig) -> list[Check]:
    """Relations coincide on smooth norms; each predicted non-inclusion shows up otherwise.

    B, rho, rho- and rho+ are probed against rho_lambda in both directions
    (rho_lambda -> B belongs to the inclusions suite), and B against rho*.
    """
    suite = SuiteName.SMOOTHNESS
    n, tol = config.trials, config.tol
    checks = []
    for spec in config.norms:
        smooth = smoothness_class(spec) is SmoothnessClass.SMOOTH
        label = spec.label
        checks.append(Check(f"smoothness/kink/{label}", suite, _kink_check(spec)))
        birkhoff = OrthogonalityRelation.birkhoff()
        run = _probe_outcome(birkhoff, _RHO_STAR, spec, n, tol, not smooth)
        checks.append(Check(f"smoothness/B->rho*/{label}", suite, run))
        for lam in config.lambdas:
            target = OrthogonalityRelation.rho_lambda(lam)
            for source in _SMOOTHNESS_SOURCES:
                pairs = [(source, target)]
                if source.kind is not RelationKind.BIRKHOFF:
                    pairs.append((target, source))
                for rel_a, rel_b in pairs:
                    check_id = f"smoothness/{rel_a.name}->{rel_b.name}/{label}"
                    if relations_coincide(source, lam):
                        logger.info("relations_coincide", source=rel_a.name, target=rel_b.name)
                        checks.append(Check(check_id, suite, _vacuous("relations coincide")))
                        continue
                    run = _probe_outcome(rel_a, rel_b, spec, n, tol, not smooth)
                    checks.append(Check(check_id, suite, run))
    return checks


# =============================================================================
# Characterization
# =============================================================================


def _defect_outcome(value: float, inner_product: bool, tol: float, witness: Any) -> Outcome:
    if inner_product:
        if value <= tol:
            return Outcome(CheckStatus.PASS, value)
        return Outcome(CheckStatus.FAIL, value, witness, "inner-product norm with a defect")
    if value > CERTIFIED_DEFECT:
        return Outcome(CheckStatus.PASS, value, witness)
    return Outcome(CheckStatus.FAIL, value, witness, "no defect found for a non-inner-product norm")


def _symmetry_check(spec: NormSpec, lam: float, trials: int) -> Callable[[int], Outcome]:
    ip = is_inner_product_norm(spec)

    def run(seed: int) -> Outcome:
        report = symmetry_defect(spec, lam, trials, seed)
        return _defect_outcome(report.value, ip, SYMMETRY_TOL, pair_witness(*report.arg_pair))

    return run


def _quartic_check(spec: NormSpec, lam: float, trials: int) -> Callable[[int], Outcome]:
    ip = is_inner_product_norm(spec)

    def run(seed: int) -> Outcome:
        report = quartic_identity_sweep(spec, lam, trials, seed)
        return _defect_outcome(report.value, ip, QUARTIC_TOL, pair_witness(*report.arg_pair))

    return run


def _additivity_check(spec: NormSpec, lam: float, trials: int) -> Callable[[int], Outcome]:
    ip = is_inner_product_norm(spec)

    def run(seed: int) -> Outcome:
        report = additivity_defect(spec, lam, trials, seed)
        extra = {} if report.arg_extra is None else {"z": report.arg_extra.tolist()}
        witness = pair_witness(*report.arg_pair, **extra)
        return _defect_outcome(report.value, ip, SYMMETRY_TOL, witness)

    return run


def _parallelogram_check(spec: NormSpec, trials: int) -> Callable[[int], Outcome]:
    ip = is_inner_product_norm(spec)

    def run(seed: int) -> Outcome:
        sphere = sample_unit_sphere(spec, 2 * trials, seed)
        pairs = list(zip(sphere[::2], sphere[1::2]))
        points = structured_points(spec)
        pairs += [(x, y) for x in points for y in points][:_STRUCTURED_PAIRS]
        best, arg = -1.0, pairs[0]
        for x, y in pairs:
            d = abs(parallelogram_defect(spec, x, y)) / 4.0
            if d > best:
                best, arg = d, (x, y)
        return _defect_outcome(best, ip, SYMMETRY_TOL, pair_witness(*arg))

    return run


def _characterization_checks(config: SuiteConfig) -> list[Check]:
    suite = SuiteName.CHARACTERIZATION
    n = config.trials
    checks = []
    for spec in config.norms:
        label = spec.label
        checks.append(
            Check(f"characterization/parallelogram/{label}", suite, _parallelogram_check(spec, n))
        )
        for lam in config.lambdas:
            tag = f"{label}/lam={lam:g}"
            checks.append(
                Check(f"characterization/symmetry/{tag}", suite, _symmetry_check(spec, lam, n))
            )
            checks.append(
                Check(f"characterization/quartic/{tag}", suite, _quartic_check(spec, lam, n))
            )
            checks.append(
                Check(f"characterization/additivity/{tag}", suite, _additivity_check(spec, lam, n))
            )
    return checks


# =============================================================================
# Uniform convexity
# =============================================================================


@lru_cache(maxsize=128)
def _cached_modulus(spec: NormSpec, epsilon: float, budget: int, seed: int) -> ModulusEstimate:
    return convexity_modulus(spec, epsilon, budget, seed)


def _uc_check(
    spec: NormSpec, lam: float, config: SuiteConfig, modulus_seed: int
) -> Callable[[int], Outcome]:
    def run(seed: int) -> Outcome:
        estimate = _cached_modulus(spec, config.epsilon, config.modulus_budget, modulus_seed)
        result = uc_rho_bound_check(
            spec,
            lam,
            config.epsilon,
            config.trials,
            seed,
            budget=config.modulus_budget,
            estimate=estimate,
        )
        detail = f"xi_hat={result.xi_hat:.6g}, bound={result.bound:.6g}"
        if result.status is UcStatus.FAIL:
            assert result.witness is not None
            return Outcome(CheckStatus.FAIL, result.residual, pair_witness(*result.witness), detail)
        if result.status is UcStatus.VACUOUS:
            return Outcome(CheckStatus.VACUOUS, 0.0, detail=detail)
        return Outcome(CheckStatus.PASS, result.residual, detail=detail)

    return run


def _uniform_convexity_checks(config: SuiteConfig) -> list[Check]:
    checks = []
    for spec in config.norms:
        modulus_seed = stable_seed(config.seed, "modulus", spec.label)
        for lam in config.lambdas:
            check_id = f"uniform_convexity/eps={config.epsilon:g}/{spec.label}/lam={lam:g}"
            run = _uc_check(spec, lam, config, modulus_seed)
            checks.append(Check(check_id, SuiteName.UNIFORM_CONVEXITY, run))
    return checks


# =============================================================================
# Mappings
# =============================================================================


@dataclass(frozen=True)
class MapFixture:
    name: str
    linear_map: LinearMap
    expected_similarity: Optional[bool] = None


def fixture_maps() -> list[MapFixture]:
    """Three similarities and two non-similarities in the plane."""
    l2 = LpNorm(dim=2, p=2)
    linf = LpNorm(dim=2, p=math.inf)
    l3 = LpNorm(dim=2, p=3)
    c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)

    def lm(matrix: tuple[tuple[float, ...], ...], space: NormSpec) -> LinearMap:
        return LinearMap(matrix=matrix, domain=space, codomain=space)

    return [
        MapFixture("rotation_30", lm(((c, -s), (s, c)), l2), True),
        MapFixture("scaled_permutation", lm(((0.0, 3.0), (3.0, 0.0)), linf), True),
        MapFixture("double_identity", lm(((2.0, 0.0), (0.0, 2.0)), l3), True),
        MapFixture("diagonal_1_2", lm(((1.0, 0.0), (0.0, 2.0)), l2), False),
        MapFixture("shear", lm(((1.0, 1.0), (0.0, 1.0)), l2), False),
    ]


def _similarity_check(fixture: MapFixture, lam: float, trials: int) -> Callable[[int], Outcome]:
    def run(seed: int) -> Outcome:
        verdict = similarity_verdict(fixture.linear_map, lam, trials, seed)
        residual = verdict.scaling.value
        witness = None
        if verdict.preserves.witness is not None:
            witness = pair_witness(*verdict.preserves.witness)
        detail = json.dumps(verdict.conditions, sort_keys=True)
        if verdict.degenerate:
            return Outcome(CheckStatus.DEGENERATE, residual, witness, detail)
        if not verdict.consistent:
            return Outcome(CheckStatus.FAIL, residual, witness, f"mixed verdict {detail}")
        expected = fixture.expected_similarity
        if expected is not None and verdict.is_similarity != expected:
            return Outcome(CheckStatus.FAIL, residual, witness, f"unexpected verdict {detail}")
        return Outcome(CheckStatus.PASS, residual, witness, detail)

    return run


def _ratio_constant_check(lam: float, trials: int) -> Callable[[int], Outcome]:
    """l2 against 2 * l2: rho_lambda scales by exactly 4."""
    l2 = LpNorm(dim=2, p=2)
    doubled = WeightedLpNorm(dim=2, p=2, weights=(4.0, 4.0))

    def run(seed: int) -> Outcome:
        report = two_norm_rho_ratio(l2, doubled, lam, trials, seed)
        dev = max(abs(report.m_hat - 4.0), abs(report.M_hat - 4.0))
        detail = f"m={report.m_hat:.12g}, M={report.M_hat:.12g}"
        if report.breaking_witness is None and dev <= PROPERTY_SLACK:
            return Outcome(CheckStatus.PASS, dev, detail=detail)
        witness = None if report.witness_max is None else pair_witness(*report.witness_max)
        return Outcome(CheckStatus.FAIL, dev, witness, detail)

    return run


def _ratio_spread_check(lam: float, trials: int) -> Callable[[int], Outcome]:
    """l2 against l_inf: not proportional, so no constants can exist."""
    l2 = LpNorm(dim=2, p=2)
    linf = LpNorm(dim=2, p=math.inf)

    def run(seed: int) -> Outcome:
        report = two_norm_rho_ratio(l2, linf, lam, trials, seed)
        spread = report.spread
        detail = f"spread={spread:.6g}"
        if report.breaking_witness is not None:
            return Outcome(
                CheckStatus.PASS, report.breaking_residual, pair_witness(*report.breaking_witness)
            )
        if spread > 1.5:
            return Outcome(CheckStatus.PASS, spread, detail=detail)
        return Outcome(CheckStatus.FAIL, spread, detail=detail)

    return run


def _mappings_checks(config: SuiteConfig) -> list[Check]:
    suite = SuiteName.MAPPINGS
    if config.maps:
        fixtures = [MapFixture(f"map{i}", m) for i, m in enumerate(config.maps)]
    else:
        fixtures = fixture_maps()
    checks = []
    for lam in config.lambdas:
        for fx in fixtures:
            check_id = f"mappings/similarity/{fx.name}/lam={lam:g}"
            checks.append(Check(check_id, suite, _similarity_check(fx, lam, config.trials)))
        tag = f"lam={lam:g}"
        checks.append(
            Check(f"mappings/ratio/l2-2l2/{tag}", suite, _ratio_constant_check(lam, config.trials))
        )
        checks.append(
            Check(f"mappings/ratio/l2-linf/{tag}", suite, _ratio_spread_check(lam, config.trials))
        )
    return checks


# =============================================================================
# Reference examples
# =============================================================================


def _reference_check(lam: float) -> Callable[[int], Outcome]:
    def run(seed: int) -> Outcome:
        rows = reproduce_reference_examples(lam)
        bad = [r for r in rows if not r.matches]
        worst = max((r.max_error for r in rows), default=0.0)
        undefined = [r.pair for r in rows if not r.defined]
        detail = f"undefined: {', '.join(undefined)}" if undefined else ""
        if bad:
            witness = {"rows": [r.to_dict() for r in bad]}
            return Outcome(CheckStatus.FAIL, worst, witness, detail)
        return Outcome(CheckStatus.PASS, worst, detail=detail)

    return run


def _reference_checks(config: SuiteConfig) -> list[Check]:
    suite = SuiteName.REFERENCE_EXAMPLES
    return [
        Check(f"reference_examples/lam={lam:g}", suite, _reference_check(lam))
        for lam in config.lambdas
    ]


_BUILDERS: dict[SuiteName, Callable[[SuiteConfig], list[Check]]] = {
    SuiteName.PROPERTIES: _properties_checks,
    SuiteName.INCLUSIONS: _inclusions_checks,
    SuiteName.SMOOTHNESS: _smoothness_checks,
    SuiteName.CHARACTERIZATION: _characterization_checks,
    SuiteName.UNIFORM_CONVEXITY: _uniform_convexity_checks,
    SuiteName.MAPPINGS: _mappings_checks,
    SuiteName.REFERENCE_EXAMPLES: _reference_checks,
}


def build_checks(config: SuiteConfig) -> list[Check]:
    checks: list[Check] = []
    for suite in config.suites:
        checks.extend(_BUILDERS[suite](config))
    return checks


def _execute(check: Check, base_seed: int) -> CheckRecord:
    seed = stable_seed(base_seed, check.check_id)
    start = time.perf_counter()
    with check_context(check.check_id, check.suite.value):
        try:
            outcome = check.run(seed)
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            logger.error("check_numerical_error", error=str(exc))
            outcome = Outcome(CheckStatus.NUMERICAL_FAILURE, math.nan, detail=str(exc))
        except Exception as exc:
            logger.exception("check_crashed", error=str(exc))
            detail = f"{type(exc).__name__}: {exc}"
            outcome = Outcome(CheckStatus.NUMERICAL_FAILURE, math.nan, detail=detail)
        if outcome.status is CheckStatus.FAIL:
            logger.warning("check_failed", residual=outcome.residual)
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return CheckRecord(
        check.check_id,
        check.suite,
        outcome.status,
        float(outcome.residual),
        outcome.witness,
        outcome.detail,
        runtime_ms,
    )


def run_suite(config: SuiteConfig) -> SuiteReport:
    """Run every selected suite and collect the records in build order."""
    checks = build_checks(config)
    logger.info(
        "suite_started",
        name=config.name,
        checks=len(checks),
        seed=config.seed,
        workers=config.workers,
    )
    if config.workers <= 1:
        records = [_execute(c, config.seed) for c in checks]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(lambda c: _execute(c, config.seed), checks))
    report = SuiteReport(config.name, config.seed, records)
    logger.info("suite_finished", name=config.name, summary=report.summary)
    return report
