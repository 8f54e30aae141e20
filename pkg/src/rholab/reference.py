"""
Reference examples in the max norm and the counterexample search front end.

The corner pair x = (1, 1), y = (0, -1) is Birkhoff orthogonal but not
rho_lambda orthogonal for lambda > 0. With z = (1, 1) the four pairs
(z, y_lam), (z, w), (z, u), (z, v) separate rho-, rho+, rho and rho_lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import structlog

from rholab.derivatives import rho_pair, validate_lambda
from rholab.geometry import quartic_identity_defect
from rholab.models import LpNorm, NormSpec, OrthogonalityRelation, Vector
from rholab.normcore import format_rational
from rholab.orthogonality import ProbeResult, ProbeStatus, check, inclusion_probe, shrink_witness

logger = structlog.get_logger()

EXAMPLE_TOL = 1e-12
MAX_NORM = LpNorm(dim=2, p=math.inf)
CORNER_X = (1.0, 1.0)
CORNER_Y = (0.0, -1.0)
Z = (1.0, 1.0)
W = (0.0, 1.0)
U = (0.0, -1.0)
V = (1.0, -1.0)


@dataclass
class ExampleRow:
    """One reproduced pair: computed values next to their closed forms."""

    example: str
    pair: str
    x: tuple[float, ...]
    y: Optional[tuple[float, ...]]
    computed: dict[str, Any] = field(default_factory=dict)
    expected: dict[str, Any] = field(default_factory=dict)
    note: str = ""

    @property
    def defined(self) -> bool:
        return self.y is not None

    @property
    def max_error(self) -> float:
        errors = [
            abs(float(self.computed[k]) - float(v))
            for k, v in self.expected.items()
            if not isinstance(v, bool)
        ]
        return max(errors, default=0.0)

    @property
    def matches(self) -> bool:
        if not self.defined:
            return True
        flags = all(self.computed[k] == v for k, v in self.expected.items() if isinstance(v, bool))
        return flags and self.max_error <= EXAMPLE_TOL

    def to_dict(self) -> dict[str, Any]:
        return {
            "example": self.example,
            "pair": self.pair,
            "x": list(self.x),
            "y": None if self.y is None else list(self.y),
            "computed": self.computed,
            "expected": self.expected,
            "max_error": self.max_error,
            "matches": self.matches,
            "note": self.note,
        }


def _values(x: tuple[float, ...], y: tuple[float, ...], lam: float) -> dict[str, Any]:
    pair = rho_pair(MAX_NORM, x, y)
    return {
        "rho_minus": pair.rho_minus,
        "rho_plus": pair.rho_plus,
        "rho": pair.mid,
        "rho_lambda": pair.rho_lambda(lam),
    }


def corner_row(lam: float) -> ExampleRow:
    lam = validate_lambda(lam)
    computed = _values(CORNER_X, CORNER_Y, lam)
    birkhoff = check(OrthogonalityRelation.birkhoff(), MAX_NORM, CORNER_X, CORNER_Y)
    computed["birkhoff"] = birkhoff.orthogonal
    computed["rho_lambda_orthogonal"] = check(
        OrthogonalityRelation.rho_lambda(lam), MAX_NORM, CORNER_X, CORNER_Y
    ).orthogonal
    computed["quartic_defect"] = quartic_identity_defect(MAX_NORM, lam, CORNER_X, CORNER_Y)
    expected: dict[str, Any] = {
        "rho_minus": -1.0,
        "rho_plus": 0.0,
        "rho": -0.5,
        "rho_lambda": -lam,
        "birkhoff": True,
        "rho_lambda_orthogonal": lam == 0.0,
        "quartic_defect": 8.0 * lam - 7.0,
    }
    return ExampleRow("corner", "(x, y)", CORNER_X, CORNER_Y, computed, expected)


def four_pair_rows(lam: float) -> list[ExampleRow]:
    lam = validate_lambda(lam)
    rows = []
    if 0.0 < lam < 1.0:
        y = (-1.0 / (2.0 * lam), 1.0 / (2.0 * (1.0 - lam)))
        expected = {
            "rho_minus": -1.0 / (2.0 * lam),
            "rho_plus": 1.0 / (2.0 * (1.0 - lam)),
            "rho": (2.0 * lam - 1.0) / (4.0 * lam * (1.0 - lam)),
            "rho_lambda": 0.0,
        }
        rows.append(ExampleRow("four_pairs", "(z, y_lam)", Z, y, _values(Z, y, lam), expected))
    else:
        logger.info("reference_pair_undefined", lam=lam)
        rows.append(ExampleRow("four_pairs", "(z, y_lam)", Z, None, note="undefined for this λ"))

    table = (
        ("(z, w)", W, {"rho_minus": 0.0, "rho_plus": 1.0, "rho": 0.5, "rho_lambda": 1.0 - lam}),
        ("(z, u)", U, {"rho_minus": -1.0, "rho_plus": 0.0, "rho": -0.5, "rho_lambda": -lam}),
        ("(z, v)", V, {"rho_minus": -1.0, "rho_plus": 1.0, "rho": 0.0, "rho_lambda": 1 - 2 * lam}),
    )
    for name, y, expected in table:
        rows.append(ExampleRow("four_pairs", name, Z, y, _values(Z, y, lam), expected))
    return rows


def reproduce_reference_examples(lam: float) -> list[ExampleRow]:
    """All reference rows for one lambda, computed through exact dispatch."""
    return [corner_row(lam), *four_pair_rows(lam)]


@dataclass
class CounterexampleResult:
    """Outcome of a non-inclusion search; ``found`` is False when the budget was exhausted."""

    probe: ProbeResult
    witness: Optional[tuple[Vector, Vector]] = None

    @property
    def found(self) -> bool:
        return self.witness is not None

    @property
    def rendered(self) -> Optional[tuple[list[str], list[str]]]:
        if self.witness is None:
            return None
        x, y = self.witness
        return [format_rational(c) for c in x], [format_rational(c) for c in y]

    def to_dict(self) -> dict[str, Any]:
        rendered = self.rendered
        return {
            "found": self.found,
            "status": "witness" if self.found else "exhausted",
            "witness": None
            if rendered is None
            else {"x": rendered[0], "y": rendered[1]},
            "probe": self.probe.to_dict(),
        }


def search_counterexample(
    rel_a: OrthogonalityRelation,
    rel_b: OrthogonalityRelation,
    spec: NormSpec,
    budget: int,
    seed: int,
    tol: float = 1e-8,
    workers: int = 1,
) -> CounterexampleResult:
    """Search for x ⊥_A y with x not ⊥_B y, structured points first.

    A witness is rounded to small rationals when the rounded pair is still a
    witness.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    probe = inclusion_probe(rel_a, rel_b, spec, budget, seed, tol, workers=workers)
    if probe.status is not ProbeStatus.WITNESS or probe.witness is None:
        return CounterexampleResult(probe)
    x, y = shrink_witness(rel_a, rel_b, spec, *probe.witness, tol=tol)
    return CounterexampleResult(probe, (np.asarray(x), np.asarray(y)))
