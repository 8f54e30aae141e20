"""
Vectors and the catalogue of concrete norms.

Every catalogue norm is evaluated through a reduced form x -> ||M x||_p, where
M is the identity (Lp), a diagonal scaling (WeightedLp), the stacked
functionals (Polyhedral) or a product chain (LinearImage). The exact
derivative formulas in ``rholab.derivatives`` run on the same reduction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Iterable, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt
import structlog
from scipy.special import logsumexp

from rholab.exceptions import DimensionMismatchError
from rholab.models import (
    LinearImageNorm,
    LpNorm,
    NormSpec,
    PolyhedralNorm,
    Vector,
    WeightedLpNorm,
)

logger = structlog.get_logger()

# Exponents at or above this use the log-sum-exp form.
LARGE_P = 50.0
# Index i is active when ||u|| - |u_i| <= ACTIVE_TOL * ||u||.
ACTIVE_TOL = 1e-12
UNIT_TOL = 1e-12
_VERTEX_LIMIT = 512


class SmoothnessClass(str, Enum):
    """Whether every nonzero point of the space has a unique support functional."""

    SMOOTH = "smooth"
    NONSMOOTH = "nonsmooth"


def as_vector(coords: Union[Sequence[float], npt.ArrayLike], dim: Optional[int] = None) -> Vector:
    """Convert coordinates to a finite float64 vector, optionally checking its dimension."""
    x = np.asarray(coords, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("a vector must be a non-empty 1-D list of coordinates")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector coordinates must be finite")
    if dim is not None and x.size != dim:
        raise DimensionMismatchError(dim, x.size)
    return x


def parse_scalar(text: str) -> Fraction:
    """Parse '2', '-0.25' or '1/3' exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"Invalid number: {text!r}") from exc


def parse_vector(text: str, dim: Optional[int] = None) -> Vector:
    """Parse comma-separated literals such as '1, -1/3, 2.5'."""
    parts = [p for p in text.replace("(", "").replace(")", "").split(",") if p.strip()]
    if not parts:
        raise ValueError("empty vector literal")
    return as_vector([float(parse_scalar(p)) for p in parts], dim)


def format_rational(value: float, max_denominator: int = 64) -> str:
    """Render a float as 'a/b' when it is (to 1e-12) a small rational, else repr."""
    frac = Fraction(value).limit_denominator(max_denominator)
    if abs(float(frac) - value) <= 1e-12 * max(1.0, abs(value)):
        return str(frac)
    return repr(float(value))


def lp_value(u: Vector, p: float) -> float:
    """||u||_p with p in [1, inf]."""
    a = np.abs(u)
    if math.isinf(p):
        return float(np.max(a))
    if p == 1:
        return float(np.sum(a))
    if p == 2:
        return float(np.linalg.norm(u))
    if p >= LARGE_P:
        nz = a[a > 0]
        if nz.size == 0:
            return 0.0
        return float(np.exp(logsumexp(p * np.log(nz)) / p))
    return float(np.sum(a**p) ** (1.0 / p))


def lp_values(rows: npt.NDArray[np.float64], p: float) -> npt.NDArray[np.float64]:
    """Row-wise ||.||_p of a 2-D array."""
    a = np.abs(rows)
    if math.isinf(p):
        return np.max(a, axis=1)
    if p == 1:
        return np.sum(a, axis=1)
    if p == 2:
        return np.linalg.norm(rows, axis=1)
    if p >= LARGE_P:
        with np.errstate(divide="ignore"):
            logs = np.where(a > 0, p * np.log(np.where(a > 0, a, 1.0)), -np.inf)
        out = np.exp(logsumexp(logs, axis=1) / p)
        return np.where(np.isfinite(out), out, 0.0)
    return np.sum(a**p, axis=1) ** (1.0 / p)


@dataclass(frozen=True, eq=False)
class CompiledNorm:
    """Reduced form x -> ||M x||_p of a catalogue norm (M None means identity)."""

    p: float
    matrix: Optional[npt.NDArray[np.float64]]
    dim: int

    def lift(self, x: Vector) -> Vector:
        return x if self.matrix is None else self.matrix @ x

    def value(self, x: Vector) -> float:
        return lp_value(self.lift(x), self.p)

    def values(self, rows: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        lifted = rows if self.matrix is None else rows @ self.matrix.T
        return lp_values(lifted, self.p)

    @property
    def rows(self) -> npt.NDArray[np.float64]:
        """The reduction matrix as an explicit array."""
        return np.eye(self.dim) if self.matrix is None else self.matrix

    @property
    def is_smooth(self) -> bool:
        return 1 < self.p < math.inf

    @property
    def is_inner_product(self) -> bool:
        return self.p == 2


@lru_cache(maxsize=512)
def compile_norm(spec: NormSpec) -> CompiledNorm:
    """Reduce a NormSpec to x -> ||M x||_p."""
    if isinstance(spec, LpNorm):
        return CompiledNorm(p=spec.p, matrix=None, dim=spec.dim)
    if isinstance(spec, WeightedLpNorm):
        w = np.asarray(spec.weights, dtype=np.float64)
        scale = w if math.isinf(spec.p) else w ** (1.0 / spec.p)
        return CompiledNorm(p=spec.p, matrix=np.diag(scale), dim=spec.dim)
    if isinstance(spec, PolyhedralNorm):
        f = np.asarray(spec.functionals, dtype=np.float64)
        return CompiledNorm(p=math.inf, matrix=f, dim=spec.dim)
    if isinstance(spec, LinearImageNorm):
        base = compile_norm(spec.base)
        a = np.asarray(spec.matrix, dtype=np.float64)
        m = a if base.matrix is None else base.matrix @ a
        return CompiledNorm(p=base.p, matrix=m, dim=spec.dim)
    raise ValueError(f"Unknown norm family: {spec!r}")


def smoothness_class(spec: NormSpec) -> SmoothnessClass:
    return SmoothnessClass.SMOOTH if compile_norm(spec).is_smooth else SmoothnessClass.NONSMOOTH


def is_inner_product_norm(spec: NormSpec) -> bool:
    return compile_norm(spec).is_inner_product


def has_exact_derivative(spec: NormSpec) -> bool:
    """Every catalogue family reduces to an Lp form with closed-form one-sided derivatives."""
    return isinstance(spec, (LpNorm, WeightedLpNorm, PolyhedralNorm, LinearImageNorm))


def eval_norm(spec: NormSpec, x: Union[Vector, Sequence[float]]) -> float:
    """Evaluate ||x|| for the given norm."""
    v = as_vector(x, spec.dim)
    return compile_norm(spec).value(v)


def sample_unit_sphere(spec: NormSpec, count: int, seed: int) -> list[Vector]:
    """Normalize seeded Gaussian directions onto the unit sphere of the norm.

    The samples are uniform on directions, not with respect to surface measure.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    compiled = compile_norm(spec)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, spec.dim))
    norms = compiled.values(g)
    while np.any(norms == 0):
        zero = norms == 0
        g[zero] = rng.standard_normal((int(zero.sum()), spec.dim))
        norms = compiled.values(g)
    return list(g / norms[:, None])


def random_unit_vector(compiled: CompiledNorm, rng: np.random.Generator) -> Vector:
    while True:
        g = rng.standard_normal(compiled.dim)
        n = compiled.value(g)
        if n > 0:
            return g / n


def _dedupe(points: Iterable[Vector]) -> list[Vector]:
    seen: set[tuple[float, ...]] = set()
    out: list[Vector] = []
    for v in points:
        key = tuple(np.round(v, 10) + 0.0)
        if key not in seen:
            seen.add(key)
            out.append(v)
    return out


def _max_norm_vertices(compiled: CompiledNorm) -> list[Vector]:
    """Vertices of {x : max_i |<m_i, x>| <= 1} by solving n active constraints at a time."""
    rows = compiled.rows
    m, n = rows.shape
    if math.comb(m, n) * 2**n > _VERTEX_LIMIT:
        return []
    vertices: list[Vector] = []
    for subset in itertools.combinations(range(m), n):
        sub = rows[list(subset)]
        if np.linalg.matrix_rank(sub) < n:
            continue
        for signs in itertools.product((1.0, -1.0), repeat=n):
            v = np.linalg.solve(sub, np.asarray(signs))
            if compiled.value(v) <= 1 + 1e-10:
                vertices.append(v / compiled.value(v))
    return _dedupe(vertices)


def structured_points(spec: NormSpec) -> list[Vector]:
    """Unit-norm seed points tried before random search.

    Basis vectors, (1, +-1, 0, ...) patterns, the all-ones patterns and, for
    max-type norms, unit-ball vertices and edge midpoints; for l1-type norms
    the ball vertices M^-1 e_i.
    """
    compiled = compile_norm(spec)
    n = spec.dim
    eye = np.eye(n)
    raw: list[Vector] = []
    for i in range(n):
        raw.extend([eye[i], -eye[i]])
    for i, j in itertools.combinations(range(n), 2):
        raw.extend([eye[i] + eye[j], eye[i] - eye[j], -eye[i] + eye[j], -eye[i] - eye[j]])
    if n > 2:
        raw.append(np.ones(n))
        raw.append(np.array([(-1.0) ** k for k in range(n)]))

    if math.isinf(compiled.p):
        vertices = _max_norm_vertices(compiled)
        raw.extend(vertices)
        for a, b in itertools.combinations(vertices, 2):
            mid = (a + b) / 2
            if abs(compiled.value(mid) - 1) <= 1e-10:
                raw.append(mid)
    elif compiled.p == 1 and compiled.matrix is not None:
        inv = np.linalg.inv(compiled.matrix)
        for j in range(n):
            raw.extend([inv[:, j], -inv[:, j]])

    points = [v / compiled.value(v) for v in raw if compiled.value(v) > 0]
    return _dedupe(points)


@dataclass
class AxiomReport:
    """Outcome of sampling the norm axioms."""

    passed: bool
    trials: int
    failed_axiom: Optional[str] = None
    witness: Optional[dict[str, Any]] = None
    residual: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "trials": self.trials,
            "failed_axiom": self.failed_axiom,
            "witness": self.witness,
            "residual": self.residual,
        }


def validate_norm_axioms(
    spec: NormSpec, trials: int = 1000, seed: int = 0, tol: float = 1e-12
) -> AxiomReport:
    """Check homogeneity, the triangle inequality and definiteness on random samples."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    compiled = compile_norm(spec)
    rng = np.random.default_rng(seed)
    if compiled.value(np.zeros(spec.dim)) != 0.0:
        return AxiomReport(False, 0, "definiteness", {"x": [0.0] * spec.dim}, 1.0)

    for k in range(trials):
        scale = 10.0 ** rng.uniform(-3, 3)
        x = rng.standard_normal(spec.dim) * scale
        y = rng.standard_normal(spec.dim) * 10.0 ** rng.uniform(-3, 3)
        alpha = rng.standard_normal() * 10.0 ** rng.uniform(-2, 2)
        nx, ny = compiled.value(x), compiled.value(y)

        if nx <= 0:
            return AxiomReport(False, k + 1, "definiteness", {"x": x.tolist()}, nx)

        homog = abs(compiled.value(alpha * x) - abs(alpha) * nx)
        if homog > tol * abs(alpha) * nx:
            logger.warning("norm_axiom_violation", axiom="homogeneity", spec=spec.label)
            return AxiomReport(
                False, k + 1, "homogeneity", {"x": x.tolist(), "alpha": alpha}, homog
            )

        excess = compiled.value(x + y) - nx - ny
        if excess > tol * (nx + ny):
            logger.warning("norm_axiom_violation", axiom="triangle", spec=spec.label)
            return AxiomReport(False, k + 1, "triangle", {"x": x.tolist(), "y": y.tolist()}, excess)

    return AxiomReport(True, trials)
