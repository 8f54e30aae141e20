"""
Core data models for rholab.

Declarative norm specifications, linear maps between normed spaces and
orthogonality relations. All models are frozen pydantic models; tuple-typed
fields keep them hashable so compiled forms can be cached per spec.
"""

from __future__ import annotations

import math
import re
from enum import Enum
from typing import Annotated, Any, Literal, Optional, Union

import numpy as np
import numpy.typing as npt
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    TypeAdapter,
    field_serializer,
    field_validator,
    model_validator,
)

Vector = npt.NDArray[np.float64]

# Reciprocal condition number below which a matrix is treated as singular.
SINGULAR_RCOND = 1e-12

_INF_TOKENS = {"inf", "+inf", "infinity", "∞", "max"}


def format_p(p: float) -> str:
    """Render an exponent for labels and JSON ("inf" for the max norm)."""
    if math.isinf(p):
        return "inf"
    if float(p).is_integer():
        return str(int(p))
    return repr(float(p))


def _parse_p(value: Any) -> Any:
    if isinstance(value, str) and value.strip().lower() in _INF_TOKENS:
        return math.inf
    return value


def _check_finite(rows: tuple[tuple[float, ...], ...], what: str) -> None:
    for row in rows:
        if not all(math.isfinite(v) for v in row):
            raise ValueError(f"{what} entries must be finite")


class _Spec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dim: int = Field(ge=1, description="Dimension of the underlying space R^dim")


class LpNorm(_Spec):
    """The p-norm (sum |x_i|^p)^(1/p); p = inf is the max norm."""

    family: Literal["lp"] = "lp"
    p: float = Field(description="Exponent in [1, inf]; 'inf' selects the max norm")

    @field_validator("p", mode="before")
    @classmethod
    def parse_exponent(cls, value: Any) -> Any:
        return _parse_p(value)

    @field_validator("p")
    @classmethod
    def validate_p(cls, value: float) -> float:
        if math.isnan(value) or value < 1:
            raise ValueError("p must be >= 1")
        return value

    @field_serializer("p")
    def serialize_p(self, value: float) -> Union[float, str]:
        return "inf" if math.isinf(value) else value

    @property
    def label(self) -> str:
        return f"Lp({format_p(self.p)})/d{self.dim}"


class WeightedLpNorm(_Spec):
    """Weighted p-norm (sum w_i |x_i|^p)^(1/p); for p = inf the value is max w_i |x_i|."""

    family: Literal["weighted_lp"] = "weighted_lp"
    p: float
    weights: tuple[float, ...]

    @field_validator("p", mode="before")
    @classmethod
    def parse_exponent(cls, value: Any) -> Any:
        return _parse_p(value)

    @field_validator("p")
    @classmethod
    def validate_p(cls, value: float) -> float:
        if math.isnan(value) or value < 1:
            raise ValueError("p must be >= 1")
        return value

    @field_validator("weights")
    @classmethod
    def validate_weights(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if any(not math.isfinite(w) or w <= 0 for w in value):
            raise ValueError("weights must be positive and finite")
        return value

    @model_validator(mode="after")
    def validate_shape(self) -> "WeightedLpNorm":
        if len(self.weights) != self.dim:
            raise ValueError(f"expected {self.dim} weights, got {len(self.weights)}")
        return self

    @field_serializer("p")
    def serialize_p(self, value: float) -> Union[float, str]:
        return "inf" if math.isinf(value) else value

    @property
    def label(self) -> str:
        return f"WeightedLp({format_p(self.p)})/d{self.dim}"


class PolyhedralNorm(_Spec):
    """max_i |<a_i, x>| over functionals spanning R^dim."""

    family: Literal["polyhedral"] = "polyhedral"
    functionals: tuple[tuple[float, ...], ...] = Field(min_length=1)

    @model_validator(mode="after")
    def validate_functionals(self) -> "PolyhedralNorm":
        if any(len(a) != self.dim for a in self.functionals):
            raise ValueError(f"every functional must have {self.dim} coefficients")
        _check_finite(self.functionals, "functional")
        rank = np.linalg.matrix_rank(np.asarray(self.functionals, dtype=float))
        if rank < self.dim:
            raise ValueError(
                f"functionals span a {rank}-dimensional subspace; they must span R^{self.dim}"
            )
        return self

    @property
    def label(self) -> str:
        return f"Polyhedral(m={len(self.functionals)})/d{self.dim}"


class LinearImageNorm(_Spec):
    """x -> base(A x) for an invertible square matrix A."""

    family: Literal["linear_image"] = "linear_image"
    matrix: tuple[tuple[float, ...], ...]
    base: "NormSpec"

    @model_validator(mode="after")
    def validate_matrix(self) -> "LinearImageNorm":
        if len(self.matrix) != self.dim or any(len(row) != self.dim for row in self.matrix):
            raise ValueError(f"matrix must be {self.dim}x{self.dim}")
        _check_finite(self.matrix, "matrix")
        if self.base.dim != self.dim:
            raise ValueError(f"base norm has dim {self.base.dim}, expected {self.dim}")
        a = np.asarray(self.matrix, dtype=float)
        if np.linalg.matrix_rank(a) < self.dim or 1.0 / np.linalg.cond(a) < SINGULAR_RCOND:
            raise ValueError("matrix must be invertible")
        return self

    @property
    def label(self) -> str:
        inner = self.base.label.split("/")[0]
        return f"LinearImage({inner})/d{self.dim}"


NormSpec = Annotated[
    Union[LpNorm, WeightedLpNorm, PolyhedralNorm, LinearImageNorm],
    Field(discriminator="family"),
]
LinearImageNorm.model_rebuild()

_norm_spec_adapter: TypeAdapter[NormSpec] = TypeAdapter(NormSpec)


def norm_spec_from_json(data: Union[str, bytes, dict[str, Any]]) -> NormSpec:
    """Parse a NormSpec from its JSON object (text or already-decoded dict)."""
    if isinstance(data, dict):
        return _norm_spec_adapter.validate_python(data)
    return _norm_spec_adapter.validate_json(data)


def norm_spec_to_dict(spec: NormSpec) -> dict[str, Any]:
    return spec.model_dump(mode="json")


class LinearMap(BaseModel):
    """A linear map T: (R^n, domain) -> (R^m, codomain) given by an m x n matrix."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    matrix: tuple[tuple[float, ...], ...]
    domain: NormSpec
    codomain: NormSpec

    @model_validator(mode="after")
    def validate_shape(self) -> "LinearMap":
        if len(self.matrix) != self.codomain.dim:
            raise ValueError(
                f"matrix has {len(self.matrix)} rows, codomain dim is {self.codomain.dim}"
            )
        if any(len(row) != self.domain.dim for row in self.matrix):
            raise ValueError(f"every matrix row must have {self.domain.dim} entries")
        _check_finite(self.matrix, "matrix")
        return self

    @property
    def array(self) -> npt.NDArray[np.float64]:
        return np.asarray(self.matrix, dtype=np.float64)

    def apply(self, x: Vector) -> Vector:
        return self.array @ x

    @property
    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.array))

    @property
    def is_injective(self) -> bool:
        return self.rank == self.domain.dim


class RelationKind(str, Enum):
    """Orthogonality relations on a normed space."""

    BIRKHOFF = "birkhoff"
    ISOSCELES = "isosceles"
    RHO_MINUS = "rho_minus"
    RHO_PLUS = "rho_plus"
    RHO_MID = "rho_mid"
    RHO_STAR = "rho_star"
    RHO_LAMBDA = "rho_lambda"


_RELATION_ALIASES = {
    "b": RelationKind.BIRKHOFF,
    "birkhoff": RelationKind.BIRKHOFF,
    "i": RelationKind.ISOSCELES,
    "isosceles": RelationKind.ISOSCELES,
    "rho-": RelationKind.RHO_MINUS,
    "rho_minus": RelationKind.RHO_MINUS,
    "rho+": RelationKind.RHO_PLUS,
    "rho_plus": RelationKind.RHO_PLUS,
    "rho": RelationKind.RHO_MID,
    "rho_mid": RelationKind.RHO_MID,
    "rho*": RelationKind.RHO_STAR,
    "rho_star": RelationKind.RHO_STAR,
}

_SHORT_NAMES = {
    RelationKind.BIRKHOFF: "B",
    RelationKind.ISOSCELES: "I",
    RelationKind.RHO_MINUS: "rho-",
    RelationKind.RHO_PLUS: "rho+",
    RelationKind.RHO_MID: "rho",
    RelationKind.RHO_STAR: "rho*",
}

_LAMBDA_PATTERN = re.compile(r"^(?:rho_?lambda|rhol)\s*[(:=]\s*([^)]+?)\s*\)?$")


class OrthogonalityRelation(BaseModel):
    """One of the orthogonality relations; rho_lambda carries its lambda."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: RelationKind
    lam: Optional[float] = Field(default=None, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def validate_lambda(self) -> "OrthogonalityRelation":
        if self.kind is RelationKind.RHO_LAMBDA and self.lam is None:
            raise ValueError("rho_lambda relation requires lam")
        if self.kind is not RelationKind.RHO_LAMBDA and self.lam is not None:
            raise ValueError(f"{self.kind.value} relation takes no lam")
        return self

    @classmethod
    def birkhoff(cls) -> "OrthogonalityRelation":
        return cls(kind=RelationKind.BIRKHOFF)

    @classmethod
    def rho_lambda(cls, lam: float) -> "OrthogonalityRelation":
        return cls(kind=RelationKind.RHO_LAMBDA, lam=lam)

    @classmethod
    def parse(cls, text: str) -> "OrthogonalityRelation":
        """Parse names like 'B', 'rho+', 'rho_mid' or 'rho_lambda(0.3)'."""
        token = text.strip().lower()
        if token in _RELATION_ALIASES:
            return cls(kind=_RELATION_ALIASES[token])
        match = _LAMBDA_PATTERN.match(token)
        if match:
            try:
                lam = float(match.group(1))
            except ValueError as exc:
                raise ValueError(f"Invalid lambda in relation {text!r}") from exc
            return cls(kind=RelationKind.RHO_LAMBDA, lam=lam)
        raise ValueError(f"Unknown orthogonality relation: {text!r}")

    @property
    def name(self) -> str:
        if self.kind is RelationKind.RHO_LAMBDA:
            return f"rho_lambda({self.lam:g})"
        return _SHORT_NAMES[self.kind]

    def __str__(self) -> str:
        return self.name
