"""
Suite configuration for the rholab harness.

Selects which check suites run and over which norms, lambdas and linear maps:
- Norm catalogue (Lp, weighted Lp, polyhedral, linear image)
- Lambda grid
- Trial counts, tolerance, seed and worker count
"""

from __future__ import annotations

import math
import os
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Optional, Union

import structlog
import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator

from rholab.exceptions import ConfigError
from rholab.models import LinearImageNorm, LinearMap, LpNorm, NormSpec, PolyhedralNorm

logger = structlog.get_logger()

SEED_ENV = "RHOLAB_SEED"
DEFAULT_SEED = 42
DEFAULT_LAMBDAS = (0.0, 0.25, 0.5, 0.75, 1.0)


class SuiteName(str, Enum):
    PROPERTIES = "properties"
    INCLUSIONS = "inclusions"
    SMOOTHNESS = "smoothness"
    CHARACTERIZATION = "characterization"
    UNIFORM_CONVEXITY = "uniform_convexity"
    MAPPINGS = "mappings"
    REFERENCE_EXAMPLES = "reference_examples"


def resolve_seed(explicit: Optional[int] = None) -> int:
    """Explicit seed, else $RHOLAB_SEED when it parses as an int, else 42."""
    if explicit is not None:
        return int(explicit)
    raw = os.environ.get(SEED_ENV)
    if raw is not None:
        try:
            return int(raw.strip())
        except ValueError:
            logger.warning("ignoring_invalid_seed_env", value=raw)
    return DEFAULT_SEED


def hexagon_norm() -> PolyhedralNorm:
    """Hexagonal unit ball in the plane cut out by (1,0), (0,1) and (1,1)."""
    return PolyhedralNorm(dim=2, functionals=((1.0, 0.0), (0.0, 1.0), (1.0, 1.0)))


def sheared_euclidean_norm() -> LinearImageNorm:
    return LinearImageNorm(dim=2, matrix=((1.0, 1.0), (0.0, 1.0)), base=LpNorm(dim=2, p=2))


def default_norms() -> list[NormSpec]:
    """Lp for p in {1, 1.5, 2, 3, inf} in dims 2-4, plus a hexagon and a sheared l2."""
    norms: list[NormSpec] = []
    for dim in (2, 3, 4):
        for p in (1.0, 1.5, 2.0, 3.0, math.inf):
            norms.append(LpNorm(dim=dim, p=p))
    norms.append(hexagon_norm())
    norms.append(sheared_euclidean_norm())
    return norms


Lambda = Annotated[float, Field(ge=0.0, le=1.0)]


class SuiteConfig(BaseModel):
    """Configuration of one harness run."""

    name: str = Field(default="default", description="Run name echoed into the report")
    norms: list[NormSpec] = Field(
        default_factory=default_norms,
        description="Norms every suite iterates over",
    )
    lambdas: list[Lambda] = Field(
        default_factory=lambda: list(DEFAULT_LAMBDAS),
        description="Lambda grid in [0, 1]",
    )
    trials: int = Field(default=1000, description="Random trials per check")
    seed: int = Field(
        default_factory=resolve_seed,
        description="Base seed; every check derives its own seed from it",
    )
    tol: float = Field(default=1e-8, description="Relative tolerance of orthogonality tests")
    suites: list[SuiteName] = Field(
        default_factory=lambda: list(SuiteName),
        description="Suites to run",
    )
    maps: list[LinearMap] = Field(
        default_factory=list,
        description="Linear maps for the mappings suite (empty selects the fixtures)",
    )
    workers: int = Field(default=1, description="Checks executed concurrently")
    epsilon: float = Field(default=1.0, description="epsilon of the uniform convexity checks")
    modulus_budget: int = Field(default=200, description="Starts of the convexity-modulus search")

    @field_validator("trials")
    @classmethod
    def validate_trials(cls, value: int) -> int:
        if value < 1:
            raise ValueError("trials must be >= 1")
        return value

    @field_validator("tol")
    @classmethod
    def validate_tol(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("tol must be > 0")
        return value

    @field_validator("suites")
    @classmethod
    def validate_suites(cls, value: list[SuiteName]) -> list[SuiteName]:
        if not value:
            raise ValueError("suites must not be empty")
        return list(dict.fromkeys(value))

    @field_validator("norms", "lambdas")
    @classmethod
    def validate_nonempty(cls, value: list[Any]) -> list[Any]:
        if not value:
            raise ValueError("list must not be empty")
        return value

    @field_validator("workers", "modulus_budget")
    @classmethod
    def validate_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value

    @field_validator("epsilon")
    @classmethod
    def validate_epsilon(cls, value: float) -> float:
        if not 0.0 < value <= 2.0:
            raise ValueError("epsilon must lie in (0, 2]")
        return value

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "SuiteConfig":
        """Load configuration from YAML file."""
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}", str(path)) from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML: {exc}", str(path)) from exc
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("config root must be a mapping", str(path))
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SuiteConfig":
        """Create configuration from dictionary; validation errors become ConfigError."""
        try:
            return cls(**data)
        except ValidationError as exc:
            first = exc.errors()[0]
            location = ".".join(str(part) for part in first["loc"])
            raise ConfigError(first["msg"], location) from exc

    def to_yaml(self, path: Union[str, Path]) -> None:
        """Save configuration to YAML file."""
        with open(path, "w", encoding="utf-8") as f:
            data = self.model_dump(mode="json")
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)


def create_default_config() -> SuiteConfig:
    """Full run over the default catalogue at acceptance trial counts."""
    return SuiteConfig(name="default", trials=10_000)


def create_quick_config() -> SuiteConfig:
    """Small run over two-dimensional norms for smoke testing."""
    return SuiteConfig(
        name="quick",
        norms=[n for n in default_norms() if n.dim == 2],
        trials=200,
        modulus_budget=40,
    )
