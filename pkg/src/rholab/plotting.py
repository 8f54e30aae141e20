"""
SVG plots of planar normed spaces with CSV samples alongside.

unit_ball draws {v : ||v|| = 1}; orthogonality_field colors the directions
y(theta) = (cos theta, sin theta) by rho_lambda(x, y(theta)) and marks its
zero crossings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import structlog  # noqa: E402
from scipy.optimize import brentq  # noqa: E402

from rholab.derivatives import rho_pair, validate_lambda  # noqa: E402
from rholab.exceptions import ZeroVectorError  # noqa: E402
from rholab.models import NormSpec  # noqa: E402
from rholab.normcore import as_vector, compile_norm, structured_points  # noqa: E402

logger = structlog.get_logger()

MIN_RESOLUTION = 32
# Fixed ids and metadata keep the SVG output byte-stable.
_SVG_RC = {"svg.hashsalt": "rholab", "svg.fonttype": "none"}
_SVG_METADATA = {"Date": None, "Creator": "rholab"}


class PlotKind(str, Enum):
    UNIT_BALL = "unit_ball"
    ORTHOGONALITY_FIELD = "orthogonality_field"


@dataclass
class PlotResult:
    kind: PlotKind
    svg_path: Path
    csv_path: Path
    samples: pd.DataFrame = field(repr=False)
    zero_crossings: list[float] = field(default_factory=list)

    @property
    def zero_crossings_deg(self) -> list[float]:
        return [math.degrees(t) for t in self.zero_crossings]

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "svg": str(self.svg_path),
            "csv": str(self.csv_path),
            "samples": len(self.samples),
            "zero_crossings_deg": self.zero_crossings_deg,
        }


def _check_plane(spec: NormSpec, resolution: int) -> None:
    if spec.dim != 2:
        raise ValueError(f"plots need a two-dimensional norm, got dim={spec.dim}")
    if resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be >= {MIN_RESOLUTION}")


def _grid(resolution: int) -> np.ndarray:
    return np.linspace(-math.pi, math.pi, resolution, endpoint=False)


def _wrap(theta: float) -> float:
    """Map an angle into [-pi, pi)."""
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


def unit_ball_samples(spec: NormSpec, resolution: int = 256) -> pd.DataFrame:
    """Boundary points of the unit ball; structured points (ball vertices) are always included."""
    _check_plane(spec, resolution)
    compiled = compile_norm(spec)
    extra = [math.atan2(v[1], v[0]) for v in structured_points(spec)]
    thetas = np.unique(np.round(np.concatenate([_grid(resolution), extra]), 15))
    rows = []
    for theta in thetas:
        d = np.array([math.cos(theta), math.sin(theta)])
        v = d / compiled.value(d)
        rows.append({"theta": float(theta), "x": float(v[0]), "y": float(v[1])})
    return pd.DataFrame(rows, columns=["theta", "x", "y"])


def _field_function(spec: NormSpec, x: np.ndarray, lam: float) -> Callable[[float], float]:
    def f(theta: float) -> float:
        y = np.array([math.cos(theta), math.sin(theta)])
        return rho_pair(spec, x, y).rho_lambda(lam)

    return f


def orthogonality_field_samples(
    spec: NormSpec, x: Any, lam: float, resolution: int = 256
) -> tuple[pd.DataFrame, list[float]]:
    """rho_lambda(x, y(theta)) on a theta grid plus the zero crossings, refined by brentq."""
    _check_plane(spec, resolution)
    lam = validate_lambda(lam)
    xv = as_vector(x, spec.dim)
    if not np.any(xv):
        raise ZeroVectorError("orthogonality field needs a nonzero base point")
    f = _field_function(spec, xv, lam)
    thetas = _grid(resolution)
    values = np.array([f(t) for t in thetas])

    crossings: list[float] = []
    step = 2.0 * math.pi / resolution
    for k in range(resolution):
        a, fa = float(thetas[k]), float(values[k])
        fb = float(values[(k + 1) % resolution])
        if fa == 0.0:
            crossings.append(a)
        elif fa * fb < 0.0:
            root = brentq(f, a, a + step, xtol=1e-13)
            crossings.append(_wrap(float(root)))
    crossings.sort()

    frame = pd.DataFrame(
        {
            "theta": thetas,
            "y1": np.cos(thetas),
            "y2": np.sin(thetas),
            "rho_lambda": values,
        }
    )
    return frame, crossings


def _save(fig: Any, svg_path: Path) -> None:
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(svg_path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)


def plot(
    spec: NormSpec,
    kind: Union[PlotKind, str],
    out_path: Union[str, Path],
    x: Optional[Any] = None,
    lam: float = 0.5,
    resolution: int = 256,
) -> PlotResult:
    """Write ``out_path`` (SVG) and a CSV of the samples next to it."""
    kind = PlotKind(kind)
    _check_plane(spec, resolution)
    if kind is PlotKind.ORTHOGONALITY_FIELD and x is None:
        raise ValueError("orthogonality_field needs a base point x")
    svg_path = Path(out_path)
    csv_path = svg_path.with_suffix(".csv")
    crossings: list[float] = []
    ball = unit_ball_samples(spec, resolution)
    closed = pd.concat([ball, ball.iloc[:1]])
    samples = ball
    if kind is PlotKind.ORTHOGONALITY_FIELD:
        samples, crossings = orthogonality_field_samples(spec, x, lam, resolution)

    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.set_aspect("equal")
        ax.axhline(0.0, color="#BDBDBD", linewidth=0.8)
        ax.axvline(0.0, color="#BDBDBD", linewidth=0.8)

        if kind is PlotKind.UNIT_BALL:
            ax.plot(closed["x"], closed["y"], color="#1976D2", linewidth=1.5)
            ax.set_title(f"Unit ball of {spec.label}")
        else:
            xv = as_vector(x, 2)
            ax.plot(closed["x"], closed["y"], color="#9E9E9E", linewidth=1.0)
            points = ax.scatter(
                samples["y1"], samples["y2"], c=samples["rho_lambda"], cmap="coolwarm", s=12
            )
            fig.colorbar(points, ax=ax, label="rho_lambda(x, y)")
            for theta in crossings:
                ax.plot([0.0, math.cos(theta)], [0.0, math.sin(theta)], color="#212121")
            ax.annotate("", xy=(xv[0], xv[1]), xytext=(0.0, 0.0), arrowprops={"arrowstyle": "->"})
            ax.set_title(f"rho_lambda field of {spec.label}, lambda={lam:g}")
        _save(fig, svg_path)

    samples.to_csv(csv_path, index=False)
    logger.info("plot_written", kind=kind.value, svg=str(svg_path), crossings=len(crossings))
    return PlotResult(kind, svg_path, csv_path, samples, crossings)
