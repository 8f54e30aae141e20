"""
Command-line interface for rholab.

Provides commands for:
- Computing rho-, rho+, rho and rho_lambda for a pair of vectors
- Testing orthogonality relations and orthogonalizing a pair
- Smoothness, Birkhoff intervals and norm-axiom sampling
- Running the verification suites and the reference examples
- Counterexample search, linear-map checks, two-norm ratios and the convexity modulus
- SVG plots of planar norms
"""

import json
from enum import Enum
from pathlib import Path
from typing import Any, List, Optional

import typer
import yaml
from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from rholab import __version__
from rholab.derivatives import (
    DerivativeMethod,
    gateaux_differential,
    is_smooth_at,
    rho_pair,
    validate_lambda,
)
from rholab.exceptions import RholabError
from rholab.geometry import modulus_curve
from rholab.harness import EXIT_FAIL, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, run_suite
from rholab.mappings import (
    preserves_rho_lambda,
    scaling_identity_residual,
    similarity_defect,
    similarity_verdict,
    two_norm_rho_ratio,
)
from rholab.models import LinearMap, LpNorm, NormSpec, OrthogonalityRelation, norm_spec_from_json
from rholab.normcore import format_rational, parse_vector, validate_norm_axioms
from rholab.orthogonality import (
    ProbeStatus,
    birkhoff_interval,
    check,
    rho_lambda_orthogonalize,
)
from rholab.plotting import PlotKind, plot
from rholab.reference import reproduce_reference_examples, search_counterexample
from rholab.suite_config import (
    DEFAULT_LAMBDAS,
    SuiteConfig,
    SuiteName,
    create_default_config,
    create_quick_config,
    resolve_seed,
)
from utils.logging import LOG_LEVEL_ENV, setup_logging

app = typer.Typer(
    name="rholab",
    help="Norm derivatives, rho-lambda orthogonality and characterization probes",
)
console = Console()
err_console = Console(stderr=True)

_STATUS_STYLE = {
    "pass": "green",
    "fail": "red",
    "vacuous": "yellow",
    "degenerate": "yellow",
    "numerical_failure": "magenta",
}


class MapCheck(str, Enum):
    PRESERVE = "preserve"
    SIMILARITY = "similarity"
    SCALING = "scaling"
    VERDICT = "verdict"


@app.callback()
def main(
    log_level: Optional[str] = typer.Option(
        None, "--log-level", help="DEBUG, INFO, WARNING or ERROR", envvar=LOG_LEVEL_ENV
    ),
    json_logs: bool = typer.Option(False, "--json-logs", help="Emit JSON log lines on stderr"),
) -> None:
    """rholab: norm derivatives and orthogonality in finite-dimensional normed spaces."""
    setup_logging(log_level, json_logs)


# =============================================================================
# Input helpers
# =============================================================================


def _fail_usage(message: str) -> None:
    err_console.print(f"[red]Error: {message}[/red]")
    raise typer.Exit(EXIT_USAGE)


def _load_norm(text: str) -> NormSpec:
    """A NormSpec from inline JSON, a JSON/YAML file, or the shorthand 'lp:P:DIM'."""
    text = text.strip()
    if text.startswith("lp:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected lp:P:DIM, got {text!r}")
        return LpNorm.model_validate({"p": parts[1], "dim": parts[2]})
    if not text.startswith("{"):
        path = Path(text)
        if not path.is_file():
            raise ValueError(f"norm is neither JSON, lp:P:DIM nor a file: {text!r}")
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValueError(f"{path}: norm file must hold a mapping")
        return norm_spec_from_json(data)
    return norm_spec_from_json(text)


def _load_map(path: Path) -> LinearMap:
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValueError(f"cannot read map file: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ValueError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"{path}: map file must hold a mapping")
    return LinearMap(**data)


def _emit_json(payload: Any) -> None:
    typer.echo(json.dumps(payload, sort_keys=True, indent=2))


def _vec(values: Any) -> str:
    return "(" + ", ".join(format_rational(float(v)) for v in values) + ")"


def _guard(fn: Any, *args: Any, **kwargs: Any) -> Any:
    """Run fn, turning input errors into exit code 2."""
    try:
        return fn(*args, **kwargs)
    except (RholabError, ValidationError, ValueError) as exc:
        _fail_usage(str(exc))


# =============================================================================
# Pointwise commands
# =============================================================================


@app.command()
def compute(
    norm: str = typer.Option(..., "--norm", "-n", help="Norm as JSON, file or lp:P:DIM"),
    x: str = typer.Option(..., "--x", "-x", help="Base point, e.g. '1,1/2'"),
    y: str = typer.Option(..., "--y", "-y", help="Direction, e.g. '0,-1'"),
    lam: Optional[float] = typer.Option(None, "--lambda", "-l", help="Also report rho_lambda"),
    method: DerivativeMethod = typer.Option(
        DerivativeMethod.AUTO, "--method", "-m", help="auto, exact or numerical"
    ),
    as_json: bool = typer.Option(False, "--json", help="Print JSON to stdout"),
) -> None:
    """Compute rho-(x, y), rho+(x, y), rho and rho* (and rho_lambda if requested)."""

    def run() -> dict[str, Any]:
        spec = _load_norm(norm)
        xv, yv = parse_vector(x, spec.dim), parse_vector(y, spec.dim)
        pair = rho_pair(spec, xv, yv, method=method)
        out = {
            "norm": spec.label,
            "x": xv.tolist(),
            "y": yv.tolist(),
            **pair.to_dict(),
            "rho": pair.mid,
            "rho_star": pair.star,
        }
        if lam is not None:
            out["lambda"] = validate_lambda(lam)
            out["rho_lambda"] = pair.rho_lambda(out["lambda"])
        return out

    out = _guard(run)
    if as_json:
        _emit_json(out)
    else:
        table = Table(title=f"Norm derivatives in {out['norm']}")
        table.add_column("Quantity", style="cyan")
        table.add_column("Value", style="green")
        for key in ("rho_minus", "rho_plus", "rho", "rho_star", "rho_lambda"):
            if key in out:
                table.add_row(key, format_rational(out[key]))
        table.add_row("method", out["method"])
        if not out["converged"]:
            table.add_row("enclosure_radius", f"{out['enclosure_radius']:.3g}", style="yellow")
        console.print(table)
    raise typer.Exit(EXIT_OK if out["converged"] else EXIT_NUMERICAL)


@app.command()
def orth(
    relation: str = typer.Option(
        ..., "--relation", "-r", help="B, I, rho-, rho+, rho, rho*, rho_lambda(0.3)"
    ),
    norm: str = typer.Option(..., "--norm", "-n", help="Norm as JSON, file or lp:P:DIM"),
    x: str = typer.Option(..., "--x", "-x", help="First vector"),
    y: str = typer.Option(..., "--y", "-y", help="Second vector"),
    tol: float = typer.Option(1e-8, "--tol", help="Relative tolerance"),
    as_json: bool = typer.Option(False, "--json", help="Print JSON to stdout"),
) -> None:
    """Test x ⊥ y for one orthogonality relation."""

    def run() -> tuple[OrthogonalityRelation, Any]:
        spec = _load_norm(norm)
        rel = OrthogonalityRelation.parse(relation)
        return rel, check(rel, spec, parse_vector(x, spec.dim), parse_vector(y, spec.dim), tol)

    rel, result = _guard(run)
    if as_json:
        _emit_json({"relation": rel.name, **result.to_dict()})
        return
    verdict = "[green]orthogonal[/green]" if result.orthogonal else "[red]not orthogonal[/red]"
    console.print(f"x ⊥_{rel.name} y: {verdict} (residual {result.residual:.3g})")


@app.command()
def orthogonalize(
    norm: str = typer.Option(..., "--norm", "-n", help="Norm as JSON, file or lp:P:DIM"),
    lam: float = typer.Option(..., "--lambda", "-l", help="lambda in [0, 1]"),
    x: str = typer.Option(..., "--x", "-x", help="Nonzero base point"),
    y: str = typer.Option(..., "--y", "-y", help="Vector to orthogonalize"),
    as_json: bool = typer.Option(False, "--json", help="Print JSON to stdout"),
) -> None:
    """Find z = t x + y with rho_lambda(x, z) = 0."""

    def run() -> Any:
        spec = _load_norm(norm)
        return rho_lambda_orthogonalize(
            spec, lam, parse_vector(x, spec.dim), parse_vector(y, spec.dim)
        )

    result = _guard(run)
    if as_json:
        _emit_json(result.to_dict())
    else:
        console.print(f"t = {format_rational(result.t)}, z = {_vec(result.z)}")
        if result.flagged:
            console.print(f"[yellow]residual {result.residual:.3g} above tolerance[/yellow]")
    raise typer.Exit(EXIT_NUMERICAL if result.flagged else EXIT_OK)


@app.command()
def smooth(
    norm: str = typer.Option(..., "--norm", "-n", help="Norm as JSON, file or lp:P:DIM"),
    x: str = typer.Option(..., "--x", "-x", help="Nonzero point"),
    as_json: bool = typer.Option(False, "--json", help="Print JSON to stdout"),
) -> None:
    """Decide smoothness at x; print the derivative functional or a violating direction."""

    def run() -> dict[str, Any]:
        spec = _load_norm(norm)
        xv = parse_vector(x, spec.dim)
        result = is_smooth_at(spec, xv)
        out: dict[str, Any] = {"smooth": result.smooth, "gap": result.gap}
        if result.smooth:
            out["differential"] = gateaux_differential(spec, xv).coefficients.tolist()
        else:
            out["witness"] = result.witness.tolist() if result.witness is not None else None
        return out

    out = _guard(run)
    if as_json:
        _emit_json(out)
    elif out["smooth"]:
        console.print(f"[green]smooth[/green]; f_x = {_vec(out['differential'])}")
    else:
        console.print(f"[red]not smooth[/red]; rho+ - rho- = {out['gap']:.6g}")
        console.print(f"direction: {_vec(out['witness'])}")


@app.command()
def interval(
    norm: str = typer.Option(..., "--norm", "-n", help="Norm as JSON, file or lp:P:DIM"),
    x: str = typer.Option(..., "--x", "-x", help="Nonzero base point"),
    y: str = typer.Option(..., "--y", "-y", help="Direction"),
    as_json: bool = typer.Option(False, "--json", help="Print JSON to stdout"),
) -> None:
    """Print the interval of t with x ⊥_B t x + y."""

    def run() -> Any:
        spec = _load_norm(norm)
        return birkhoff_interval(spec, parse_vector(x, spec.dim), parse_vector(y, spec.dim))

    result = _guard(run)
    if as_json:
        _emit_json({"lo": result.lo, "hi": result.hi, "width": result.width})
    else:
        console.print(f"[{format_rational(result.lo)}, {format_rational(result.hi)}]")


@app.command()
def axioms(
    norm: str = typer.Option(..., "--norm", "-n", help="Norm as JSON, file or lp:P:DIM"),
    trials: int = typer.Option(1000, "--trials", "-t", help="Random samples"),
    seed: Optional[int] = typer.Option(
        None, "--seed", "-s", help="Seed (default $RHOLAB_SEED or 42)"
    ),
    as_json: bool = typer.Option(False, "--json", help="Print JSON to stdout"),
) -> None:
    """Sample the norm axioms."""
    report = _guard(lambda: validate_norm_axioms(_load_norm(norm), trials, resolve_seed(seed)))
    if as_json:
        _emit_json(report.to_dict())
    elif report.passed:
        console.print(f"[green]axioms hold on {report.trials} samples[/green]")
    else:
        console.print(f"[red]{report.failed_axiom} violated[/red] at {report.witness}")
    raise typer.Exit(EXIT_OK if report.passed else EXIT_FAIL)


# =============================================================================
# Suites
# =============================================================================


@app.command()
def verify(
    config_file: Optional[Path] = typer.Option(None, "--config", "-c", help="Suite YAML config"),
    quick: bool = typer.Option(False, "--quick", help="Use the small two-dimensional config"),
    suite: Optional[List[SuiteName]] = typer.Option(
        None, "--suite", help="Suite to run (repeatable; default all)"
    ),
    seed: Optional[int] = typer.Option(None, "--seed", "-s", help="Override the config seed"),
    trials: Optional[int] = typer.Option(None, "--trials", "-t", help="Override trials per check"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Concurrent checks"),
    as_json: bool = typer.Option(False, "--json", help="Print the JSON report to stdout"),
    output_file: Optional[Path] = typer.Option(None, "--output", "-o", help="Write JSON report"),
    csv_file: Optional[Path] = typer.Option(None, "--csv", help="Write records as CSV"),
    timing: bool = typer.Option(False, "--timing", help="Include runtime_ms in the JSON"),
) -> None:
    """Run the verification suites and exit 0 (pass), 1 (fail) or 3 (numerical failure)."""

    def load() -> SuiteConfig:
        if config_file is not None:
            base = SuiteConfig.from_yaml(config_file)
        elif quick:
            base = create_quick_config()
        else:
            base = create_default_config()
        overrides: dict[str, Any] = {}
        if suite:
            overrides["suites"] = list(suite)
        if seed is not None:
            overrides["seed"] = seed
        if trials is not None:
            overrides["trials"] = trials
        if workers is not None:
            overrides["workers"] = workers
        if not overrides:
            return base
        return SuiteConfig.from_dict({**base.model_dump(mode="json"), **overrides})

    config = _guard(load)
    report = run_suite(config)

    if output_file:
        output_file.write_text(report.to_json(timing), encoding="utf-8")
        err_console.print(f"[green]Report saved to {output_file}[/green]")
    if csv_file:
        report.to_csv(csv_file)
        err_console.print(f"[green]Records saved to {csv_file}[/green]")

    if as_json:
        typer.echo(report.to_json(timing))
    else:
        table = Table(title=f"{config.name} (seed {config.seed})")
        table.add_column("Check", style="cyan")
        table.add_column("Status")
        table.add_column("Residual", justify="right")
        for record in report.records:
            style = _STATUS_STYLE[record.status.value]
            residual = f"{record.residual:.3g}"
            table.add_row(record.check_id, f"[{style}]{record.status.value}[/{style}]", residual)
        console.print(table)
        summary = ", ".join(f"{k}={v}" for k, v in report.summary.items() if v)
        console.print(Panel.fit(summary, title="Summary"))
    raise typer.Exit(report.exit_code)


@app.command()
def examples(
    lam: Optional[List[float]] = typer.Option(
        None, "--lambda", "-l", help="lambda values (repeatable; default 0, 0.25, ..., 1)"
    ),
    as_json: bool = typer.Option(False, "--json", help="Print JSON to stdout"),
) -> None:
    """Reproduce the max-norm reference examples."""
    lambdas = list(lam) if lam else list(DEFAULT_LAMBDAS)
    tagged = _guard(lambda: [(v, r) for v in lambdas for r in reproduce_reference_examples(v)])
    rows = [r for _, r in tagged]
    matches = all(r.matches for r in rows)

    if as_json:
        _emit_json({"lambdas": lambdas, "rows": [r.to_dict() for r in rows], "matches": matches})
    else:
        table = Table(title="Reference examples in the max norm")
        table.add_column("Pair", style="cyan")
        table.add_column("lambda")
        table.add_column("rho-")
        table.add_column("rho+")
        table.add_column("rho_lambda")
        table.add_column("Match")
        for v, row in tagged:
            if not row.defined:
                table.add_row(row.pair, f"{v:g}", "", "", "", f"[yellow]{row.note}[/yellow]")
                continue
            c = row.computed
            table.add_row(
                row.pair,
                f"{v:g}",
                format_rational(c["rho_minus"]),
                format_rational(c["rho_plus"]),
                format_rational(c["rho_lambda"]),
                "[green]yes[/green]" if row.matches else "[red]no[/red]",
            )
        console.print(table)
    raise typer.Exit(EXIT_OK if matches else EXIT_FAIL)


@app.command()
def search(
    relation_a: str = typer.Option(..., "--from", "-a", help="Relation that holds"),
    relation_b: str = typer.Option(..., "--to", "-b", help="Relation that should fail"),
    norm: str = typer.Option(..., "--norm", "-n", help="Norm as JSON, file or lp:P:DIM"),
    budget: int = typer.Option(1000, "--budget", help="Random trials after the structured ones"),
    seed: Optional[int] = typer.Option(
        None, "--seed", "-s", help="Seed (default $RHOLAB_SEED or 42)"
    ),
    workers: int = typer.Option(1, "--workers", "-w", help="Parallel workers"),
    as_json: bool = typer.Option(False, "--json", help="Print JSON to stdout"),
) -> None:
    """Search for x ⊥_A y with x not ⊥_B y."""

    def run() -> Any:
        spec = _load_norm(norm)
        rel_a = OrthogonalityRelation.parse(relation_a)
        rel_b = OrthogonalityRelation.parse(relation_b)
        return search_counterexample(
            rel_a, rel_b, spec, budget, resolve_seed(seed), workers=workers
        )

    result = _guard(run)
    if as_json:
        _emit_json(result.to_dict())
    elif result.found:
        xs, ys = result.rendered
        console.print(f"[red]witness[/red] x = ({', '.join(xs)}), y = ({', '.join(ys)})")
    else:
        probe = result.probe
        style = "yellow" if probe.status is ProbeStatus.STARVED else "green"
        message = f"no witness ({probe.status.value}) in {probe.trials} trials"
        console.print(f"[{style}]{message}[/{style}]")
    if result.found:
        raise typer.Exit(EXIT_FAIL)
    raise typer.Exit(EXIT_NUMERICAL if result.probe.status is ProbeStatus.STARVED else EXIT_OK)


# =============================================================================
# Mappings and geometry
# =============================================================================


@app.command("map")
def map_check(
    map_file: Path = typer.Option(
        ..., "--map", help="YAML/JSON file with matrix, domain, codomain"
    ),
    lam: float = typer.Option(0.5, "--lambda", "-l", help="lambda in [0, 1]"),
    kind: MapCheck = typer.Option(
        MapCheck.VERDICT, "--check", help="preserve, similarity, scaling or verdict"
    ),
    trials: int = typer.Option(1000, "--trials", "-t", help="Random trials"),
    seed: Optional[int] = typer.Option(
        None, "--seed", "-s", help="Seed (default $RHOLAB_SEED or 42)"
    ),
    as_json: bool = typer.Option(False, "--json", help="Print JSON to stdout"),
) -> None:
    """Check whether a linear map preserves rho_lambda-orthogonality or is a similarity."""

    def run() -> tuple[dict[str, Any], bool]:
        linear_map = _load_map(map_file)
        lam_v = validate_lambda(lam)
        s = resolve_seed(seed)
        if kind is MapCheck.PRESERVE:
            probe = preserves_rho_lambda(linear_map, lam_v, trials, s)
            return probe.to_dict(), probe.status is ProbeStatus.PASS
        if kind is MapCheck.SIMILARITY:
            defect = similarity_defect(linear_map, max(trials, 100), s)
            return defect.to_dict(), defect.is_similarity()
        if kind is MapCheck.SCALING:
            scaling = scaling_identity_residual(linear_map, lam_v, trials, s)
            return scaling.to_dict(), not scaling.degenerate and scaling.value <= 1e-6
        verdict = similarity_verdict(linear_map, lam_v, trials, s)
        return verdict.to_dict(), verdict.is_similarity

    out, holds = _guard(run)
    if as_json:
        _emit_json({"check": kind.value, "holds": holds, "result": out})
    else:
        label = "[green]holds[/green]" if holds else "[red]does not hold[/red]"
        console.print(f"{kind.value}: {label}")
        if kind is MapCheck.VERDICT:
            for name, value in out["conditions"].items():
                console.print(f"  {name}: {value}")
    raise typer.Exit(EXIT_OK if holds else EXIT_FAIL)


@app.command()
def ratio(
    norm1: str = typer.Option(..., "--norm1", help="First norm"),
    norm2: str = typer.Option(..., "--norm2", help="Second norm"),
    lam: float = typer.Option(0.5, "--lambda", "-l", help="lambda in [0, 1]"),
    trials: int = typer.Option(1000, "--trials", "-t", help="Random pairs"),
    seed: Optional[int] = typer.Option(
        None, "--seed", "-s", help="Seed (default $RHOLAB_SEED or 42)"
    ),
    as_json: bool = typer.Option(False, "--json", help="Print JSON to stdout"),
) -> None:
    """Estimate m, M with m |rho_lambda,1| <= |rho_lambda,2| <= M |rho_lambda,1|."""
    report = _guard(
        lambda: two_norm_rho_ratio(
            _load_norm(norm1), _load_norm(norm2), lam, trials, resolve_seed(seed)
        )
    )
    if as_json:
        _emit_json(report.to_dict())
        return
    console.print(f"m = {report.m_hat:.6g}, M = {report.M_hat:.6g}, spread = {report.spread:.6g}")
    if report.breaking_witness is not None:
        x, y = report.breaking_witness
        console.print(f"[red]orthogonality broken[/red] at x = {_vec(x)}, y = {_vec(y)}")


@app.command()
def modulus(
    norm: str = typer.Option(..., "--norm", "-n", help="Norm as JSON, file or lp:P:DIM"),
    epsilon: List[float] = typer.Option(
        ..., "--epsilon", "-e", help="epsilon in (0, 2] (repeatable)"
    ),
    budget: int = typer.Option(200, "--budget", help="Search starts per epsilon"),
    seed: Optional[int] = typer.Option(
        None, "--seed", "-s", help="Seed (default $RHOLAB_SEED or 42)"
    ),
    as_json: bool = typer.Option(False, "--json", help="Print JSON to stdout"),
) -> None:
    """Estimate the modulus of convexity (an upper bound) at each epsilon."""
    estimates = _guard(
        lambda: modulus_curve(_load_norm(norm), epsilon, budget, resolve_seed(seed))
    )
    if as_json:
        _emit_json([e.to_dict() for e in estimates])
        return
    table = Table(title="Modulus of convexity (upper bounds)")
    table.add_column("epsilon", style="cyan")
    table.add_column("delta_hat", style="green")
    for e in estimates:
        table.add_row(f"{e.epsilon:g}", f"{e.delta_hat:.6g}")
    console.print(table)


@app.command("plot")
def plot_command(
    norm: str = typer.Option(..., "--norm", "-n", help="Two-dimensional norm"),
    kind: PlotKind = typer.Option(
        PlotKind.UNIT_BALL, "--kind", "-k", help="unit_ball or orthogonality_field"
    ),
    out: Path = typer.Option(
        Path("plot.svg"), "--out", "-o", help="SVG path; CSV is written next to it"
    ),
    x: Optional[str] = typer.Option(None, "--x", "-x", help="Base point of the field"),
    lam: float = typer.Option(0.5, "--lambda", "-l", help="lambda of the field"),
    resolution: int = typer.Option(256, "--resolution", "-r", help="Angular samples (>= 32)"),
    as_json: bool = typer.Option(False, "--json", help="Print JSON to stdout"),
) -> None:
    """Draw the unit ball or the rho_lambda orthogonality field of a planar norm."""

    def run() -> Any:
        spec = _load_norm(norm)
        xv = parse_vector(x, spec.dim) if x is not None else None
        return plot(spec, kind, out, x=xv, lam=lam, resolution=resolution)

    try:
        result = _guard(run)
    except OSError as exc:
        _fail_usage(f"cannot write plot: {exc}")
    if as_json:
        _emit_json(result.to_dict())
        return
    console.print(f"[green]Plot saved to {result.svg_path}[/green] (samples in {result.csv_path})")
    if result.zero_crossings:
        angles = ", ".join(f"{a:.4f}" for a in result.zero_crossings_deg)
        console.print(f"zero crossings (deg): {angles}")


@app.command()
def version() -> None:
    """Show version information."""
    console.print(
        Panel.fit(
            f"[bold]rholab[/bold]\n"
            f"Version: {__version__}\n"
            f"Norm derivatives and rho-lambda orthogonality",
            title="Version Info",
        )
    )


if __name__ == "__main__":
    app()
