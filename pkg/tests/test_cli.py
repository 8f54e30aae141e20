"""
Tests for the rholab command-line interface.
"""

import json
from pathlib import Path

from typer.testing import CliRunner

from rholab.cli import app

runner = CliRunner()
QUIET = ["--log-level", "ERROR"]
CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"


def invoke(*args, env=None):
    return runner.invoke(app, [*QUIET, *args], env=env)


class TestPointwiseCommands:
    """Test compute, orth, orthogonalize, smooth and interval."""

    def test_compute_json(self):
        """Test rho values at the max-norm corner."""
        result = invoke(
            "compute",
            "--norm",
            "lp:inf:2",
            "--x",
            "1,1",
            "--y",
            "0,-1",
            "--lambda",
            "0.5",
            "--json",
        )
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["rho_minus"] == -1.0
        assert data["rho_plus"] == 0.0
        assert data["rho_lambda"] == -0.5
        assert data["norm"] == "Lp(inf)/d2"

    def test_compute_table(self):
        """Test the table output."""
        result = invoke("compute", "--norm", "lp:2:2", "--x", "3,4", "--y", "1,0")
        assert result.exit_code == 0
        assert "rho_plus" in result.stdout

    def test_compute_bad_norm(self):
        """Test that an unknown norm is a usage error."""
        result = invoke("compute", "--norm", "lp:0.5:2", "--x", "1,1", "--y", "1,0")
        assert result.exit_code == 2

    def test_compute_dimension_mismatch(self):
        """Test that a vector of the wrong length is a usage error."""
        result = invoke("compute", "--norm", "lp:2:3", "--x", "1,1", "--y", "1,0")
        assert result.exit_code == 2

    def test_inline_json_norm(self):
        """Test a norm given as inline JSON."""
        norm = json.dumps(
            {"family": "polyhedral", "dim": 2, "functionals": [[1, 0], [0, 1], [1, 1]]}
        )
        result = invoke("compute", "--norm", norm, "--x", "1,1", "--y", "1,0", "--json")
        assert result.exit_code == 0
        assert json.loads(result.stdout)["norm"] == "Polyhedral(m=3)/d2"

    def test_orth(self):
        """Test a Birkhoff test from the command line."""
        result = invoke(
            "orth", "-r", "B", "--norm", "lp:inf:2", "--x", "1,1", "--y", "0,-1", "--json"
        )
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["relation"] == "B"
        assert data["orthogonal"] is True

    def test_orthogonalize(self):
        """Test Gram-Schmidt in l2."""
        result = invoke(
            "orthogonalize",
            "--norm",
            "lp:2:2",
            "--lambda",
            "0.5",
            "--x",
            "1,0",
            "--y",
            "2,3",
            "--json",
        )
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["t"] == -2.0
        assert data["z"] == [0.0, 3.0]

    def test_smooth(self):
        """Test smoothness at a corner and on a face."""
        corner = invoke("smooth", "--norm", "lp:inf:2", "--x", "1,1", "--json")
        assert corner.exit_code == 0
        assert json.loads(corner.stdout)["smooth"] is False
        face = invoke("smooth", "--norm", "lp:2:2", "--x", "3,4", "--json")
        data = json.loads(face.stdout)
        assert data["smooth"] is True
        assert data["differential"][0] == 0.6

    def test_interval(self):
        """Test the Birkhoff interval at the corner."""
        result = invoke("interval", "--norm", "lp:inf:2", "--x", "1,1", "--y", "0,-1", "--json")
        assert result.exit_code == 0
        assert json.loads(result.stdout) == {"lo": 0.0, "hi": 1.0, "width": 1.0}

    def test_axioms(self):
        """Test axiom sampling."""
        result = invoke("axioms", "--norm", "lp:3:2", "--trials", "50", "--seed", "1")
        assert result.exit_code == 0


class TestSuiteCommands:
    """Test verify, examples and search."""

    def test_examples(self):
        """Test that the reference examples reproduce."""
        result = invoke("examples", "--json")
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["matches"] is True
        assert data["lambdas"] == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_verify_uses_environment_seed(self, tmp_path):
        """Test that RHOLAB_SEED reaches a config without a seed."""
        path = tmp_path / "small.yaml"
        path.write_text(
            "name: small\n"
            "norms: [{family: lp, p: 2, dim: 2}]\n"
            "lambdas: [0.5]\n"
            "trials: 10\n"
            "suites: [reference_examples]\n",
            encoding="utf-8",
        )
        result = invoke("verify", "-c", str(path), "--json", env={"RHOLAB_SEED": "7"})
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["seed"] == 7
        assert data["summary"]["pass"] == 1

    def test_verify_writes_report_files(self, tmp_path):
        """Test --output and --csv."""
        out = tmp_path / "report.json"
        csv = tmp_path / "report.csv"
        result = invoke(
            "verify",
            "--quick",
            "--suite",
            "reference_examples",
            "--seed",
            "3",
            "--output",
            str(out),
            "--csv",
            str(csv),
        )
        assert result.exit_code == 0
        assert json.loads(out.read_text(encoding="utf-8"))["seed"] == 3
        assert csv.exists()

    def test_verify_invalid_config(self, tmp_path):
        """Test that an invalid config is a usage error."""
        path = tmp_path / "bad.yaml"
        path.write_text("trials: 0\n", encoding="utf-8")
        result = invoke("verify", "-c", str(path))
        assert result.exit_code == 2

    def test_search_finds_corner(self):
        """Test the counterexample search."""
        result = invoke(
            "search", "--from", "B", "--to", "rho_lambda(0.5)", "--norm", "lp:inf:2", "--json"
        )
        assert result.exit_code == 1
        data = json.loads(result.stdout)
        assert data["found"] is True
        assert data["witness"] == {"x": ["1", "1"], "y": ["0", "-1"]}

    def test_search_exhausted_exits_zero(self):
        """Test that an inclusion that holds gives exit code 0."""
        result = invoke(
            "search", "--from", "rho_lambda(0.5)", "--to", "B", "--norm", "lp:2:2",
            "--budget", "20", "--json",
        )
        assert result.exit_code == 0
        assert json.loads(result.stdout)["found"] is False


class TestGeometryCommands:
    """Test map, ratio, modulus and plot."""

    def test_map_similarity(self):
        """Test the rotation fixture."""
        path = CONFIG_DIR / "maps_fixture.yaml"
        result = invoke("map", "--map", str(path), "--check", "similarity", "--json")
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["check"] == "similarity"
        assert data["holds"] is True

    def test_map_not_similarity_exits_one(self, tmp_path):
        """Test that a failing map check gives exit code 1."""
        path = tmp_path / "stretch.yaml"
        norm = "{family: lp, p: 2, dim: 2}"
        path.write_text(
            f"matrix: [[2, 0], [0, 1]]\ndomain: {norm}\ncodomain: {norm}\n", encoding="utf-8"
        )
        result = invoke("map", "--map", str(path), "--check", "similarity", "--json")
        assert result.exit_code == 1
        assert json.loads(result.stdout)["holds"] is False

    def test_map_missing_file(self, tmp_path):
        """Test a missing map file."""
        result = invoke("map", "--map", str(tmp_path / "none.yaml"))
        assert result.exit_code == 2

    def test_ratio(self):
        """Test proportional norms."""
        doubled = json.dumps({"family": "weighted_lp", "dim": 2, "p": 2, "weights": [4, 4]})
        result = invoke(
            "ratio", "--norm1", "lp:2:2", "--norm2", doubled, "--trials", "20", "--json"
        )
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert abs(data["m_hat"] - 4.0) < 1e-9
        assert data["breaking_witness"] is None

    def test_modulus(self):
        """Test the modulus of l1."""
        result = invoke("modulus", "--norm", "lp:1:2", "-e", "1", "--budget", "20", "--json")
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data[0]["epsilon"] == 1.0
        assert data[0]["delta_hat"] <= 1e-6

    def test_plot(self, tmp_path):
        """Test writing a unit-ball plot."""
        out = tmp_path / "ball.svg"
        result = invoke("plot", "--norm", "lp:1:2", "--out", str(out), "--resolution", "64")
        assert result.exit_code == 0
        assert out.exists()
        assert out.with_suffix(".csv").exists()

    def test_plot_needs_plane(self, tmp_path):
        """Test that a three-dimensional norm is rejected."""
        result = invoke("plot", "--norm", "lp:2:3", "--out", str(tmp_path / "x.svg"))
        assert result.exit_code == 2

    def test_version(self):
        """Test the version command."""
        result = invoke("version")
        assert result.exit_code == 0
        assert "rholab" in result.stdout
