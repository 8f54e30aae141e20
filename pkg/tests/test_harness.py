"""
Tests for the check-suite harness and its report.
"""

import json

import pytest


def _config(**overrides):
    from rholab.models import LpNorm
    from rholab.suite_config import SuiteConfig

    data = {
        "name": "unit",
        "norms": [LpNorm(dim=2, p=2), LpNorm(dim=2, p="inf")],
        "lambdas": [0.5],
        "trials": 50,
        "seed": 11,
        "suites": ["characterization", "reference_examples"],
        "modulus_budget": 20,
    }
    data.update(overrides)
    return SuiteConfig(**data)


class TestStableSeed:
    """Test per-check seed derivation."""

    def test_deterministic(self):
        """Test that equal parts give equal seeds."""
        from rholab.harness import stable_seed

        assert stable_seed(42, "a/b") == stable_seed(42, "a/b")
        assert stable_seed(42, "a/b") != stable_seed(43, "a/b")
        assert 0 <= stable_seed("x") < 2**32


class TestSuiteReport:
    """Test report aggregation."""

    def _record(self, status):
        from rholab.harness import CheckRecord
        from rholab.suite_config import SuiteName

        return CheckRecord(f"demo/{status.value}", SuiteName.PROPERTIES, status, 0.1)

    def test_exit_codes(self):
        """Test that failures outrank numerical failures."""
        from rholab.harness import CheckStatus, SuiteReport

        ok = SuiteReport(
            "r", 1, [self._record(CheckStatus.PASS), self._record(CheckStatus.VACUOUS)]
        )
        assert ok.exit_code == 0
        numerical = SuiteReport(
            "r", 1, [self._record(CheckStatus.PASS), self._record(CheckStatus.NUMERICAL_FAILURE)]
        )
        assert numerical.exit_code == 3
        failed = SuiteReport(
            "r", 1, [self._record(CheckStatus.FAIL), self._record(CheckStatus.NUMERICAL_FAILURE)]
        )
        assert failed.exit_code == 1
        assert [r.check_id for r in failed.failures()] == ["demo/fail"]

    def test_summary_lists_every_status(self):
        """Test that the summary has a count for every status."""
        from rholab.harness import CheckStatus, SuiteReport

        report = SuiteReport("r", 1, [self._record(CheckStatus.PASS)])
        assert report.summary == {
            "pass": 1,
            "fail": 0,
            "vacuous": 0,
            "degenerate": 0,
            "numerical_failure": 0,
        }

    def test_json_without_timing(self):
        """Test that runtimes only appear on request."""
        from rholab.harness import CheckStatus, SuiteReport

        report = SuiteReport("r", 1, [self._record(CheckStatus.PASS)])
        assert "runtime_ms" not in json.loads(report.to_json())["records"][0]
        assert "runtime_ms" in report.to_dict(include_timing=True)["records"][0]

    def test_csv(self, tmp_path):
        """Test the CSV export."""
        import pandas as pd

        from rholab.harness import CheckStatus, SuiteReport

        report = SuiteReport("r", 1, [self._record(CheckStatus.PASS)])
        path = tmp_path / "report.csv"
        report.to_csv(path)
        frame = pd.read_csv(path)
        assert list(frame.columns)[:3] == ["check_id", "suite", "status"]
        assert frame["status"].tolist() == ["pass"]


class TestExecution:
    """Test check execution."""

    def test_arithmetic_error_is_numerical_failure(self):
        """Test that a crashing check is recorded instead of aborting the run."""
        from rholab.harness import Check, CheckStatus, _execute
        from rholab.suite_config import SuiteName

        def run(seed):
            raise ZeroDivisionError("division by zero")

        record = _execute(Check("demo/crash", SuiteName.PROPERTIES, run), 42)
        assert record.status is CheckStatus.NUMERICAL_FAILURE
        assert "division by zero" in record.detail

    def test_value_error_is_numerical_failure(self):
        """Test that any exception inside one check leaves the rest of the run intact."""
        from rholab.exceptions import ZeroVectorError
        from rholab.harness import Check, CheckStatus, _execute
        from rholab.suite_config import SuiteName

        def run(seed):
            raise ZeroVectorError("needs x != 0")

        record = _execute(Check("demo/zero", SuiteName.INCLUSIONS, run), 42)
        assert record.status is CheckStatus.NUMERICAL_FAILURE
        assert "ZeroVectorError" in record.detail

    def test_relations_coincide(self):
        """Test which rho-family relations collapse onto rho_lambda."""
        from rholab.harness import relations_coincide
        from rholab.models import OrthogonalityRelation

        assert relations_coincide(OrthogonalityRelation.parse("rho"), 0.5)
        assert relations_coincide(OrthogonalityRelation.parse("rho-"), 1.0)
        assert relations_coincide(OrthogonalityRelation.parse("rho+"), 0.0)
        assert not relations_coincide(OrthogonalityRelation.parse("rho"), 0.25)

    def test_fixture_maps(self):
        """Test the built-in map fixtures."""
        from rholab.harness import fixture_maps

        fixtures = fixture_maps()
        assert len(fixtures) == 5
        assert sum(1 for f in fixtures if f.expected_similarity) == 3


class TestRunSuite:
    """Test whole suite runs."""

    def test_characterization_and_reference(self):
        """Test a small run that must pass."""
        from rholab.harness import run_suite

        report = run_suite(_config())
        assert report.exit_code == 0
        assert report.summary["fail"] == 0
        ids = [r.check_id for r in report.records]
        assert "characterization/parallelogram/Lp(inf)/d2" in ids
        assert "reference_examples/lam=0.5" in ids

    def test_deterministic(self):
        """Test that two runs give identical JSON."""
        from rholab.harness import run_suite

        assert run_suite(_config()).to_json() == run_suite(_config()).to_json()

    def test_independent_of_workers(self):
        """Test that the worker count does not change the report."""
        from rholab.harness import run_suite

        serial = run_suite(_config(workers=1)).to_json()
        parallel = run_suite(_config(workers=3)).to_json()
        assert serial == parallel

    def test_smoothness_on_max_norm(self):
        """Test the smoothness suite on a nonsmooth norm."""
        from rholab.harness import CheckStatus, run_suite
        from rholab.models import LpNorm

        config = _config(norms=[LpNorm(dim=2, p="inf")], suites=["smoothness"])
        report = run_suite(config)
        statuses = {r.check_id: r.status for r in report.records}
        assert len(statuses) == 9
        assert statuses["smoothness/rho->rho_lambda(0.5)/Lp(inf)/d2"] is CheckStatus.VACUOUS
        assert statuses["smoothness/rho_lambda(0.5)->rho/Lp(inf)/d2"] is CheckStatus.VACUOUS
        assert report.summary["pass"] == 7

    @pytest.mark.parametrize("p", ["inf", 2])
    def test_smoothness_runs_both_directions(self, p):
        """Test the reverse rho_lambda checks and the rho* checks on both norm classes."""
        from rholab.harness import CheckStatus, run_suite
        from rholab.models import LpNorm

        config = _config(norms=[LpNorm(dim=2, p=p)], suites=["smoothness"], lambdas=[0.25])
        report = run_suite(config)
        statuses = {r.check_id: r.status for r in report.records}
        label = "Lp(inf)/d2" if p == "inf" else "Lp(2)/d2"
        expected = [
            f"smoothness/B->rho*/{label}",
            f"smoothness/rho_lambda(0.25)->rho/{label}",
            f"smoothness/rho_lambda(0.25)->rho-/{label}",
            f"smoothness/rho_lambda(0.25)->rho+/{label}",
            f"smoothness/rho->rho_lambda(0.25)/{label}",
        ]
        for check_id in expected:
            assert statuses[check_id] is CheckStatus.PASS, check_id
        if p == "inf":
            witnessed = [r for r in report.records if r.check_id in expected]
            assert all(r.witness is not None for r in witnessed)

    def test_rho_star_implies_birkhoff(self):
        """Test the rho* inclusion check on smooth and nonsmooth norms."""
        from rholab.harness import CheckStatus, run_suite
        from rholab.models import LpNorm

        norms = [LpNorm(dim=2, p=2), LpNorm(dim=2, p="inf"), LpNorm(dim=3, p=1)]
        report = run_suite(_config(norms=norms, suites=["inclusions"], trials=30))
        statuses = {r.check_id: r.status for r in report.records}
        for label in ("Lp(2)/d2", "Lp(inf)/d2", "Lp(1)/d3"):
            assert statuses[f"inclusions/rho*->B/{label}"] is CheckStatus.PASS

    @pytest.mark.parametrize("suite", ["properties", "inclusions"])
    def test_property_suites_pass_on_euclidean_norm(self, suite):
        """Test the identity and inclusion checks on l2."""
        from rholab.harness import run_suite
        from rholab.models import LpNorm

        config = _config(norms=[LpNorm(dim=2, p=2)], suites=[suite], trials=30)
        report = run_suite(config)
        assert report.summary["fail"] == 0
        assert report.exit_code == 0
