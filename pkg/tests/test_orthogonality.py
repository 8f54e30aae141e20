"""
Unit tests for orthogonality relations, Birkhoff intervals and inclusion searches.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError


class TestRelations:
    """Test relation parsing."""

    def test_parse_names(self):
        """Test short names and aliases."""
        from rholab.models import OrthogonalityRelation, RelationKind

        assert OrthogonalityRelation.parse("B").kind is RelationKind.BIRKHOFF
        assert OrthogonalityRelation.parse("isosceles").kind is RelationKind.ISOSCELES
        assert OrthogonalityRelation.parse("rho+").kind is RelationKind.RHO_PLUS
        assert OrthogonalityRelation.parse("rho*").kind is RelationKind.RHO_STAR
        rel = OrthogonalityRelation.parse("rho_lambda(0.3)")
        assert rel.kind is RelationKind.RHO_LAMBDA
        assert rel.lam == 0.3
        assert rel.name == "rho_lambda(0.3)"

    def test_parse_errors(self):
        """Test unknown names and missing lambdas."""
        from rholab.models import OrthogonalityRelation, RelationKind

        with pytest.raises(ValueError, match="Unknown orthogonality relation"):
            OrthogonalityRelation.parse("roberts")
        with pytest.raises(ValidationError):
            OrthogonalityRelation(kind=RelationKind.RHO_LAMBDA)
        with pytest.raises(ValidationError):
            OrthogonalityRelation.rho_lambda(1.2)


class TestCheck:
    """Test single orthogonality tests."""

    def test_corner_pair(self, linf):
        """Test that the corner pair is Birkhoff but not rho_lambda orthogonal."""
        from rholab.models import OrthogonalityRelation
        from rholab.orthogonality import check

        x, y = [1, 1], [0, -1]
        assert check(OrthogonalityRelation.birkhoff(), linf, x, y).orthogonal
        assert check(OrthogonalityRelation.rho_lambda(0.0), linf, x, y).orthogonal
        result = check(OrthogonalityRelation.rho_lambda(0.5), linf, x, y)
        assert not result.orthogonal
        assert result.residual == pytest.approx(-0.5)
        assert check(OrthogonalityRelation.parse("rho*"), linf, x, y).orthogonal
        assert not check(OrthogonalityRelation.parse("rho"), linf, x, y).orthogonal

    def test_isosceles(self, l2):
        """Test isosceles orthogonality in the plane."""
        from rholab.models import OrthogonalityRelation
        from rholab.orthogonality import check

        rel = OrthogonalityRelation.parse("I")
        assert check(rel, l2, [1, 0], [0, 1]).orthogonal
        result = check(rel, l2, [1, 0], [1, 1])
        assert not result.orthogonal
        assert result.residual == pytest.approx(math.sqrt(5.0) - 1.0)
        assert result.scale == pytest.approx((1.0 + math.sqrt(2.0)) ** 2)

    def test_isosceles_residual_is_norm_difference(self, l1):
        """Test that the isosceles residual is ||x + y|| - ||x - y||, signed."""
        from rholab.models import OrthogonalityRelation
        from rholab.orthogonality import check

        rel = OrthogonalityRelation.parse("I")
        assert check(rel, l1, [1, 0], [1, 1]).residual == pytest.approx(2.0)
        assert check(rel, l1, [1, 0], [-1, 1]).residual == pytest.approx(-2.0)

    def test_tolerance_must_be_positive(self, l2):
        """Test the tolerance check."""
        from rholab.models import OrthogonalityRelation
        from rholab.orthogonality import check

        with pytest.raises(ValueError):
            check(OrthogonalityRelation.birkhoff(), l2, [1, 0], [0, 1], tol=0.0)


class TestBirkhoffInterval:
    """Test the set of t with x ⊥_B t x + y."""

    def test_corner_interval(self, linf):
        """Test the interval at the max-norm corner."""
        from rholab.models import OrthogonalityRelation
        from rholab.orthogonality import birkhoff_interval, check

        interval = birkhoff_interval(linf, [1, 1], [0, -1])
        assert (interval.lo, interval.hi) == (0.0, 1.0)
        x, y = np.array([1.0, 1.0]), np.array([0.0, -1.0])
        birkhoff = OrthogonalityRelation.birkhoff()
        assert check(birkhoff, linf, x, interval.point(0.5) * x + y).orthogonal
        assert not check(birkhoff, linf, x, 1.5 * x + y).orthogonal

    def test_smooth_interval_is_a_point(self, l2):
        """Test that the interval collapses in l2."""
        from rholab.orthogonality import birkhoff_interval

        interval = birkhoff_interval(l2, [1, 0], [1, 1])
        assert interval.lo == pytest.approx(-1.0)
        assert interval.width == pytest.approx(0.0)

    def test_zero_base_point(self, l2):
        """Test that x = 0 raises."""
        from rholab.exceptions import ZeroVectorError
        from rholab.orthogonality import birkhoff_interval

        with pytest.raises(ZeroVectorError):
            birkhoff_interval(l2, [0, 0], [1, 1])


class TestOrthogonalize:
    """Test rho_lambda orthogonalization."""

    def test_euclidean(self, l2):
        """Test Gram-Schmidt in l2."""
        from rholab.orthogonality import rho_lambda_orthogonalize

        result = rho_lambda_orthogonalize(l2, 0.5, [1, 0], [2, 3])
        assert result.t == pytest.approx(-2.0)
        assert result.z.tolist() == pytest.approx([0.0, 3.0])
        assert not result.flagged

    def test_max_norm_corner(self, linf):
        """Test orthogonalization at the corner."""
        from rholab.derivatives import rho_lambda
        from rholab.orthogonality import rho_lambda_orthogonalize

        result = rho_lambda_orthogonalize(linf, 0.5, [1, 1], [0, -1])
        assert result.t == pytest.approx(0.5)
        assert rho_lambda(linf, 0.5, [1, 1], result.z) == pytest.approx(0.0, abs=1e-12)

    def test_zero_base_point(self, l2):
        """Test that x = 0 raises."""
        from rholab.exceptions import ZeroVectorError
        from rholab.orthogonality import rho_lambda_orthogonalize

        with pytest.raises(ZeroVectorError):
            rho_lambda_orthogonalize(l2, 0.5, [0, 0], [1, 0])


class TestConstruction:
    """Test construction of pairs in a relation."""

    @pytest.mark.parametrize("name", ["B", "rho-", "rho+", "rho", "rho*", "rho_lambda(0.3)", "I"])
    def test_constructed_pairs_are_orthogonal(self, name, hexagon):
        """Test that every constructed pair passes its own relation."""
        from rholab.models import OrthogonalityRelation
        from rholab.orthogonality import check, construct_orthogonal_pair

        rel = OrthogonalityRelation.parse(name)
        rng = np.random.default_rng(11)
        for _ in range(20):
            x, y = rng.standard_normal(2), rng.standard_normal(2)
            xa, za = construct_orthogonal_pair(rel, hexagon, x, y, rng)
            assert check(rel, hexagon, xa, za).orthogonal


class TestInclusionProbe:
    """Test the search for pairs in one relation but not another."""

    def test_rho_lambda_inside_birkhoff(self, linf, sweep_trials):
        """Test that rho_lambda orthogonality implies Birkhoff orthogonality."""
        from rholab.models import OrthogonalityRelation
        from rholab.orthogonality import ProbeStatus, inclusion_probe

        probe = inclusion_probe(
            OrthogonalityRelation.rho_lambda(0.5),
            OrthogonalityRelation.birkhoff(),
            linf,
            trials=min(sweep_trials, 100),
            seed=3,
        )
        assert probe.status is ProbeStatus.PASS
        assert probe.witness is None

    def test_birkhoff_not_inside_rho_lambda(self, linf):
        """Test that the max norm separates Birkhoff from rho_lambda."""
        from rholab.models import OrthogonalityRelation
        from rholab.orthogonality import ProbeStatus, inclusion_probe, is_witness

        rel_a = OrthogonalityRelation.birkhoff()
        rel_b = OrthogonalityRelation.rho_lambda(0.5)
        probe = inclusion_probe(rel_a, rel_b, linf, trials=10, seed=0)
        assert probe.status is ProbeStatus.WITNESS
        x, y = probe.witness
        assert is_witness(rel_a, rel_b, linf, x, y)[1]

    def test_smooth_norm_has_no_witness(self, l2):
        """Test that Birkhoff and rho_lambda coincide in l2."""
        from rholab.models import OrthogonalityRelation
        from rholab.orthogonality import ProbeStatus, inclusion_probe

        probe = inclusion_probe(
            OrthogonalityRelation.birkhoff(),
            OrthogonalityRelation.rho_lambda(0.3),
            l2,
            trials=50,
            seed=5,
        )
        assert probe.status is ProbeStatus.PASS
        assert probe.trials == 50

    def test_independent_of_workers(self, hexagon):
        """Test that the worker count does not change the result."""
        from rholab.models import OrthogonalityRelation
        from rholab.orthogonality import inclusion_probe

        args = (OrthogonalityRelation.rho_lambda(0.25), OrthogonalityRelation.birkhoff(), hexagon)
        serial = inclusion_probe(*args, trials=40, seed=9, workers=1)
        parallel = inclusion_probe(*args, trials=40, seed=9, workers=4)
        assert serial.to_dict() == parallel.to_dict()

    def test_trials_must_be_positive(self, l2):
        """Test the trial count check."""
        from rholab.models import OrthogonalityRelation
        from rholab.orthogonality import inclusion_probe

        rel = OrthogonalityRelation.birkhoff()
        with pytest.raises(ValueError):
            inclusion_probe(rel, rel, l2, trials=0, seed=0)


class TestBirkhoffDefinition:
    """Test the sign test against the definition ||x + t y|| >= ||x||."""

    def test_against_grid_minimization(self, hexagon):
        """Test interval points and points beyond the interval on a polyhedral norm."""
        from rholab.models import OrthogonalityRelation
        from rholab.normcore import eval_norm
        from rholab.orthogonality import birkhoff_interval, check

        birkhoff = OrthogonalityRelation.birkhoff()
        grid = np.append(np.linspace(-2.0, 2.0, 4001), -1e-6)
        rng = np.random.default_rng(8)
        for _ in range(10):
            x, y = rng.standard_normal(2), rng.standard_normal(2)
            nx = eval_norm(hexagon, x)
            interval = birkhoff_interval(hexagon, x, y)

            inside = interval.point(0.5) * x + y
            assert check(birkhoff, hexagon, x, inside).orthogonal
            assert min(eval_norm(hexagon, x + t * inside) for t in grid) >= nx * (1 - 1e-12)

            outside = (interval.hi + 1.0) * x + y
            assert not check(birkhoff, hexagon, x, outside).orthogonal
            assert min(eval_norm(hexagon, x + t * outside) for t in grid) < nx


class TestEuclideanCoincidence:
    """Test that every relation reduces to the inner product in l2."""

    @pytest.mark.parametrize("name", ["B", "I", "rho-", "rho+", "rho", "rho*", "rho_lambda(0.7)"])
    def test_relations_agree(self, l2, name):
        """Test orthogonal and non-orthogonal pairs for every relation."""
        from rholab.models import OrthogonalityRelation
        from rholab.orthogonality import check

        rel = OrthogonalityRelation.parse(name)
        assert check(rel, l2, [3, 4], [-8, 6]).orthogonal
        assert check(rel, l2, [1, 0], [0, 2]).orthogonal
        assert not check(rel, l2, [1, 0], [1, 1]).orthogonal
