"""
Unit tests for the norm derivatives rho-, rho+ and rho_lambda.

Tests cover:
- Closed forms for Lp, polyhedral and linear-image norms
- The numerical enclosure
- Smoothness decisions and the derivative functional
- Property-based identities (hypothesis)
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st


class TestExactDerivatives:
    """Test the closed-form derivatives."""

    def test_euclidean_is_dot_product(self, l2):
        """Test rho-(x, y) = rho+(x, y) = <x, y> in l2."""
        from rholab.derivatives import rho_pair

        pair = rho_pair(l2, [1, 2], [3, -1])
        assert pair.rho_minus == pytest.approx(1.0)
        assert pair.rho_plus == pytest.approx(1.0)
        assert pair.gap == pytest.approx(0.0)

    def test_max_norm_corner(self, linf):
        """Test the corner pair x = (1, 1), y = (0, -1)."""
        from rholab.derivatives import rho_lambda, rho_mid, rho_pair, rho_star

        pair = rho_pair(linf, [1, 1], [0, -1])
        assert pair.rho_minus == -1.0
        assert pair.rho_plus == 0.0
        assert rho_mid(linf, [1, 1], [0, -1]) == -0.5
        assert rho_star(linf, [1, 1], [0, -1]) == 0.0
        for lam in (0.0, 0.25, 0.5, 1.0):
            assert rho_lambda(linf, lam, [1, 1], [0, -1]) == pytest.approx(-lam)

    def test_l1_at_a_vertex(self, l1):
        """Test rho+- at e1 in direction e2 for l1."""
        from rholab.derivatives import rho_pair

        pair = rho_pair(l1, [1, 0], [0, 1])
        assert (pair.rho_minus, pair.rho_plus) == (-1.0, 1.0)

    def test_lp3_matches_gradient(self):
        """Test rho(x, y) = ||x||^(2-p) sum sign(x_i) |x_i|^(p-1) y_i for p = 3."""
        from rholab.derivatives import rho_pair
        from rholab.models import LpNorm

        spec = LpNorm(dim=2, p=3)
        x, y = np.array([1.0, 2.0]), np.array([0.5, -1.0])
        nx = (1 + 8) ** (1 / 3)
        expected = nx ** (2 - 3) * (1 * 0.5 + 4 * -1.0)
        pair = rho_pair(spec, x, y)
        assert pair.rho_minus == pytest.approx(expected)
        assert pair.rho_plus == pytest.approx(expected)

    def test_hexagon_edge(self, hexagon):
        """Test the hexagon at the vertex (1, 0) where two facets meet."""
        from rholab.derivatives import rho_pair

        pair = rho_pair(hexagon, [1, 0], [0, 1])
        assert pair.rho_minus == 0.0
        assert pair.rho_plus == 1.0

    def test_zero_base_point(self, linf):
        """Test that x = 0 gives (0, 0) exactly."""
        from rholab.derivatives import rho_pair

        pair = rho_pair(linf, [0, 0], [3, 1])
        assert (pair.rho_minus, pair.rho_plus) == (0.0, 0.0)

    def test_invalid_lambda(self, l2):
        """Test that lambda outside [0, 1] is rejected."""
        from rholab.derivatives import rho_lambda

        with pytest.raises(ValueError):
            rho_lambda(l2, 1.5, [1, 0], [0, 1])

    def test_dimension_mismatch(self, l2):
        """Test mismatched vectors."""
        from rholab.derivatives import rho_pair
        from rholab.exceptions import DimensionMismatchError

        with pytest.raises(DimensionMismatchError):
            rho_pair(l2, [1, 0], [0, 1, 0])

    def test_inner_product_candidate_is_mid(self, linf):
        """Test (rho_lambda + rho_{1-lambda}) / 2 = rho."""
        from rholab.derivatives import inner_product_candidate

        for lam in (0.0, 0.3, 1.0):
            assert inner_product_candidate(linf, lam, [1, 1], [0, -1]) == pytest.approx(-0.5)


class TestNumericalEnclosure:
    """Test the forced numerical path."""

    def test_agrees_with_exact_on_smooth_norm(self):
        """Test agreement for l3 at a generic point."""
        from rholab.derivatives import DerivativeMethod, rho_pair
        from rholab.models import LpNorm

        spec = LpNorm(dim=3, p=3)
        x, y = [0.7, -0.2, 0.4], [0.1, 0.9, -0.3]
        exact = rho_pair(spec, x, y)
        numeric = rho_pair(spec, x, y, method=DerivativeMethod.NUMERICAL)
        assert numeric.method is DerivativeMethod.NUMERICAL
        assert numeric.rho_minus == pytest.approx(exact.rho_minus, abs=1e-5)
        assert numeric.rho_plus == pytest.approx(exact.rho_plus, abs=1e-5)

    def test_resolves_a_corner(self, linf):
        """Test that one-sided quotients are exact at the max-norm corner."""
        from rholab.derivatives import rho_pair

        pair = rho_pair(linf, [1, 1], [0, -1], method="numerical")
        assert pair.rho_minus == pytest.approx(-1.0, abs=1e-9)
        assert pair.rho_plus == pytest.approx(0.0, abs=1e-9)


class TestSmoothness:
    """Test smoothness decisions."""

    def test_smooth_points(self, l2, l1, linf):
        """Test points where the norm is differentiable."""
        from rholab.derivatives import is_smooth_at

        assert is_smooth_at(l2, [1, 2]).smooth
        assert is_smooth_at(l1, [1, 2]).smooth
        assert is_smooth_at(linf, [2, 1]).smooth

    def test_kinks(self, l1, linf):
        """Test points where the norm has a kink."""
        from rholab.derivatives import is_smooth_at, rho_pair

        corner = is_smooth_at(linf, [1, 1])
        assert not corner
        assert corner.gap > 0
        pair = rho_pair(linf, [1, 1], corner.witness)
        assert pair.gap == pytest.approx(corner.gap)
        assert not is_smooth_at(l1, [1, 0])

    def test_numerical_smoothness(self, linf):
        """Test the numerical decision at a corner."""
        from rholab.derivatives import is_smooth_at

        assert not is_smooth_at(linf, [1, 1], method="numerical")

    def test_origin_raises(self, l2):
        """Test that smoothness at 0 is undefined."""
        from rholab.derivatives import is_smooth_at
        from rholab.exceptions import ZeroVectorError

        with pytest.raises(ZeroVectorError):
            is_smooth_at(l2, [0, 0])

    def test_gateaux_differential(self, l2, linf):
        """Test f_x at smooth points."""
        from rholab.derivatives import gateaux_differential

        f = gateaux_differential(l2, [3, 4])
        assert f.coefficients.tolist() == pytest.approx([0.6, 0.8])
        assert f.apply([4, -3]) == pytest.approx(0.0)
        g = gateaux_differential(linf, [2, 1])
        assert g.coefficients.tolist() == pytest.approx([1.0, 0.0])

    def test_gateaux_differential_at_kink(self, linf):
        """Test that a kink raises with a witness direction."""
        from rholab.derivatives import gateaux_differential
        from rholab.exceptions import NonSmoothPointError

        with pytest.raises(NonSmoothPointError) as exc_info:
            gateaux_differential(linf, [1, 1])
        assert exc_info.value.witness is not None
        assert exc_info.value.gap > 0


_small_ints = st.integers(min_value=-5, max_value=5)
_int_vectors = st.tuples(_small_ints, _small_ints).filter(lambda v: v != (0, 0))
_floats = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_subnormal=False)
_float_vectors = st.tuples(_floats, _floats, _floats)


class TestRhoIdentities:
    """Property-based tests of the rho_lambda identities."""

    @settings(max_examples=60, deadline=None)
    @given(x=_int_vectors, y=_int_vectors, lam=st.sampled_from([0.0, 0.25, 0.5, 1.0]))
    def test_order_and_bound_nonsmooth(self, x, y, lam):
        """Test rho- <= rho_lambda <= rho+ and |rho_lambda| <= ||x|| ||y||."""
        from rholab.derivatives import rho_pair
        from rholab.models import LpNorm
        from rholab.normcore import eval_norm
        from rholab.suite_config import hexagon_norm

        for spec in (LpNorm(dim=2, p=1), LpNorm(dim=2, p=math.inf), hexagon_norm()):
            pair = rho_pair(spec, x, y)
            r = pair.rho_lambda(lam)
            assert pair.rho_minus <= r + 1e-12 <= pair.rho_plus + 2e-12
            assert abs(r) <= eval_norm(spec, x) * eval_norm(spec, y) + 1e-9

    @settings(max_examples=60, deadline=None)
    @given(
        x=_int_vectors,
        y=_int_vectors,
        t=st.integers(min_value=-3, max_value=3),
        lam=st.sampled_from([0.0, 0.5, 0.75, 1.0]),
    )
    def test_shift_identity(self, x, y, t, lam):
        """Test rho_lambda(x, t x + y) = t ||x||^2 + rho_lambda(x, y)."""
        from rholab.derivatives import rho_lambda
        from rholab.models import LpNorm
        from rholab.normcore import eval_norm

        for spec in (LpNorm(dim=2, p=1), LpNorm(dim=2, p=math.inf)):
            xv, yv = np.array(x, float), np.array(y, float)
            lhs = rho_lambda(spec, lam, xv, t * xv + yv)
            rhs = t * eval_norm(spec, xv) ** 2 + rho_lambda(spec, lam, xv, yv)
            assert lhs == pytest.approx(rhs, abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(x=_int_vectors, y=_int_vectors, lam=st.sampled_from([0.0, 0.3, 1.0]))
    def test_sign_flip(self, x, y, lam):
        """Test rho_lambda(-x, y) = -rho_{1-lambda}(x, y)."""
        from rholab.derivatives import rho_pair
        from rholab.models import LpNorm

        spec = LpNorm(dim=2, p=math.inf)
        xv = np.array(x, float)
        flipped = rho_pair(spec, -xv, y).rho_lambda(lam)
        assert flipped == pytest.approx(-rho_pair(spec, xv, y).rho_lambda(1.0 - lam), abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(x=_float_vectors, y=_float_vectors)
    def test_euclidean_symmetry(self, x, y):
        """Test rho(x, y) = rho(y, x) in l2."""
        from rholab.derivatives import rho_mid
        from rholab.models import LpNorm

        spec = LpNorm(dim=3, p=2)
        assert rho_mid(spec, x, y) == rho_mid(spec, y, x)

    @settings(max_examples=60, deadline=None)
    @given(x=_float_vectors, y=_float_vectors, p=st.sampled_from([1.0, 1.5, 3.0, math.inf]))
    def test_triangle_inequality(self, x, y, p):
        """Test subadditivity of Lp norms."""
        from rholab.models import LpNorm
        from rholab.normcore import eval_norm

        spec = LpNorm(dim=3, p=p)
        total = eval_norm(spec, np.add(x, y))
        assert total <= (eval_norm(spec, x) + eval_norm(spec, y)) * (1 + 1e-12) + 1e-300
