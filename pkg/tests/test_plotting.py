"""
Tests for the planar SVG plots.
"""

import math

import pytest


class TestSamples:
    """Test the sampled curves."""

    def test_unit_ball_points_have_norm_one(self, hexagon):
        """Test that sampled boundary points lie on the unit sphere."""
        from rholab.normcore import eval_norm
        from rholab.plotting import unit_ball_samples

        frame = unit_ball_samples(hexagon, resolution=64)
        assert len(frame) >= 64
        for x, y in zip(frame["x"], frame["y"]):
            assert eval_norm(hexagon, [x, y]) == pytest.approx(1.0)

    def test_euclidean_field_crossings(self, l2):
        """Test that the field at e1 vanishes at plus and minus 90 degrees."""
        from rholab.plotting import orthogonality_field_samples

        frame, crossings = orthogonality_field_samples(l2, [1, 0], 0.5, resolution=64)
        assert len(frame) == 64
        assert crossings == pytest.approx([-math.pi / 2, math.pi / 2], abs=1e-9)

    def test_field_values(self, l2):
        """Test that the l2 field is cos(theta) at e1."""
        import numpy as np

        from rholab.plotting import orthogonality_field_samples

        frame, _ = orthogonality_field_samples(l2, [1, 0], 0.3, resolution=32)
        assert np.allclose(frame["rho_lambda"], np.cos(frame["theta"]))


class TestPlotErrors:
    """Test plot argument checks."""

    def test_needs_plane(self):
        """Test that only two-dimensional norms can be drawn."""
        from rholab.models import LpNorm
        from rholab.plotting import unit_ball_samples

        with pytest.raises(ValueError, match="two-dimensional"):
            unit_ball_samples(LpNorm(dim=3, p=2))

    def test_resolution(self, l2):
        """Test the minimum resolution."""
        from rholab.plotting import unit_ball_samples

        with pytest.raises(ValueError, match="resolution"):
            unit_ball_samples(l2, resolution=16)

    def test_field_needs_base_point(self, l2, tmp_path):
        """Test that the field plot requires x."""
        from rholab.plotting import plot

        with pytest.raises(ValueError, match="base point"):
            plot(l2, "orthogonality_field", tmp_path / "field.svg")

    def test_zero_base_point(self, l2):
        """Test that x = 0 raises."""
        from rholab.exceptions import ZeroVectorError
        from rholab.plotting import orthogonality_field_samples

        with pytest.raises(ZeroVectorError):
            orthogonality_field_samples(l2, [0, 0], 0.5)


class TestPlotFiles:
    """Test written SVG and CSV files."""

    def test_unit_ball_files(self, linf, tmp_path):
        """Test that the SVG and CSV are written."""
        import pandas as pd

        from rholab.plotting import PlotKind, plot

        result = plot(linf, PlotKind.UNIT_BALL, tmp_path / "ball.svg", resolution=64)
        assert result.svg_path.read_text(encoding="utf-8").lstrip().startswith("<?xml")
        assert result.csv_path == tmp_path / "ball.csv"
        assert list(pd.read_csv(result.csv_path).columns) == ["theta", "x", "y"]
        assert result.zero_crossings == []

    def test_field_plot(self, l2, tmp_path):
        """Test the field plot summary."""
        from rholab.plotting import plot

        result = plot(l2, "orthogonality_field", tmp_path / "f.svg", x=[1, 0], resolution=64)
        data = result.to_dict()
        assert data["kind"] == "orthogonality_field"
        assert data["zero_crossings_deg"] == pytest.approx([-90.0, 90.0], abs=1e-6)

    def test_svg_is_deterministic(self, hexagon, tmp_path):
        """Test that repeated plots give identical bytes."""
        from rholab.plotting import plot

        first = plot(hexagon, "unit_ball", tmp_path / "a.svg", resolution=64)
        second = plot(hexagon, "unit_ball", tmp_path / "b.svg", resolution=64)
        assert first.svg_path.read_bytes() == second.svg_path.read_bytes()
