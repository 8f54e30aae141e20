"""Tests for rholab."""
