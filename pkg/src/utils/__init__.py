"""
Shared utilities for rholab.
"""

from utils.logging import check_context, resolve_level, setup_logging

__all__ = ["setup_logging", "resolve_level", "check_context"]
