"""Classify npm dependency constraints into update strategies and predict them from package metadata."""

from .semver import UpdateStrategy, classify, classify_text, parse_range, parse_version

__version__ = "0.1.0"

__all__ = ["UpdateStrategy", "classify", "classify_text", "parse_range", "parse_version", "__version__"]
