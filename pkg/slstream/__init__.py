"""Bounded-memory sequential leverage sampling for streaming AR(p) series."""

__version__ = "1.0.0"
