"""Exact toric and suspension automorphism engine."""

__version__ = "0.1.0"
