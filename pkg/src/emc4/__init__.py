"""Exact finite checks for the 4-uniform matching threshold."""

__version__ = "0.1.0"
