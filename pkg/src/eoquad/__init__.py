"""Exact elementary orthogonal group calculus over polynomial rings."""

__version__ = "0.1.0"
