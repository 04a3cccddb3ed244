"""Finite-dimensional channel simulator and exact bound checker for the
switched rocket/erasure construction."""

__version__ = "0.1.0"

__all__ = ["__version__"]
