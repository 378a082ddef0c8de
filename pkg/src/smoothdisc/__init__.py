"""Frolov lattices, smooth fixed-volume discrepancy and dispersion."""

__version__ = "0.1.0"
