"""Numerical verification lab for monopole fields on the round 3-sphere."""

__version__ = "0.1.0"
