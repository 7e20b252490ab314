"""Numerical laboratory for two-phase Hele-Shaw graph flow."""

__version__ = "0.1.0"
