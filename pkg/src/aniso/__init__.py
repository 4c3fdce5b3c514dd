"""Nonparametric anisotropy analysis for stationary spatial point patterns."""

__version__ = "0.1.0"
