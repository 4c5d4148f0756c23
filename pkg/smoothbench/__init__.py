"""Balanced truncation and LIS dimension reduction for linear Bayesian smoothing."""

__version__ = "1.0.0"
