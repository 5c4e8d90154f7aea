"""Quadratic-family numerics: MT parameters, fractional calculus on spikes,
transfer-operator densities, and susceptibility series."""

__version__ = "0.1.0"
