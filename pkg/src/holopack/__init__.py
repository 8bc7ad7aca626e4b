"""Numerical laboratory for energy densities of entire holomorphic curves."""

__version__ = "0.1.0"
