"""Exact spectral computations for the Dirac operator on generalized Berger 3-spheres."""

__version__ = "0.1.0"
