"""Positivity-preserving DG solver for the 1D diode electron-transport problem
in spherical momentum coordinates, with a self-consistent Poisson field."""

__version__ = "0.1.0"
