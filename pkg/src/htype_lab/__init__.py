"""Numerical harmonic analysis on H-type groups.

Group construction, the spherical Fourier transform for bi-radial
functions, Littlewood-Paley machinery for the full Laplacian and
dispersive measurements for the Schroedinger propagator.
"""

__version__ = "0.1.0"
