"""Laplace transformations of semi-discrete and discrete hyperbolic
Schrödinger operators, 2D Toda lattices and the direct Floquet problem."""

__version__ = "0.1.0"
