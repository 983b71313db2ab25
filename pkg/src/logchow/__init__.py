"""Exact computations with cone complexes, piecewise polynomials, toric Chow rings and tropical twists."""

__version__ = "0.1.0"
