"""Piecewise-linear surface finite elements with curvature-graded meshes."""

__version__ = "0.1.0"
