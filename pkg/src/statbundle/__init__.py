"""Curvature of statistical manifolds, their Sasaki-lifted tangent bundles and sphere bundles."""

__version__ = "0.1.0"
