"""Truncated Laplacians: closed-form eigenpairs, eigenvalue comparisons,
a monotone wide-stencil solver and boundary regularity checks."""

__version__ = "0.1.0"
