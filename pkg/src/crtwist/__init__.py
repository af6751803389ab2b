"""Symbolic and numeric tools for weighted extremal toric Kahler metrics.

The package computes weighted scalar curvatures of separable toric Kahler
ansatze exactly, applies CR twists between them, verifies and solves
weighted-extremality conditions, and decides existence of extremal Sasaki
structures on circle bundles over ruled surfaces through an exact
polynomial positivity certificate.  A finite-difference oracle provides an
independent numeric check of every symbolic formula.
"""

__version__ = "0.1.0"
