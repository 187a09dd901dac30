"""Numerical verification of curvature comparison statements on weighted
warped products with boundary.

The package evaluates both sides of a family of comparison inequalities
(Laplacian and p-Laplacian bounds for the boundary distance, barrier and
inradius bounds, volume-element and tube-volume estimates, spectral-gap
estimates) on explicitly constructed one-parameter warped products with
radial density, certifies the curvature hypotheses numerically, and reports
signed margins.
"""

__version__ = "0.1.0"
