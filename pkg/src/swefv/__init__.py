"""Fifth-order finite-volume shallow-water solver on structured 2D grids.

Spatial discretization: WENO5 reconstruction with four-point Gauss-Legendre
edge quadrature, blended edge-wise with a fully well-balanced flux/source pair
so that both still-water and moving 1D equilibria over topography are kept to
machine precision. Time integration: modified-Patankar deferred correction
(mPDeC), which is arbitrarily high order, conservative, and keeps the water
height nonnegative for any time step.
"""

__version__ = "0.1.0"
