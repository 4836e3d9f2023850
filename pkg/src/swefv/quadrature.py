"""Gauss quadrature rules used by the spatial and temporal discretizations.

Two conventions live here on purpose:

* cell quadrature (Gauss-Legendre) is expressed in cell-size units on
  [-1/2, 1/2] with weights normalized to sum to 1, so a cell average is a
  plain weighted sum of point values;
* subtimenodes (Gauss-Lobatto) live on [0, 1] and include both endpoints,
  which is what the deferred-correction tableau construction expects.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes (offsets from the cell center, cell-size units) and weights."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def q(self):
        return len(self.nodes)


def gauss_legendre(q):
    """Gauss-Legendre rule with q points on [-1/2, 1/2], weights summing to 1.

    Exact for polynomials of degree <= 2q-1.
    """
    if not 1 <= q <= 8:
        raise ValueError(f"Gauss-Legendre point count must be in [1, 8], got {q}")
    x, w = legendre.leggauss(q)
    return QuadratureRule(nodes=x / 2.0, weights=w / 2.0)


def gauss_lobatto(n):
    """Gauss-Lobatto nodes on [0, 1]: endpoints plus the roots of P'_{n-1}."""
    if not 2 <= n <= 8:
        raise ValueError(f"Gauss-Lobatto point count must be in [2, 8], got {n}")
    if n == 2:
        return np.array([0.0, 1.0])
    p = legendre.Legendre.basis(n - 1)
    interior = p.deriv().roots().real
    nodes = np.concatenate(([-1.0], np.sort(interior), [1.0]))
    # map [-1, 1] -> [0, 1] and symmetrize against rounding in the root finder
    nodes = (nodes + 1.0) / 2.0
    return (nodes + (1.0 - nodes[::-1])) / 2.0
