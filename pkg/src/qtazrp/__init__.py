"""Numerics for two-point correlations of the multi-species q-TAZRP.

Subpackages and modules
-----------------------
specfun   scalar special functions (q-series, incomplete gamma, C_n family)
contour   complex contour quadrature and the correlation kernel integrals
exact     assembly of the exact six-term two-point correlation
asym      large-L asymptotic evaluators and convergence-rate fits
sim       continuous-time Monte Carlo of the particle system (compiled kernel
          with pure-Python fallback) and the duality observable
cli       command-line interface
"""

__version__ = "0.1.0"
