"""Runge-Kutta discontinuous Galerkin solver for two hyperbolic systems
coupled across a fixed interface, with a relaxation-based interface Riemann
solver used in the discrete relaxation limit."""

__version__ = "0.1.0"
