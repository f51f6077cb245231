"""Finite-window numerics for the infinite-dimensional symplectic group."""

__version__ = "0.1.0"
