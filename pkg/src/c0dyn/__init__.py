"""Exact desk-scale instance of a C0 dynamical system with almost-invariant vectors."""

__version__ = "0.1.0"
