"""Numerical toolkit for Hilbert modular Eisenstein series, Hecke L-functions
and equidistribution of holomorphic Hecke eigenforms."""

__version__ = "0.1.0"
