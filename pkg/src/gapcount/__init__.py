"""Spectral laboratory for eigenvalues in the gaps of magnetic Schrodinger operators."""

__version__ = "0.1.0"
