"""Computational laboratory for effective probabilistic Diophantine approximation."""

__version__ = "0.1.0"
