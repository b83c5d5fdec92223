"""Symmetric periodic orbits of the n-body problem and their stability indicators."""
__version__ = "0.1.0"
