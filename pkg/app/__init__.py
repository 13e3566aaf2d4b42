"""Spectral limit laboratory: limit operators of contraction semigroups and their cogenerators."""

__version__ = "1.0.0"
