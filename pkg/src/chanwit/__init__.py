"""Witnesses for random-unitary and random-projective quantum channels."""

__version__ = "0.1.0"
