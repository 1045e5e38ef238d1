"""Numerics for rank-two false theta functions and their companions."""

__version__ = "0.1.0"
