"""Explicit lifts of (Z/2)^2 and (Z/2)^3 actions on the 2-adic open disk."""

__version__ = "0.1.0"
