"""Algebraic sieving for bounded-leaf subtree detection."""

__version__ = "0.1.0"
