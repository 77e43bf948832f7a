"""Uniformly distributed sequences, refinements and their discrepancy."""

__version__ = "0.1.0"
