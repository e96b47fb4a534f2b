"""Differential invariants of infinite-dimensional Lie algebras by Taylor truncation."""

__version__ = "0.1.0"
