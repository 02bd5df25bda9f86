# Symmetric-top controllability toolkit
"""Lie-algebraic controllability checks and simulations for symmetric-top molecules."""

__version__ = "0.1.0"
