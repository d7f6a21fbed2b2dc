"""Noether point symmetries of the constant-volume minimal-surface Lagrangian."""

__version__ = "0.1.0"
