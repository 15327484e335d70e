"""Relative train-track dynamics for free-group automorphisms."""

__version__ = "0.1.0"
