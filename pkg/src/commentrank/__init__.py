"""Predict, rank and explain top comments in discussion threads."""

__version__ = "0.1.0"
