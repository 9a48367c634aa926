"""Exact extremality testing for piecewise linear functions on group relaxations."""

__version__ = "0.1.0"
