"""Solver and simulation toolkit for a monetary-search economy with banks."""

__version__ = "0.1.0"
