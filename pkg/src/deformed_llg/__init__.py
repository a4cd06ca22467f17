"""Deformed-calculus special functions and deformed LLG precession."""

__version__ = "0.1.0"
