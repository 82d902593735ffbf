"""Finite metric Fraisse structures: amalgamation, approximate Ramsey checks, concentration."""

__version__ = "0.1.0"
