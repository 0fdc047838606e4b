"""Schöning-walk 3-SAT toolkit with emulated partial Groverizations."""

__version__ = "0.1.0"
