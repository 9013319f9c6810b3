"""Numerical verification toolkit for weighted Bergman spaces on the tube over the paraboloid."""

__version__ = "0.1.0"
