"""Simulation lab for persistent belief dispersion, misallocation and exploration."""

__version__ = "0.1.0"
