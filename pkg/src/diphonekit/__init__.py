"""Diphone inventories, coverage analysis and unit-selection command synthesis."""

__version__ = "0.1.0"
