"""Simulation laboratory for directed last-passage percolation on the planar lattice."""

__version__ = "0.1.0"

SCHEMA_VERSION = 1
