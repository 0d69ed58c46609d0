"""Exact Hochschild homology, cyclic complexes and transfers of cdgas over Q."""

__version__ = "0.1.0"
