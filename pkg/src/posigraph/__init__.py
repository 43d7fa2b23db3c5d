"""Exact tools for positivity of graphs and uniform hypergraphs."""

__version__ = "0.1.0"
