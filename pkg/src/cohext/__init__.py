"""Finite workbench for canonical extensions of distributive lattices and
coherent categories, type-space sites, and coherent-logic model checks."""

__version__ = "0.1.0"
