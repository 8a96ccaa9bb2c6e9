"""Coherent-logic frontend: syntax, parser, chase, and model families."""
