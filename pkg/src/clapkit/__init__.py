"""Exact-arithmetic workbench for promise CSP relaxations and the CLAP algorithm."""

__version__ = "0.1.0"
