"""Exact twisted invariants of groups: agrarian Betti numbers, torsion and norms."""

__version__ = "0.1.0"
