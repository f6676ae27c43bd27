"""Quantum (Szegedy-walk) PageRank with analytic perturbation series."""

__version__ = "0.1.0"
