"""Perturbative expansions of the walk in a small parameter chi."""
