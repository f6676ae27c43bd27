"""Certified lower bounds on the convergence radius of the eigenvalue series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..graph import MatrixSeries
from ..szegedy import is_unit
from .tree import EigenvalueTree, TreeNode


def _first_crossing(coeffs: np.ndarray, level: float) -> float:
    """Smallest rho > 0 with sum_n coeffs[n] rho^n = level (coeffs >= 0, no constant)."""
    if not np.any(coeffs > 0):
        return math.inf

    def f(rho: float) -> float:
        return float(np.polyval(np.concatenate([coeffs[::-1], [0.0]]), rho)) - level

    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
    return brentq(f, 0.0, hi, xtol=1e-14, rtol=1e-14)


def entry_radii(gs: MatrixSeries, relative: bool = True) -> np.ndarray:
    """Per-entry radius where sum_n |g^(n)_ij| rho^n reaches g_ij (or 1)."""
    n = gs.n
    terms = np.stack([np.abs(gs.term(l)) for l in range(1, gs.order + 1)]) if gs.order else None
    out = np.full((n, n), math.inf)
    if terms is None:
        return out
    for i in range(n):
        for j in range(n):
            level = gs.base[i, j] if relative else 1.0
            out[i, j] = _first_crossing(terms[:, i, j], level)
    return out


@dataclass(frozen=True)
class RadiusEstimate:
    r_ij: np.ndarray  # relative criterion, binding
    r_ij_absolute: np.ndarray  # reported only
    r_h: tuple[float, ...]  # per distinct eigenvalue of T, root level
    r_leaf: tuple[float, ...]  # per tree leaf, minimum along its path
    varrho_leaf: tuple[float, ...]
    r1: float
    r2: float
    r0: float
    varrho: float

    @property
    def r_ij_min(self) -> float:
        return float(self.r_ij.min())

    @property
    def r_ij_absolute_min(self) -> float:
        return float(self.r_ij_absolute.min())

    def as_dict(self) -> dict:
        return {
            "r_ij_min": self.r_ij_min,
            "r_ij_absolute_min": self.r_ij_absolute_min,
            "r_h": list(self.r_h),
            "r1": self.r1,
            "r2": self.r2,
            "r0": self.r0,
            "varrho": self.varrho,
        }


def _leaf_crossing(leaf: TreeNode, root_value: float, K: int) -> float:
    """Smallest rho where |lam_h| + sum |lam^(n)| rho^n + Cauchy tail reaches 1."""
    r, rho_f = leaf.radius, leaf.varrho
    c = np.abs(leaf.lam_series.coeffs[1 : K + 1])
    base = abs(root_value)
    if not np.isfinite(r):
        return math.inf

    def f(rho: float) -> float:
        poly = float(np.polyval(np.concatenate([c[::-1], [0.0]]), rho))
        q = rho / r
        tail = rho_f * q ** (K + 1) / (1.0 - q)
        return base + poly + tail - 1.0

    hi = r * (1.0 - 1e-12)
    if f(hi) < 0:
        return r
    return brentq(f, 0.0, hi, xtol=1e-15, rtol=1e-13)


def convergence_radius(gs: MatrixSeries, tree: EigenvalueTree) -> RadiusEstimate:
    rel = entry_radii(gs, relative=True)
    ab = entry_radii(gs, relative=False)
    r_h = tuple(float(root.radius) for root in tree.roots)
    leaves = tree.leaves()
    r_leaf = tuple(float(l.radius) for l in leaves)
    varrho_leaf = tuple(float(l.varrho) for l in leaves)
    r1 = min([float(rel.min())] + list(r_leaf))
    crossings = []
    tol = tree.roots[0].spec.cluster_tol
    for leaf in leaves:
        lam0 = float(leaf.lam_series.coeffs[0])
        if is_unit(lam0, tol):
            continue
        crossings.append(_leaf_crossing(leaf, lam0, tree.K))
    r2 = min(crossings) if crossings else math.inf
    r0 = min(r1, r2)
    varrho = max(varrho_leaf) if varrho_leaf else 0.0
    return RadiusEstimate(rel, ab, r_h, r_leaf, varrho_leaf, r1, r2, r0, varrho)
