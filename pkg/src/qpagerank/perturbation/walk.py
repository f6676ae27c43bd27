"""Perturbation series on the walk side: mu(chi), walk projections, V(chi), N_q, I_q.

The walk eigenvectors in the dynamical subspace are tied to T through
|mu> = (a - mu S_w a) / sqrt(2 (1 - lam^2)) with a = A phi, where A holds the
|psi_j> columns and phi is a T eigenvector.  Summed over an orthonormal basis
of a T eigenprojection P_f(chi) this gives the walk eigenprojection

    E_f(chi) = (A - mu S_w A) P_f (A^T - mu^-1 A^T S_w) / (2 (1 - lam^2)),

analytic in chi, with E_f = A P_f A^T when lam = +-1.  Those projections,
together with the complement I - sum_f E_f, drive the transformation
function V(chi) and hence the eigenvector series.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from ..errors import BranchPointError
from ..series import Series, binom_half
from ..spectral import SpectralData, spectral_data_from_eig
from ..szegedy import WalkSpectrum, is_unit, swap_indices
from .kato import KatoExpansion
from .tree import EigenvalueTree, TreeNode

BRANCH_TOL = 1e-10


def mu_series(lam: Series, branch: int, K: int | None = None) -> Series:
    """mu(chi) = lam(chi) + branch * i * sqrt(1 - lam(chi)^2)."""
    K = lam.K if K is None else K
    lam = lam.truncate(K)
    lam0 = complex(lam.coeffs[0])
    if abs(lam0.imag) > 0 or abs(lam0.real) >= 1.0:
        raise BranchPointError(f"|lambda(0)| = {abs(lam0):.6g} is not below 1")
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    root = (1.0 - lam * lam).sqrt()
    return lam.astype(complex) + (1j * branch) * root


def mu_series_explicit(lam: Sequence[float], branch: int, K: int) -> np.ndarray:
    """Coefficients of mu(chi) from the nested composition sum.

    The sqrt(1 - z^2) derivatives come from the chain h(l(t)) with
    h(w) = sqrt(1 - w), l(t) = t^2; only parts of size 1 and 2 survive, and
    each part of size 1 contributes a factor lam(0).  Cost is exponential in
    K, so this is an independent check for low orders.
    """
    lam = [complex(x) for x in lam] + [0.0] * (K + 1)
    l0 = lam[0]
    base = 1.0 - l0 * l0
    out = [l0 + 1j * branch * np.sqrt(base)]
    for n in range(1, K + 1):
        total = 0.0
        for r in range(1, n + 1):
            outer = 0.0
            for rp in range(1, r + 1):
                inner = 0.0
                for parts in _compositions_12(r, rp):
                    ones = sum(1 for p in parts if p == 1)
                    inner += 2**rp * l0**ones / math.prod(math.factorial(p) for p in parts)
                outer += (-1) ** rp * binom_half(rp) * base ** (-(2 * rp - 1) / 2) * inner
            chain = sum(
                math.prod(lam[p] for p in ps) for ps in _compositions(n, r)
            )
            total += outer * chain
        out.append(lam[n] + 1j * branch * total)
    return np.array(out)


def _compositions(n: int, r: int):
    if r == 1:
        yield (n,)
        return
    for first in range(1, n - r + 2):
        for rest in _compositions(n - first, r - 1):
            yield (first,) + rest


def _compositions_12(n: int, r: int):
    for parts in itertools.product((1, 2), repeat=r):
        if sum(parts) == n:
            yield parts


def power_series_coefficients(mu: Series, k: int) -> Series:
    """a_1(n; m) for k = 2m: coefficients of mu(chi)^k."""
    return mu.power(k)


# ---------------------------------------------------------------- projections


def walk_spectral_data(ws: WalkSpectrum) -> SpectralData:
    """Cluster the full walk eigensystem, complement included."""
    return spectral_data_from_eig(ws.all_mus(), ws.all_vectors(), ws.cluster_tol)


def u_projection_series(uspec: SpectralData, us: Series, h: int, K: int) -> Series:
    """Expansion of the walk eigenprojection for cluster h of ``uspec``."""
    if K < 0:
        raise ValueError("order K must be nonnegative")
    return KatoExpansion(uspec, h, us.truncate(K)).projection


def q_series(projections: Sequence[Series]) -> Series:
    """Q(chi) = -sum_h P_h(chi) P_h'(chi); one order is lost to the derivative."""
    K = min(p.K for p in projections) - 1
    if K < 0:
        raise ValueError("projection series need order >= 1")
    total = None
    for P in projections:
        term = P.truncate(K) @ P.derivative()
        total = term if total is None else total + term
    return -total


def v_series(Q: Series, K: int | None = None) -> Series:
    """Solve V' = Q V, V(0) = I, coefficientwise."""
    K = Q.K + 1 if K is None else K
    if K > Q.K + 1:
        raise ValueError(f"Q has order {Q.K}; V can reach order {Q.K + 1}")
    dim = Q.shape[0]
    V = np.zeros((K + 1, dim, dim), dtype=np.result_type(Q.coeffs, float))
    V[0] = np.eye(dim)
    for n in range(1, K + 1):
        V[n] = sum(Q.coeffs[j] @ V[n - 1 - j] for j in range(n)) / n
    return Series(V)


def eigvec_series(V: Series, vec: np.ndarray) -> Series:
    return V @ np.asarray(vec)


# ---------------------------------------------------------------- expansion


@dataclass
class WalkBranch:
    """One analytic walk eigenvalue mu_f(chi) attached to a T tree leaf."""

    leaf: TreeNode
    branch: int  # +1, -1, or 0 when lam = +-1
    lam: Series
    mu: Series
    projection: Series  # E_f(chi), N^2 x N^2
    vectors: np.ndarray  # orthonormal unperturbed eigenvectors, N^2 x m

    @property
    def multiplicity(self) -> int:
        return self.vectors.shape[1]


@dataclass
class WalkExpansion:
    """Walk-side series derived from a T eigenvalue tree."""

    n: int
    K: int
    tree: EigenvalueTree
    psi: Series  # N^2 x N column series
    branches: list[WalkBranch] = field(default_factory=list)

    @cached_property
    def complement(self) -> Series:
        dim = self.n * self.n
        total = Series.constant(np.eye(dim, dtype=complex), self.K)
        for b in self.branches:
            total = total - b.projection
        return total

    @cached_property
    def family(self) -> list[Series]:
        return [b.projection for b in self.branches] + [self.complement]

    @cached_property
    def Q(self) -> Series:
        return q_series(self.family)

    @cached_property
    def V(self) -> Series:
        return v_series(self.Q, self.K)

    @cached_property
    def pairs(self) -> list[tuple[WalkBranch, Series]]:
        """(branch, |mu(chi)>) for every dynamical-subspace eigenvector."""
        out = []
        for b in self.branches:
            for k in range(b.multiplicity):
                out.append((b, eigvec_series(self.V, b.vectors[:, k])))
        return out

    def nq_components(self, psi0: np.ndarray, i: int, m: int) -> Series:
        """Per-j series of sum_mu mu^{2m} <j,i|mu(chi)><mu(chi)|psi0>.

        Assembled pair by pair as the triple convolution of the a_1 series,
        the overlap with psi0 and the (j, i) components.  Node i is 1-based.
        """
        if m < 0:
            raise ValueError("time step m must be nonnegative")
        psi0 = np.asarray(psi0, dtype=complex)
        n = self.n
        rows = (np.arange(n) * n + (i - 1))
        total = Series(np.zeros((self.K + 1, n), dtype=complex))
        cache: dict[int, Series] = {}
        for b, vec in self.pairs:
            key = id(b)
            if key not in cache:
                cache[key] = power_series_coefficients(b.mu, 2 * m)
            a1 = cache[key]
            overlap = Series(vec.coeffs.conj() @ psi0)
            comps = Series(vec.coeffs[:, rows])
            total = total + (a1 * overlap) * comps
        return total

    def nq_components_projection(self, psi0: np.ndarray, i: int, m: int) -> Series:
        """Same quantity through sum_f mu_f^{2m} E_f psi0, without eigenvectors."""
        psi0 = np.asarray(psi0, dtype=complex)
        n = self.n
        rows = (np.arange(n) * n + (i - 1))
        total = Series(np.zeros((self.K + 1, n), dtype=complex))
        for b in self.branches:
            a1 = b.mu.power(2 * m)
            total = total + a1 * Series(b.projection.coeffs[:, rows, :] @ psi0)
        return total


def nq_series(
    wx: WalkExpansion, psi0: np.ndarray, i: int, m: int, variant: str = "paper"
) -> Series:
    """N_q series: a scalar for 'paper', the per-j components for 'norm'."""
    comps = wx.nq_components(psi0, i, m)
    if variant == "paper":
        return Series(comps.coeffs.sum(axis=1))
    if variant == "norm":
        return comps
    raise ValueError(f"unknown variant {variant!r}")


def iq_series(nq: Series, K: int | None = None) -> Series:
    """I_q(chi) = N(chi) conj(N(conj chi)), summed over components if any."""
    K = nq.K if K is None else K
    nq = nq.truncate(K)
    prod = nq * nq.conj()
    c = prod.coeffs
    if c.ndim > 1:
        c = c.reshape(c.shape[0], -1).sum(axis=1)
    return Series(c)


def _unit_branch_ok(lam: Series) -> bool:
    return np.all(np.abs(lam.coeffs[1:]) < BRANCH_TOL)


def _leaf_basis(P0: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (P0 + P0.T))
    return v[:, w > 0.5]


def walk_expansion(tree: EigenvalueTree, psi: Series, K: int) -> WalkExpansion:
    """Attach walk eigenvalue branches to every leaf of a T eigenvalue tree.

    ``psi`` is the |psi_j(chi)> column series of order >= K.  Leaves with
    lam(0) = +-1 must stay on the unit circle: the square-root branch point
    there admits no series otherwise.
    """
    psi = psi.truncate(K)
    n = psi.shape[1]
    perm = swap_indices(n)
    A = psi
    SA = Series(psi.coeffs[:, perm, :])
    At = A.T
    AtS = SA.T  # (S A)^T = A^T S for the symmetric swap
    wx = WalkExpansion(n, K, tree, psi)
    for leaf in tree.leaves():
        lam = leaf.lam_series.truncate(K)
        P = leaf.projection.truncate(K)
        phi = _leaf_basis(P.coeffs[0])
        a = A.coeffs[0] @ phi
        lam0 = float(lam.coeffs[0])
        if is_unit(lam0, tree.roots[0].spec.cluster_tol):
            if not _unit_branch_ok(lam):
                bad = np.abs(lam.coeffs[1:]).max()
                raise BranchPointError(
                    f"eigenvalue {lam0:+.6g} of T leaves the unit circle "
                    f"(coefficient {bad:.3e}); the walk phase has a branch point"
                )
            E = (A @ P @ At).astype(complex)
            mu = Series.constant(complex(np.sign(lam0)), K)
            wx.branches.append(WalkBranch(leaf, 0, lam, mu, E, a.astype(complex)))
            continue
        weight = (2.0 * (1.0 - lam * lam)).reciprocal()
        for branch in (+1, -1):
            mu = mu_series(lam, branch, K)
            L = A - mu * SA
            R = At - mu.reciprocal() * AtS
            E = weight * (L @ P @ R)
            mu0 = mu.coeffs[0]
            vecs = (a - mu0 * a[perm]) / np.sqrt(2.0 * (1.0 - lam0 * lam0))
            wx.branches.append(WalkBranch(leaf, branch, lam, mu, E, vecs))
    return wx
