"""Szegedy walk operators and the unperturbed quantum PageRank.

Basis convention: |j,k> (1-based) sits at index (j-1)*N + (k-1).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import schur
from scipy.optimize import linear_sum_assignment

from .errors import BoundUndefined, MatchingAmbiguity, NotInSubspace, ScaleError
from .graph import GoogleMatrix
from .spectral import CLUSTER_TOL, SpectralData, cluster_values

logger = logging.getLogger(__name__)

DEFAULT_DIM_CAP = 4096
Variant = Literal["paper", "norm"]


def psi_matrix(G: np.ndarray) -> np.ndarray:
    """Columns |psi_j> = |j> (x) sum_k sqrt(g_jk)|k>, as an N^2 x N array.

    Complex entries are allowed so the oracle can continue G off the real
    axis; the principal square root is used entrywise.
    """
    n = G.shape[0]
    A = np.zeros((n * n, n), dtype=np.result_type(G, float))
    for j in range(n):
        A[j * n : (j + 1) * n, j] = np.sqrt(G[j])
    return A


def swap_matrix(n: int) -> np.ndarray:
    S = np.zeros((n * n, n * n))
    idx = np.arange(n)
    for j in range(n):
        S[idx * n + j, j * n + idx] = 1.0
    return S


def swap_indices(n: int) -> np.ndarray:
    """Permutation p with (S_w x)[r] = x[p[r]]."""
    j, k = np.divmod(np.arange(n * n), n)
    return k * n + j


def walk_unitary(A: np.ndarray) -> np.ndarray:
    """U = S_w (2 A A^T - I); the plain transpose keeps it analytic in G."""
    dim = A.shape[0]
    n = A.shape[1]
    R = 2.0 * (A @ A.T) - np.eye(dim)
    return R[swap_indices(n)]


@dataclass(frozen=True)
class SzegedyOperators:
    n: int
    psi: np.ndarray
    B: np.ndarray
    S_w: np.ndarray
    U: np.ndarray


def build_walk(G: GoogleMatrix | np.ndarray, dim_cap: int = DEFAULT_DIM_CAP) -> SzegedyOperators:
    M = G.entries if isinstance(G, GoogleMatrix) else np.asarray(G, dtype=float)
    n = M.shape[0]
    if n * n > dim_cap:
        raise ScaleError(f"walk dimension {n * n} exceeds cap {dim_cap} (n <= {int(dim_cap ** 0.5)})")
    A = psi_matrix(M)
    B = A @ A.T
    S = swap_matrix(n)
    U = S @ (2.0 * B - np.eye(n * n))
    return SzegedyOperators(n, A, B, S, U)


@dataclass(frozen=True)
class WalkPair:
    mu: complex
    vec: np.ndarray
    origin_lambda: float | None
    branch: int  # +1, -1, or 0 for |lambda| = 1 and for complement vectors
    subspace: Literal["H_e", "complement"]


@dataclass(frozen=True)
class WalkSpectrum:
    n: int
    pairs: tuple[WalkPair, ...]
    hd_basis: np.ndarray
    cluster_tol: float
    he_index: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "he_index", tuple(i for i, p in enumerate(self.pairs) if p.subspace == "H_e")
        )

    @property
    def he_pairs(self) -> list[WalkPair]:
        return [self.pairs[i] for i in self.he_index]

    @property
    def he_mus(self) -> np.ndarray:
        return np.array([p.mu for p in self.he_pairs])

    @property
    def he_vectors(self) -> np.ndarray:
        return np.column_stack([p.vec for p in self.he_pairs])

    def he_projector(self) -> np.ndarray:
        V = self.he_vectors
        return V @ V.conj().T

    def all_mus(self) -> np.ndarray:
        return np.array([p.mu for p in self.pairs])

    def all_vectors(self) -> np.ndarray:
        return np.column_stack([p.vec for p in self.pairs])


def is_unit(lam: float, tol: float) -> bool:
    return abs(abs(lam) - 1.0) < tol


def mu_candidates(spec: SpectralData) -> list[tuple[complex, float, int]]:
    """(mu, origin lambda, branch) for every H_e slot, with multiplicity."""
    out = []
    for lam, m in zip(spec.eigenvalues, spec.multiplicities):
        lam = float(np.real(lam))
        if is_unit(lam, spec.cluster_tol):
            out += [(complex(np.sign(lam)), lam, 0)] * m
        else:
            root = np.sqrt(1.0 - lam * lam)
            out += [(complex(lam, root), lam, +1)] * m
            out += [(complex(lam, -root), lam, -1)] * m
    return out


def hd_basis(A: np.ndarray, rank: int) -> np.ndarray:
    """Orthonormal basis of span{A, S_w A} with a prescribed rank."""
    n = A.shape[1]
    M = np.hstack([A, A[swap_indices(n)]])
    Q, sv, _ = np.linalg.svd(M, full_matrices=False)
    return Q[:, :rank]


def he_eigenpairs(
    ops: SzegedyOperators,
    spec: SpectralData,
    with_complement: bool = True,
) -> WalkSpectrum:
    """Diagonalize U on H_d and tag each eigenvalue with its T origin."""
    tol = spec.cluster_tol
    cands = mu_candidates(spec)
    cand_mu = np.array([c[0] for c in cands])
    # distinct (lambda, branch) sources must not collide
    keys = [(round(c[1], 12), c[2]) for c in cands]
    for a in range(len(cands)):
        for b in range(a + 1, len(cands)):
            if keys[a] != keys[b] and abs(cand_mu[a] - cand_mu[b]) < tol and not (
                abs(cands[a][1] - cands[b][1]) < tol and cands[a][2] == cands[b][2]
            ):
                raise MatchingAmbiguity(
                    f"mu values {cand_mu[a]:.6g} and {cand_mu[b]:.6g} from distinct sources collide"
                )
    Q = hd_basis(ops.psi, len(cands))
    Ud = Q.conj().T @ ops.U @ Q
    Tform, Z = schur(Ud.astype(complex), output="complex")
    vals = np.diag(Tform)
    vecs = Q @ Z
    cost = np.abs(vals[:, None] - cand_mu[None, :])
    rows, cols = linear_sum_assignment(cost)
    worst = cost[rows, cols].max(initial=0.0)
    if worst > 1e-6:
        raise MatchingAmbiguity(f"restricted eigenvalue off its predicted value by {worst:.3e}")
    pairs = []
    for r, c in zip(rows, cols):
        mu, lam, branch = cands[c]
        v = vecs[:, r]
        v = v / np.linalg.norm(v)
        pairs.append(WalkPair(mu, v, lam, branch, "H_e"))
    pairs.sort(key=lambda p: (-p.origin_lambda, -p.branch, ))
    if with_complement:
        pairs += complement_pairs(ops.n, Q)
    return WalkSpectrum(ops.n, tuple(pairs), Q, tol)


def complement_pairs(n: int, hd: np.ndarray) -> list[WalkPair]:
    """Eigenbasis of U on the orthogonal complement of H_d, where U = -S_w."""
    dim = n * n
    perm = swap_indices(n)
    I = np.eye(dim)
    out = []
    for sign, mu in ((+1, -1.0), (-1, 1.0)):
        # symmetric vectors get -1, antisymmetric ones +1
        P = 0.5 * (I + sign * I[perm])
        P = P - hd @ (hd.conj().T @ P)
        w, v = np.linalg.eigh(0.5 * (P + P.conj().T))
        for k in np.where(w > 0.5)[0]:
            out.append(WalkPair(complex(mu), v[:, k].astype(complex), None, 0, "complement"))
    return out


def default_psi0(ops: SzegedyOperators) -> np.ndarray:
    """Uniform superposition (1/sqrt N) sum_j |psi_j>."""
    return ops.psi.sum(axis=1).astype(complex) / np.sqrt(ops.n)


def _check_psi0(ws: WalkSpectrum, psi0: np.ndarray, strict: bool = True) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex)
    if not strict:
        return psi0
    norm = np.linalg.norm(psi0)
    if abs(norm - 1.0) > 1e-8:
        raise NotInSubspace("initial state is not unit norm", abs(norm - 1.0))
    Q = ws.hd_basis
    residual = np.linalg.norm(psi0 - Q @ (Q.conj().T @ psi0))
    if residual > 1e-8:
        raise NotInSubspace("initial state does not lie in the dynamical subspace", residual)
    return psi0


def node_amplitudes(ws: WalkSpectrum, psi0: np.ndarray, m: int, strict: bool = True) -> np.ndarray:
    """Array a[j, i] = sum_{mu in H_e} mu^{2m} <j,i|mu><mu|psi0>.

    ``strict=False`` skips the membership check on psi0, which is only
    useful for probing states outside the dynamical subspace.
    """
    psi0 = _check_psi0(ws, psi0, strict)
    V = ws.he_vectors
    coef = (ws.he_mus ** (2 * m)) * (V.conj().T @ psi0)
    return (V @ coef).reshape(ws.n, ws.n)


def rank_from_amplitudes(amp: np.ndarray, variant: Variant) -> np.ndarray:
    if variant == "paper":
        return np.abs(amp.sum(axis=0)) ** 2
    if variant == "norm":
        return (np.abs(amp) ** 2).sum(axis=0)
    raise ValueError(f"unknown variant {variant!r}")


def quantum_pagerank_all(
    ws: WalkSpectrum, psi0: np.ndarray, m: int, variant: Variant = "paper", strict: bool = True
) -> np.ndarray:
    if m < 0:
        raise ValueError("time step m must be nonnegative")
    return rank_from_amplitudes(node_amplitudes(ws, psi0, m, strict), variant)


def quantum_pagerank(
    ws: WalkSpectrum, psi0: np.ndarray, i: int, m: int, variant: Variant = "paper", strict: bool = True
) -> float:
    """I_q(i, m) for 1-based node i."""
    return float(quantum_pagerank_all(ws, psi0, m, variant, strict)[i - 1])


def average_pagerank_all(ws: WalkSpectrum, psi0: np.ndarray, t: int, variant: Variant = "paper") -> np.ndarray:
    if t < 1:
        raise ValueError("averaging window t must be >= 1")
    psi0 = _check_psi0(ws, psi0)
    V = ws.he_vectors
    c = V.conj().T @ psi0
    powers = ws.he_mus[None, :] ** (2 * np.arange(t)[:, None])  # (t, p)
    amps = (powers * c[None, :]) @ V.T  # (t, n^2)
    amps = amps.reshape(t, ws.n, ws.n)
    if variant == "paper":
        vals = np.abs(amps.sum(axis=1)) ** 2
    elif variant == "norm":
        vals = (np.abs(amps) ** 2).sum(axis=1)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return vals.mean(axis=0)


def average_pagerank(ws: WalkSpectrum, psi0: np.ndarray, i: int, t: int, variant: Variant = "paper") -> float:
    return float(average_pagerank_all(ws, psi0, t, variant)[i - 1])


def _square_clusters(ws: WalkSpectrum) -> list[list[int]]:
    mus = ws.he_mus
    return cluster_values(mus**2, ws.cluster_tol)


def limit_pagerank_all(ws: WalkSpectrum, psi0: np.ndarray, variant: Variant = "paper") -> np.ndarray:
    """Long-time average; pairs are kept when their squared phases coincide."""
    psi0 = _check_psi0(ws, psi0)
    V = ws.he_vectors
    c = V.conj().T @ psi0
    out = np.zeros(ws.n)
    for group in _square_clusters(ws):
        # the surviving cross terms within one cluster form a single modulus
        block = (V[:, group] @ c[group]).reshape(ws.n, ws.n)
        out += rank_from_amplitudes(block, variant)
    return out


def limit_pagerank(ws: WalkSpectrum, psi0: np.ndarray, i: int, variant: Variant = "paper") -> float:
    return float(limit_pagerank_all(ws, psi0, variant)[i - 1])


def mixing_bound(ws: WalkSpectrum, psi0: np.ndarray, t: int) -> float:
    """sum over distinct mu_p != mu_q of 2 |<mu_p|psi0>|^2 / (t |mu_p - mu_q|)."""
    if t < 1:
        raise ValueError("averaging window t must be >= 1")
    psi0 = _check_psi0(ws, psi0)
    mus = ws.he_mus
    c2 = np.abs(ws.he_vectors.conj().T @ psi0) ** 2
    label = np.empty(len(mus), dtype=int)
    for g, members in enumerate(cluster_values(mus, ws.cluster_tol)):
        label[members] = g
    total = 0.0
    for p in range(len(mus)):
        for q in range(len(mus)):
            if label[p] == label[q]:
                continue
            gap = abs(mus[p] - mus[q])
            if gap == 0.0:
                raise BoundUndefined("distinct eigenvalue clusters with zero gap")
            total += 2.0 * c2[p] / (t * gap)
    return total


def mixing_bound_rigorous_all(
    ws: WalkSpectrum, psi0: np.ndarray, t: int, variant: Variant = "paper"
) -> np.ndarray:
    """Per-node bound on |average - limit| from the geometric-sum estimate.

    Each surviving cross term oscillates like (mu_p^2 conj(mu_q)^2)^m, whose
    running mean is at most 2 / (t |mu_p^2 - mu_q^2|) in modulus.
    """
    if t < 1:
        raise ValueError("averaging window t must be >= 1")
    psi0 = _check_psi0(ws, psi0)
    V = ws.he_vectors
    c = V.conj().T @ psi0
    mus2 = ws.he_mus**2
    label = np.empty(len(mus2), dtype=int)
    for g, members in enumerate(_square_clusters(ws)):
        label[members] = g
    comps = (V * c[None, :]).reshape(ws.n, ws.n, -1)  # [j, i, p]
    if variant == "paper":
        x = comps.sum(axis=0)  # [i, p]
        weight = np.abs(x[:, :, None] * np.conj(x[:, None, :]))
    elif variant == "norm":
        weight = np.abs(np.einsum("jip,jiq->ipq", comps, np.conj(comps)))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    gap = np.abs(mus2[:, None] - mus2[None, :])
    mask = label[:, None] != label[None, :]
    inv = np.where(mask, 2.0 / (t * np.where(mask, gap, 1.0)), 0.0)
    return (weight * inv[None, :, :]).sum(axis=(1, 2))


def diagonal_limit_all(ws: WalkSpectrum, psi0: np.ndarray, variant: Variant = "paper") -> np.ndarray:
    """Limit when every squared phase is simple: no cross terms survive."""
    psi0 = _check_psi0(ws, psi0)
    V = ws.he_vectors
    c = V.conj().T @ psi0
    out = np.zeros(ws.n)
    for p in range(V.shape[1]):
        out += rank_from_amplitudes((c[p] * V[:, p]).reshape(ws.n, ws.n), variant)
    return out
