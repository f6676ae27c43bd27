"""Residue-calculus expansions around one eigenvalue cluster of a normal matrix.

For M(chi) = M + sum_n chi^n X^(n) and a cluster with eigenvalue lam, the
projection and the reduced operator (M(chi) - lam) P(chi) expand as

    P^(n)  = -sum_p (-1)^p sum S^(k_1) X^(v_1) S^(k_2) ... X^(v_p) S^(k_{p+1})
    Tt^(n) = same words with k_1 + ... + k_{p+1} = p - 1

with v's summing to n, k's summing to p for P, S^(0) = -P and S^(k) = S^k.
Both sums are accumulated by a dynamic program over (order, excess) in the
eigenbasis of M, where every S^(k) is diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..series import Series, compositions, weak_compositions
from ..spectral import SpectralData


@dataclass
class KatoExpansion:
    """Expansion of cluster ``h`` of ``spec`` under the perturbation ``ops``.

    ``ops`` is a matrix series whose order-0 coefficient is ignored; its
    higher coefficients are X^(1..L).
    """

    spec: SpectralData
    h: int
    ops: Series

    def __post_init__(self) -> None:
        self.L = self.ops.K
        vecs = self.spec.vectors
        self.basis = np.hstack(vecs)
        self.unitary = np.iscomplexobj(self.basis)
        labels = np.concatenate([np.full(v.shape[1], c) for c, v in enumerate(vecs)])
        lam = self.spec.eigenvalues[self.h]
        self.lam = lam
        self.inside = labels == self.h
        diff = self.spec.eigenvalues[labels] - lam
        self.inv_gap = np.where(self.inside, 0.0, 1.0 / np.where(self.inside, 1.0, diff))
        self.multiplicity = int(self.inside.sum())
        dtype = np.result_type(self.basis, self.ops.coeffs, self.inv_gap)
        W = self.basis
        Wh = W.conj().T
        self.Xhat = [None] + [Wh @ self.ops.coeffs[n] @ W for n in range(1, self.L + 1)]
        self.dtype = dtype

    def s_diag(self, k: int) -> np.ndarray:
        if k == 0:
            return -self.inside.astype(float)
        return self.inv_gap**k

    @cached_property
    def _words(self) -> dict[tuple[int, int], np.ndarray]:
        d = self.basis.shape[1]
        W: dict[tuple[int, int], np.ndarray] = {(0, 0): np.eye(d, dtype=self.dtype)}
        # a prefix of order n can carry excess up to L - n, repaid later by
        # k = 0 blocks, so the table spans e in [-n, L - n]
        for n in range(1, self.L + 1):
            for e in range(-n, self.L - n + 1):
                acc = np.zeros((d, d), dtype=self.dtype)
                hit = False
                for v in range(1, n + 1):
                    rest = n - v
                    for k in range(0, self.L - v + 2):
                        key = (rest, e - k + 1)
                        if key not in W:
                            continue
                        acc -= self.Xhat[v] @ (self.s_diag(k)[:, None] * W[key])
                        hit = True
                if hit:
                    W[(n, e)] = acc
        return W

    def _assemble(self, offset: int) -> np.ndarray:
        words = self._words
        d = self.basis.shape[1]
        out = np.zeros((self.L + 1, d, d), dtype=self.dtype)
        for n in range(self.L + 1):
            for k1 in range(0, n + 2):
                key = (n, -k1 - offset)
                if key in words:
                    out[n] -= self.s_diag(k1)[:, None] * words[key]
        W = self.basis
        return np.stack([W @ c @ W.conj().T for c in out])

    @cached_property
    def projection(self) -> Series:
        """P(chi) with P(0) the unperturbed eigenprojection."""
        return Series(self._clean(self._assemble(0)))

    @cached_property
    def reduced_operator(self) -> Series:
        """(M(chi) - lam) P(chi); its constant term vanishes."""
        return Series(self._clean(self._assemble(1)))

    @cached_property
    def mean_eigenvalue(self) -> Series:
        """Weighted mean of the cluster's perturbed eigenvalues."""
        tr = self.reduced_operator.trace().coeffs / self.multiplicity
        tr = np.array(tr, dtype=np.result_type(tr, self.lam))
        tr[0] = self.lam
        return Series(self._clean(tr))

    def _clean(self, arr: np.ndarray) -> np.ndarray:
        if not self.unitary and not np.iscomplexobj(self.ops.coeffs):
            return np.real(arr)
        return arr


def eigenvalue_trace_formula(spec: SpectralData, h: int, ops: Series, K: int) -> Series:
    """Mean-eigenvalue coefficients by literal enumeration of the trace sum.

    lam^(n) = (1/m) sum_p ((-1)^p / p) sum tr[X^(v_1) S^(k_1) ... X^(v_p) S^(k_p)]
    over v's summing to n and k's summing to p - 1.  Exponential cost; meant
    for small K and as an independent check of :class:`KatoExpansion`.
    """
    m = spec.multiplicities[h]
    lam = spec.eigenvalues[h]
    cache: dict[int, np.ndarray] = {}

    def S(k: int) -> np.ndarray:
        if k not in cache:
            cache[k] = spec.resolvent_power(h, k)
        return cache[k]

    out = [lam]
    for n in range(1, K + 1):
        total = 0.0
        for p in range(1, n + 1):
            inner = 0.0
            for vs in compositions(n, p):
                for ks in weak_compositions(p - 1, p):
                    prod = np.eye(spec.dim)
                    for v, k in zip(vs, ks):
                        prod = prod @ ops.coeffs[v] @ S(k)
                    inner += np.trace(prod)
            total += (-1) ** p / p * inner
        out.append(total / m)
    return Series(np.array(out))
