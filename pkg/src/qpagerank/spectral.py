"""Eigen-structure of the symmetric core T and of other normal matrices.

Everything downstream consumes eigenprojections and reduced resolvents, so
this module packages them once per decomposition.  Projections are formed
from orthonormal eigenvectors rather than contour integrals; the contour
version is kept as :func:`contour_projection` for cross-checks.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .graph import GoogleMatrix

logger = logging.getLogger(__name__)

CLUSTER_TOL = 1e-8


@dataclass(frozen=True)
class SymmetricCore:
    n: int
    entries: np.ndarray


@dataclass(frozen=True)
class SpectralData:
    """Distinct eigenvalues of a normal matrix with their spectral projectors.

    For a real symmetric input the eigenvalues are real and sorted in
    descending order.  ``vectors[h]`` holds an orthonormal basis of the h-th
    eigenspace, so ``projections[h] == vectors[h] @ vectors[h].conj().T``.
    """

    eigenvalues: np.ndarray
    multiplicities: tuple[int, ...]
    vectors: tuple[np.ndarray, ...]
    projections: tuple[np.ndarray, ...]
    reduced_resolvents: tuple[np.ndarray, ...]
    isolation: np.ndarray
    cluster_tol: float

    @property
    def s(self) -> int:
        return len(self.eigenvalues)

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]

    def index_of(self, value: complex, tol: float | None = None) -> int:
        tol = self.cluster_tol if tol is None else tol
        d = np.abs(self.eigenvalues - value)
        h = int(np.argmin(d))
        if d[h] > max(tol, 1e-12):
            raise KeyError(f"no eigenvalue within {tol} of {value}")
        return h

    def resolvent_power(self, h: int, k: int) -> np.ndarray:
        """S_h^(k): -P_h for k = 0 and S_h^k otherwise."""
        if k == 0:
            return -self.projections[h]
        return np.linalg.matrix_power(self.reduced_resolvents[h], k)


def build_t(G: GoogleMatrix | np.ndarray) -> SymmetricCore:
    M = G.entries if isinstance(G, GoogleMatrix) else np.asarray(G)
    T = np.sqrt(M) * np.sqrt(M.T)
    return SymmetricCore(M.shape[0], T)


def cluster_values(values: np.ndarray, tol: float) -> list[list[int]]:
    """Single-linkage clusters of (possibly complex) values at distance < tol."""
    values = np.asarray(values)
    n = len(values)
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in range(n):
        for b in range(a + 1, n):
            if abs(values[a] - values[b]) < tol:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[rb] = ra
    groups: dict[int, list[int]] = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(a)
    return list(groups.values())


def spectral_data_from_eig(
    values: np.ndarray,
    vectors: np.ndarray,
    cluster_tol: float = CLUSTER_TOL,
    exact: dict[int, complex] | None = None,
) -> SpectralData:
    """Cluster an orthonormal eigensystem of a normal matrix.

    Cluster representatives are the mean of the member eigenvalues.  Real
    inputs are ordered descending; complex inputs by (real, imag) descending.
    """
    values = np.asarray(values)
    groups = cluster_values(values, cluster_tol)
    reps = np.array([values[g].mean() for g in groups])
    if np.isrealobj(reps):
        order = np.argsort(-reps, kind="stable")
    else:
        order = np.lexsort((-reps.imag, -reps.real))
    groups = [groups[i] for i in order]
    reps = reps[order]
    vecs = tuple(vectors[:, g] for g in groups)
    projs = tuple(v @ v.conj().T for v in vecs)
    s = len(groups)
    dtype = np.result_type(reps, vectors)
    resolvents = []
    isolation = np.full(s, np.inf)
    for h in range(s):
        S = np.zeros_like(projs[0], dtype=dtype)
        for k in range(s):
            if k != h:
                S = S + projs[k] / (reps[k] - reps[h])
                isolation[h] = min(isolation[h], abs(reps[k] - reps[h]))
        resolvents.append(S)
    gaps = isolation[np.isfinite(isolation)]
    if len(gaps) and cluster_tol > 0.5 * gaps.min():
        warnings.warn(
            f"cluster_tol {cluster_tol:g} exceeds half the smallest gap {gaps.min():.3g}",
            stacklevel=2,
        )
    return SpectralData(
        eigenvalues=reps,
        multiplicities=tuple(len(g) for g in groups),
        vectors=vecs,
        projections=projs,
        reduced_resolvents=tuple(resolvents),
        isolation=isolation,
        cluster_tol=cluster_tol,
    )


def eigendecompose(T: SymmetricCore | np.ndarray, cluster_tol: float = CLUSTER_TOL) -> SpectralData:
    M = T.entries if isinstance(T, SymmetricCore) else np.asarray(T)
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    w, v = np.linalg.eigh(M)
    data = spectral_data_from_eig(w, v, cluster_tol)
    if np.any(data.eigenvalues < -1e-12):
        logger.info("symmetric core has negative eigenvalues: %s", data.eigenvalues[data.eigenvalues < 0])
    return data


def normalize_phase(v: np.ndarray) -> np.ndarray:
    """Rotate v so that its largest-magnitude entry is real and positive."""
    k = int(np.argmax(np.abs(v)))
    if v[k] == 0:
        return v
    return v * (abs(v[k]) / v[k])


def contour_projection(M: np.ndarray, center: complex, radius: float, nodes: int = 64) -> np.ndarray:
    """Trapezoidal -1/(2 pi i) \\oint (M - z)^{-1} dz on a circle."""
    n = M.shape[0]
    acc = np.zeros((n, n), dtype=complex)
    I = np.eye(n)
    for k in range(nodes):
        w = np.exp(2j * np.pi * k / nodes)
        z = center + radius * w
        acc += np.linalg.solve(M - z * I, I) * (radius * w)
    return -acc / nodes


def contour_reduced_resolvent(
    M: np.ndarray, center: complex, radius: float, nodes: int = 64
) -> np.ndarray:
    """Trapezoidal 1/(2 pi i) \\oint (z - center)^{-1} (M - z)^{-1} dz."""
    n = M.shape[0]
    acc = np.zeros((n, n), dtype=complex)
    I = np.eye(n)
    for k in range(nodes):
        w = np.exp(2j * np.pi * k / nodes)
        z = center + radius * w
        acc += np.linalg.solve(M - z * I, I)  # dz/(z-center) = i dtheta
    return acc / nodes
