"""Brute-force reference values for the perturbation series.

Everything here is evaluated directly at a given chi: G(chi) by summing the
stored terms, then T(chi), U(chi) and the quantum PageRank from dense linear
algebra.  Complex chi is supported through the analytic continuation of each
object (plain transposes, principal square roots, and I_q(chi) =
N(chi) conj(N(conj chi))), which is what Cauchy coefficient extraction needs.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import schur
from scipy.optimize import linear_sum_assignment

from .errors import InadmissibleChi, MatchingAmbiguity
from .graph import MatrixSeries
from .spectral import SpectralData
from .szegedy import is_unit, psi_matrix, swap_indices, walk_unitary

ROW_TOL = 1e-10


def google_at(gs: MatrixSeries, chi: complex, check: bool = True) -> np.ndarray:
    G = gs.evaluate(chi)
    if check:
        if np.iscomplexobj(G) and np.abs(G.imag).max() == 0:
            G = G.real
        if not np.iscomplexobj(G):
            if np.any(G <= 0):
                raise InadmissibleChi(f"G(chi) has a nonpositive entry at chi = {chi}")
            if np.abs(G.sum(axis=1) - 1.0).max() > ROW_TOL:
                raise InadmissibleChi(f"G(chi) is not row stochastic at chi = {chi}")
    return G


def t_at(G: np.ndarray) -> np.ndarray:
    R = np.sqrt(G.astype(complex)) if np.iscomplexobj(G) else np.sqrt(G)
    return R * R.T


def swap_complement_basis(spec: SpectralData) -> np.ndarray:
    """T eigenvectors of the non-unit clusters, used to drop the redundant S_w A columns."""
    cols = [v for lam, v in zip(spec.eigenvalues, spec.vectors) if not is_unit(float(lam), spec.cluster_tol)]
    if not cols:
        return np.zeros((spec.dim, 0))
    return np.hstack(cols)


def dynamical_projector(A: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Bilinear projector onto span{A, S_w A C}; orthogonal for real chi."""
    n = A.shape[1]
    M = np.hstack([A, A[swap_indices(n)] @ C])
    return M @ np.linalg.solve(M.T @ M, M.T)


def nq_direct(
    gs: MatrixSeries, chi: complex, psi0: np.ndarray, i: int, m: int, C: np.ndarray
) -> np.ndarray:
    """Per-j amplitudes [U(chi)^{2m} Pi_e(chi) psi0]_(j,i)."""
    G = google_at(gs, chi)
    A = psi_matrix(G)
    U = walk_unitary(A)
    x = dynamical_projector(A, C) @ np.asarray(psi0, dtype=complex)
    x = np.linalg.matrix_power(U, 2 * m) @ x
    n = gs.n
    return x.reshape(n, n)[:, i - 1]


def iq_direct(
    gs: MatrixSeries,
    chi: complex,
    psi0: np.ndarray,
    i: int,
    m: int,
    C: np.ndarray,
    variant: str = "paper",
) -> complex:
    a = nq_direct(gs, chi, psi0, i, m, C)
    b = a if np.isreal(chi) else nq_direct(gs, np.conj(chi), psi0, i, m, C)
    if variant == "paper":
        return a.sum() * np.conj(b.sum())
    if variant == "norm":
        return (a * np.conj(b)).sum()
    raise ValueError(f"unknown variant {variant!r}")


@dataclass(frozen=True)
class OracleSample:
    chi: complex
    G_chi: np.ndarray
    T_chi: np.ndarray
    U_chi: np.ndarray
    mus: np.ndarray  # direct eigenvalues on the dynamical subspace, matched order
    iq_chi: dict[tuple[int, int], float] = field(default_factory=dict)


def match_eigenvalues(
    direct: np.ndarray, reference: np.ndarray, groups: Sequence[int] | None = None
) -> np.ndarray:
    """Permutation p with direct[p[k]] paired to reference[k].

    ``groups`` labels reference entries that are allowed to be confused
    (members of one degenerate cluster).  A runner-up from another group
    within 10% of the assigned distance is treated as ambiguous.
    """
    direct = np.asarray(direct)
    reference = np.asarray(reference)
    groups = np.arange(len(reference)) if groups is None else np.asarray(groups)
    cost = np.abs(reference[:, None] - direct[None, :])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(len(reference), dtype=int)
    perm[rows] = cols
    for k in range(len(reference)):
        d1 = cost[k, perm[k]]
        others = cost[groups != groups[k], perm[k]]
        if len(others) and d1 > 1e-12 and others.min() <= 1.1 * d1:
            raise MatchingAmbiguity(
                f"eigenvalue {direct[perm[k]]:.6g} is nearly as close to another cluster"
            )
    return perm


def evaluate_at(
    gs: MatrixSeries,
    chi: float,
    psi0: np.ndarray,
    nodes: Sequence[int],
    ms: Sequence[int],
    C: np.ndarray,
    reference_mus: np.ndarray,
    reference_groups: Sequence[int] | None = None,
    variant: str = "paper",
) -> OracleSample:
    """Direct evaluation at real chi with matched walk eigenvalues."""
    if np.iscomplexobj(chi) and np.imag(chi) != 0:
        raise InadmissibleChi("evaluate_at takes real chi; use iq_direct for complex samples")
    chi = float(np.real(chi))
    G = google_at(gs, chi)
    A = psi_matrix(G)
    U = walk_unitary(A)
    n = gs.n
    M = np.hstack([A, A[swap_indices(n)]])
    Q, _, _ = np.linalg.svd(M, full_matrices=False)
    Q = Q[:, : len(reference_mus)]
    Tf, _ = schur((Q.T @ U @ Q).astype(complex), output="complex")
    vals = np.diag(Tf)
    perm = match_eigenvalues(vals, reference_mus, reference_groups)
    iq = {}
    for i in nodes:
        for m in ms:
            iq[(i, m)] = float(np.real(iq_direct(gs, chi, psi0, i, m, C, variant)))
    return OracleSample(chi, G, t_at(G), U, vals[perm], iq)


@dataclass(frozen=True)
class CoefficientEstimate:
    value: complex
    error: float


def coeff_oracle(f: Callable[[complex], complex], n: int, M: int, rho: float) -> CoefficientEstimate:
    """n-th Taylor coefficient of f from M samples on |chi| = rho.

    The error estimate adds the largest high-frequency DFT term (a proxy for
    the aliased tail) and a rounding term.
    """
    if M < 4 * max(n, 1) or M & (M - 1):
        raise ValueError("M must be a power of two and at least 4n")
    if rho <= 0:
        raise ValueError("radius must be positive")
    z = rho * np.exp(2j * np.pi * np.arange(M) / M)
    samples = np.array([f(x) for x in z], dtype=complex)
    if not np.all(np.isfinite(samples)):
        raise InadmissibleChi("f is not finite on the sampling circle")
    b = np.fft.fft(samples) / M
    value = b[n] / rho**n
    alias = np.abs(b[M // 2 :]).max()
    rounding = 1e-15 * np.abs(samples).max() * np.sqrt(M)
    return CoefficientEstimate(complex(value), float((alias + rounding) / rho**n))


@dataclass
class TruncationRow:
    chi: float
    quantity: str
    oracle: float
    truncated: float
    abs_error: float
    tail_bound: float
    within_bound: bool


@dataclass
class TruncationReport:
    K: int
    rows: list[TruncationRow]

    @property
    def slope(self) -> float:
        return loglog_slope([r.chi for r in self.rows], [r.abs_error for r in self.rows])

    @property
    def all_within(self) -> bool:
        return all(r.within_bound for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["chi", "quantity", "oracle", "truncated", "abs_error", "tail_bound", "within_bound"])
        for r in self.rows:
            w.writerow(
                [
                    f"{r.chi:.17g}",
                    r.quantity,
                    f"{r.oracle:.17g}",
                    f"{r.truncated:.17g}",
                    f"{r.abs_error:.17g}",
                    f"{r.tail_bound:.17g}",
                    str(r.within_bound).lower(),
                ]
            )
        return buf.getvalue()


def loglog_slope(chis: Sequence[float], errors: Sequence[float], floor: float = 0.0) -> float:
    """Least-squares slope of log(error) against log(chi), skipping errors <= floor."""
    x = np.asarray(chis, dtype=float)
    y = np.asarray(errors, dtype=float)
    keep = y > floor
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def dyadic_grid(limit: float, points: int = 6, start: float = 0.1) -> list[float]:
    """chi = start * 2^-j for the first ``points`` values not exceeding ``limit``."""
    if not limit > 0:
        return []
    j = 0
    while start * 2.0**-j > limit:
        j += 1
    return [start * 2.0 ** -(j + k) for k in range(points)]


def compare_truncation(
    series_coeffs: np.ndarray,
    oracle_fn: Callable[[float], float],
    chi_grid: Sequence[float],
    K: int,
    tail: Callable[[float], float],
    quantity: str = "I_q",
    rounding: float = 0.0,
) -> TruncationReport:
    """Tabulate |oracle - truncated series| against the certified tail.

    ``rounding`` is an absolute allowance for floating-point noise in the
    two evaluations; a tail bound below it cannot be resolved.
    """
    coeffs = np.real(np.asarray(series_coeffs)[: K + 1])
    rows = []
    for chi in chi_grid:
        exact = float(np.real(oracle_fn(chi)))
        approx = float(np.polyval(coeffs[::-1], chi))
        err = abs(exact - approx)
        bound = tail(chi)
        rows.append(TruncationRow(chi, quantity, exact, approx, err, bound, bool(err <= bound + rounding)))
    return TruncationReport(K, rows)
