"""Series for sqrt(G), T, the psi-vectors and the walk unitary U."""

from __future__ import annotations

import numpy as np

from ..errors import InadmissiblePerturbation
from ..graph import MatrixSeries
from ..series import Series, binom_half
from ..szegedy import swap_indices


def g_series(gs: MatrixSeries, K: int) -> Series:
    return Series(np.stack([gs.term(l) for l in range(K + 1)]))


def _require_positive(gs: MatrixSeries) -> None:
    if np.any(gs.base <= 0):
        i, j = np.argwhere(gs.base <= 0)[0]
        raise InadmissiblePerturbation(
            f"base entry g[{i + 1},{j + 1}] = {gs.base[i, j]} is not positive"
        )


def sqrt_entries(gs: MatrixSeries, K: int) -> Series:
    """Entrywise sqrt(g_jk(chi)) through the binomial composition sum."""
    _require_positive(gs)
    G = gs.base
    rel = g_series(gs, K).coeffs / G
    rel[0] = 0.0
    x = Series(rel)
    acc = np.zeros_like(rel)
    acc[0] = 1.0
    xr = Series.constant(np.ones_like(G), K)
    for r in range(1, K + 1):
        xr = xr * x
        acc += binom_half(r) * xr.coeffs
    return Series(np.sqrt(G) * acc)


def psi_series(gs: MatrixSeries, K: int) -> Series:
    """Columns |psi_j(chi)>, stacked as an N^2 x N matrix series."""
    root = sqrt_entries(gs, K).coeffs
    n = gs.n
    out = np.zeros((K + 1, n * n, n))
    for j in range(n):
        out[:, j * n : (j + 1) * n, j] = root[:, j, :]
    return Series(out)


def t_series(gs: MatrixSeries, K: int) -> Series:
    root = sqrt_entries(gs, K)
    return root * root.T


def t_series_three_part(gs: MatrixSeries, K: int) -> Series:
    """T^(n) assembled as I_1 + I_2 + I_3 from relative root coefficients.

    With rho_ij(n) the n-th coefficient of sqrt(1 + (g_ij(chi) - g_ij)/g_ij):
    I_1 = t rho_ji(n), I_2 = t sum_{k=1}^{n-1} rho_ij(k) rho_ji(n-k),
    I_3 = t rho_ij(n).
    """
    _require_positive(gs)
    rho = sqrt_entries(gs, K).coeffs / np.sqrt(gs.base)
    T = np.sqrt(gs.base * gs.base.T)
    out = np.zeros((K + 1,) + T.shape)
    out[0] = T
    for n in range(1, K + 1):
        I1 = T * rho[n].T
        I2 = T * sum((rho[k] * rho[n - k].T for k in range(1, n)), np.zeros_like(T))
        I3 = T * rho[n]
        out[n] = I1 + I2 + I3
    return Series(out)


def t_first_order(gs: MatrixSeries) -> np.ndarray:
    """t_ij^(1) = (g_ij^(1) g_ji + g_ji^(1) g_ij) / (2 t_ij)."""
    G, G1 = gs.base, gs.term(1)
    T = np.sqrt(G * G.T)
    return (G1 * G.T + G1.T * G) / (2.0 * T)


def b_series(psi: Series) -> Series:
    """B(chi) = sum_j |psi_j(chi)><psi_j(chi)|, continued analytically (no conjugation)."""
    return psi @ psi.T


def u_series(gs: MatrixSeries, K: int) -> Series:
    psi = psi_series(gs, K)
    B = b_series(psi)
    perm = swap_indices(gs.n)
    U = 2.0 * B.coeffs[:, perm, :]
    U[0] -= np.eye(gs.n * gs.n)[perm]
    return Series(U)
