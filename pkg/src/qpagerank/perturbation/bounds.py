"""Geometric coefficient bounds |c_n| <= A B^(n-1) and their propagation.

A :class:`Majorant` (a0, A, B) certifies |c_0| <= a0 and |c_n| <= A B^(n-1)
for n >= 1, in any submultiplicative norm.  Each operation below returns a
majorant of the result built from the majorants of its inputs; the nonlinear
ones (square root, reciprocal, integer power) use a Cauchy estimate of the
dominating scalar function on a circle where it is still analytic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DELTA = 0.5  # free proof parameter for the square-root estimate


@dataclass(frozen=True)
class Majorant:
    a0: float
    A: float
    B: float

    def __post_init__(self) -> None:
        if min(self.a0, self.A, self.B) < 0 or not np.isfinite([self.a0, self.A]).all():
            raise ValueError(f"invalid majorant {self}")

    def bound(self, n: int) -> float:
        if n == 0:
            return self.a0
        if self.A == 0:
            return 0.0
        return self.A * self.B ** (n - 1)

    def bounds(self, K: int) -> np.ndarray:
        return np.array([self.bound(n) for n in range(K + 1)])

    def __add__(self, other: "Majorant") -> "Majorant":
        return Majorant(self.a0 + other.a0, self.A + other.A, max(self.B, other.B))

    def scale(self, s: float) -> "Majorant":
        s = abs(s)
        return Majorant(s * self.a0, s * self.A, self.B)

    def __mul__(self, other: "Majorant") -> "Majorant":
        A, B, a0 = self.A, self.B, self.a0
        A2, B2, b0 = other.A, other.B, other.a0
        if A == 0 or A2 == 0:
            return Majorant(a0 * b0, a0 * A2 + b0 * A, max(B, B2))
        # sum_k B^(k-1) B2^(n-1-k) <= beta^(n-2) with beta >= B + B2
        beta = max(B + B2, math.sqrt(A * A2))
        return Majorant(a0 * b0, a0 * A2 + b0 * A + A * A2 / beta, beta)

    def reciprocal(self, c0: complex) -> "Majorant":
        c = abs(c0)
        if c == 0:
            raise ZeroDivisionError("reciprocal of a series with zero constant term")
        a = self.A / c
        return Majorant(1.0 / c, a / c, self.B + a)

    def sqrt(self, c0: complex, delta: float = DELTA) -> "Majorant":
        c = abs(c0)
        if c == 0:
            raise ZeroDivisionError("square root at a zero constant term")
        a = self.A / c
        cd = 1.0 - math.sqrt(1.0 - delta)
        Bn = self.B + a / delta
        return Majorant(math.sqrt(c), math.sqrt(c) * cd * Bn if a > 0 else 0.0, Bn)

    def power(self, k: int) -> "Majorant":
        if k < 0:
            raise ValueError("negative power")
        if k == 0:
            return Majorant(1.0, 0.0, self.B)
        if self.A == 0:
            return Majorant(self.a0**k, 0.0, self.B)
        eps = (self.a0 if self.a0 > 0 else 1.0) / k
        Bn = self.B + self.A / eps
        An = ((self.a0 + eps) ** k - self.a0**k) * Bn
        return Majorant(self.a0**k, An, Bn)

    def derivative(self) -> "Majorant":
        # (n+1) A B^n <= (A e B) (e B)^(n-1) since n+1 <= e^n
        return Majorant(self.A, self.A * math.e * self.B, math.e * self.B)

    def radius(self) -> float:
        return math.inf if self.B == 0 or self.A == 0 else 1.0 / self.B

    def tail(self, chi: float, K: int) -> float:
        """sum_{n>K} A B^(n-1) |chi|^n, or inf when B |chi| >= 1."""
        x = abs(chi)
        if self.A == 0 or x == 0:
            return 0.0
        if self.B * x >= 1:
            return math.inf
        return self.A * self.B**K * x ** (K + 1) / (1.0 - self.B * x)


def envelope_from_norms(norms: np.ndarray, B: float) -> Majorant:
    """Smallest A with norms[n] <= A B^(n-1) for n >= 1 at a fixed B."""
    norms = np.asarray(norms, dtype=float)
    if len(norms) <= 1:
        return Majorant(float(norms[0]) if len(norms) else 0.0, 0.0, B)
    n = np.arange(1, len(norms))
    A = float(np.max(norms[1:] / B ** (n - 1)))
    return Majorant(float(norms[0]), A, B)


@dataclass
class BoundEntry:
    name: str
    majorant: Majorant
    provenance: str
    norms: np.ndarray | None = None

    @property
    def A(self) -> float:
        return self.majorant.A

    @property
    def B(self) -> float:
        return self.majorant.B

    def slack(self) -> np.ndarray:
        """bound - norm per order n >= 1 (nonnegative when the bound holds)."""
        if self.norms is None:
            return np.array([])
        K = len(self.norms) - 1
        return self.majorant.bounds(K)[1:] - self.norms[1:]

    @property
    def holds(self) -> bool:
        if self.norms is None:
            return True
        b = self.majorant.bounds(len(self.norms) - 1)[1:]
        return bool(np.all(self.norms[1:] <= b * (1 + 1e-9) + 1e-300))


@dataclass
class BoundLedger:
    entries: dict[str, BoundEntry] = field(default_factory=dict)

    def add(self, name: str, majorant: Majorant, provenance: str, norms=None) -> BoundEntry:
        e = BoundEntry(name, majorant, provenance, None if norms is None else np.asarray(norms, float))
        self.entries[name] = e
        return e

    def __getitem__(self, name: str) -> BoundEntry:
        return self.entries[name]

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def violations(self) -> list[str]:
        return [name for name, e in self.entries.items() if not e.holds]

    def as_dict(self) -> dict:
        out = {}
        for name, e in self.entries.items():
            out[name] = {
                "A": e.A,
                "B": e.B,
                "a0": e.majorant.a0,
                "provenance": e.provenance,
                "holds": e.holds,
            }
        return out


# ----------------------------------------------------------------- chain pieces


def entry_envelopes(terms: list[np.ndarray], B0: float, shape: tuple[int, int]) -> np.ndarray:
    """A0_ij = max_l |g^(l)_ij| / B0^(l-1); ``terms`` holds orders 1, 2, ..."""
    if not terms:
        return np.zeros(shape)
    stack = np.stack([np.abs(t) / B0**k for k, t in enumerate(terms)])
    return stack.max(axis=0)


def sqrt_entry_majorants(G: np.ndarray, A0: np.ndarray, B0: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-entry (A, B) for sqrt(g_ij(chi)); a0 = sqrt(g_ij)."""
    n = G.shape[0]
    A = np.zeros((n, n))
    B = np.full((n, n), B0)
    for i in range(n):
        for j in range(n):
            m = Majorant(G[i, j], A0[i, j], B0).sqrt(G[i, j])
            A[i, j], B[i, j] = m.A, m.B
    return A, B


def psi_majorant(G: np.ndarray, A0: np.ndarray, B0: float) -> Majorant:
    """Column norms of |psi_j^(l)>; also bounds the N^2 x N column matrix."""
    A, B = sqrt_entry_majorants(G, A0, B0)
    return Majorant(1.0, float(np.sqrt((A**2).sum(axis=1)).max()), float(B.max()))


def u_majorant(psi: Majorant) -> Majorant:
    """U^(n) = 2 S_w B^(n) with B(chi) = A(chi) A(chi)^T."""
    prod = Majorant(1.0, psi.A, psi.B) * Majorant(1.0, psi.A, psi.B)
    return Majorant(1.0, 2.0 * prod.A, prod.B)


def t_majorant(G: np.ndarray, A0: np.ndarray, B0: float) -> Majorant:
    """Entrywise product sqrt(g_ij) sqrt(g_ji), collected in the Frobenius norm."""
    A, B = sqrt_entry_majorants(G, A0, B0)
    n = G.shape[0]
    As = np.zeros((n, n))
    Bs = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            m = Majorant(math.sqrt(G[i, j]), A[i, j], B[i, j]) * Majorant(math.sqrt(G[j, i]), A[j, i], B[j, i])
            As[i, j], Bs[i, j] = m.A, m.B
    return Majorant(float(np.linalg.norm(np.sqrt(G * G.T), 2)), float(np.sqrt((As**2).sum())), float(Bs.max()))


def projection_majorant(A: float, B: float, d: float) -> Majorant:
    """Eigenprojection of a normal base with isolation d under ||X^(n)|| <= A B^(n-1)."""
    if A == 0 or not np.isfinite(d):
        return Majorant(1.0, 0.0, B)
    return Majorant(1.0, 2.0 * A / d, B + 2.0 * A / d)


def v_majorant(Q: Majorant) -> Majorant:
    """Solution of V' = Q V, V(0) = I: coefficients a (a+b)^(n-1)."""
    if Q.a0 == 0 and Q.A == 0:
        return Majorant(1.0, 0.0, Q.B)
    b = Q.B
    a = max(Q.a0, Q.A / b if b > 0 else math.inf)
    return Majorant(1.0, a, a + b)
