"""Truncated power series with scalar, vector or matrix coefficients.

A :class:`Series` stores coefficients c_0..c_K stacked along axis 0, so a
matrix series has ``coeffs.shape == (K + 1, rows, cols)``.  Products are
Cauchy convolutions cut at the smaller truncation order of the operands.
"""

from __future__ import annotations

from math import comb
from typing import Callable, Sequence

import numpy as np


def binom_half(r: int) -> float:
    """Generalized binomial coefficient C(1/2, r)."""
    out = 1.0
    for k in range(r):
        out *= (0.5 - k) / (k + 1)
    return out


class Series:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs)
        if coeffs.ndim == 0:
            coeffs = coeffs.reshape(1)
        self.coeffs = coeffs

    # construction ---------------------------------------------------------
    @classmethod
    def constant(cls, value, K: int) -> "Series":
        value = np.asarray(value)
        c = np.zeros((K + 1,) + value.shape, dtype=np.result_type(value, float))
        c[0] = value
        return cls(c)

    @classmethod
    def from_terms(cls, terms: Sequence, K: int | None = None) -> "Series":
        """Series with coefficients ``terms`` padded with zeros up to order K."""
        terms = [np.asarray(t) for t in terms]
        K = len(terms) - 1 if K is None else K
        dtype = np.result_type(*terms, float)
        c = np.zeros((K + 1,) + terms[0].shape, dtype=dtype)
        for n, t in enumerate(terms[: K + 1]):
            c[n] = t
        return cls(c)

    @classmethod
    def identity(cls, dim: int, K: int) -> "Series":
        return cls.constant(np.eye(dim), K)

    # basic properties -----------------------------------------------------
    @property
    def K(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:]

    def __getitem__(self, n: int):
        return self.coeffs[n]

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def __repr__(self) -> str:
        return f"Series(K={self.K}, shape={self.shape}, dtype={self.coeffs.dtype})"

    def copy(self) -> "Series":
        return Series(self.coeffs.copy())

    def truncate(self, K: int) -> "Series":
        if K > self.K:
            pad = np.zeros((K - self.K,) + self.shape, dtype=self.coeffs.dtype)
            return Series(np.concatenate([self.coeffs, pad]))
        return Series(self.coeffs[: K + 1])

    def evaluate(self, chi):
        """Horner evaluation of the truncated polynomial."""
        out = np.zeros(self.shape, dtype=np.result_type(self.coeffs, chi))
        for c in self.coeffs[::-1]:
            out = out * chi + c
        return out

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Series":
        return Series(np.stack([fn(c) for c in self.coeffs]))

    def conj(self) -> "Series":
        """Conjugate the coefficients (the analytic continuation of a bra)."""
        return Series(np.conj(self.coeffs))

    @property
    def T(self) -> "Series":
        return Series(np.swapaxes(self.coeffs, -1, -2))

    @property
    def H(self) -> "Series":
        return Series(np.conj(np.swapaxes(self.coeffs, -1, -2)))

    def trace(self) -> "Series":
        return Series(np.trace(self.coeffs, axis1=-2, axis2=-1))

    def norms(self, ord=2) -> np.ndarray:
        """Per-coefficient norm: spectral for matrices, Euclidean for vectors."""
        c = self.coeffs
        if c.ndim == 1:
            return np.abs(c)
        if c.ndim == 2:
            return np.linalg.norm(c, axis=1)
        return np.array([np.linalg.norm(x, ord) for x in c])

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other) -> "Series":
        return other if isinstance(other, Series) else Series.constant(other, self.K)

    def __add__(self, other) -> "Series":
        other = self._coerce(other)
        K = min(self.K, other.K)
        return Series(self.coeffs[: K + 1] + other.coeffs[: K + 1])

    __radd__ = __add__

    def __neg__(self) -> "Series":
        return Series(-self.coeffs)

    def __sub__(self, other) -> "Series":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Series":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Series":
        if isinstance(other, Series):
            return cauchy(self, other, np.multiply)
        return Series(self.coeffs * other)

    def __rmul__(self, other) -> "Series":
        if isinstance(other, Series):
            return cauchy(other, self, np.multiply)
        return Series(other * self.coeffs)

    def __truediv__(self, scalar) -> "Series":
        return Series(self.coeffs / scalar)

    def __matmul__(self, other) -> "Series":
        if isinstance(other, Series):
            return cauchy(self, other, np.matmul)
        return Series(self.coeffs @ other)

    def __rmatmul__(self, other) -> "Series":
        return Series(np.asarray(other) @ self.coeffs)

    def times_chi(self, k: int = 1) -> "Series":
        """Multiply by chi**k, keeping the truncation order."""
        pad = np.zeros((k,) + self.shape, dtype=self.coeffs.dtype)
        return Series(np.concatenate([pad, self.coeffs])[: self.K + 1])

    def over_chi(self, k: int = 1, atol: float = 0.0) -> "Series":
        """Divide by chi**k; the dropped low coefficients must vanish.

        The result loses k orders of truncation.
        """
        lead = np.abs(self.coeffs[:k]).max(initial=0.0)
        if lead > atol:
            raise ValueError(f"cannot divide by chi^{k}: leading coefficient {lead:.3e}")
        return Series(self.coeffs[k:])

    def derivative(self) -> "Series":
        n = np.arange(1, self.K + 1).reshape((-1,) + (1,) * len(self.shape))
        return Series(self.coeffs[1:] * n)

    # elementwise nonlinear maps -----------------------------------------
    def reciprocal(self) -> "Series":
        """Elementwise 1/f, requires a nonzero constant term."""
        c = self.coeffs
        out = np.zeros_like(c, dtype=np.result_type(c, float))
        out[0] = 1.0 / c[0]
        for n in range(1, self.K + 1):
            acc = sum(c[k] * out[n - k] for k in range(1, n + 1))
            out[n] = -acc * out[0]
        return Series(out)

    def sqrt(self) -> "Series":
        """Elementwise principal square root by the recursion s*s = f."""
        c = self.coeffs
        out = np.zeros_like(c, dtype=np.result_type(c, float))
        out[0] = np.sqrt(c[0])
        for n in range(1, self.K + 1):
            acc = sum(out[k] * out[n - k] for k in range(1, n))
            out[n] = (c[n] - acc) / (2 * out[0])
        return Series(out)

    def power(self, k: int) -> "Series":
        """Integer power by binary exponentiation of Cauchy products."""
        if k < 0:
            return self.reciprocal().power(-k)
        result = Series.constant(np.ones(self.shape, dtype=self.coeffs.dtype), self.K)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def mat_power(self, k: int) -> "Series":
        if k < 0:
            raise ValueError("negative matrix power")
        result = Series.identity(self.shape[0], self.K).astype(self.coeffs.dtype)
        base = self
        while k:
            if k & 1:
                result = result @ base
            k >>= 1
            if k:
                base = base @ base
        return result

    def astype(self, dtype) -> "Series":
        return Series(self.coeffs.astype(dtype))


def cauchy(a: Series, b: Series, op) -> Series:
    K = min(a.K, b.K)
    first = op(a.coeffs[0], b.coeffs[0])
    out = np.zeros((K + 1,) + np.shape(first), dtype=np.result_type(a.coeffs, b.coeffs))
    for n in range(K + 1):
        for k in range(n + 1):
            out[n] += op(a.coeffs[k], b.coeffs[n - k])
    return Series(out)


def compositions(n: int, r: int):
    """Yield all r-tuples of positive integers summing to n."""
    if r == 1:
        if n >= 1:
            yield (n,)
        return
    for first in range(1, n - r + 2):
        for rest in compositions(n - first, r - 1):
            yield (first,) + rest


def weak_compositions(n: int, r: int):
    """Yield all r-tuples of nonnegative integers summing to n."""
    if r == 0:
        if n == 0:
            yield ()
        return
    if r == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in weak_compositions(n - first, r - 1):
            yield (first,) + rest


def sqrt_series(g: float, deltas: Sequence[float], K: int) -> Series:
    """Coefficients of sqrt(g + sum_n deltas[n-1] chi^n) up to order K.

    Uses the binomial composition sum
        sqrt(g) * sum_r C(1/2, r) * sum_{p_1+..+p_r = n} prod_i g^(p_i)/g,
    evaluated through powers of the relative increment series.
    """
    g_arr = np.asarray(g)
    if np.isrealobj(g_arr) and g <= 0:
        raise ValueError(f"square root base must be positive, got {g}")
    ratio = np.zeros(K + 1, dtype=np.result_type(g_arr, np.asarray(deltas, dtype=float)))
    for n, d in enumerate(deltas[:K], start=1):
        ratio[n] = d / g
    x = Series(ratio)
    out = np.zeros(K + 1, dtype=ratio.dtype)
    out[0] = 1.0
    xr = Series.constant(1.0, K).astype(ratio.dtype)
    for r in range(1, K + 1):
        xr = xr * x  # x^r starts at order r
        out += binom_half(r) * xr.coeffs
    return Series(np.sqrt(g) * out)


def sqrt_series_explicit(g: float, deltas: Sequence[float], K: int) -> Series:
    """Same series by literal enumeration of compositions (slow, small K)."""
    d = list(deltas) + [0.0] * K
    out = [np.sqrt(g)]
    for n in range(1, K + 1):
        total = 0.0
        for r in range(1, n + 1):
            s = sum(np.prod([d[p - 1] / g for p in comp]) for comp in compositions(n, r))
            total += binom_half(r) * s
        out.append(np.sqrt(g) * total)
    return Series(np.array(out))


def binomial_power_coefficient(mu: complex, mus: Sequence[complex], k: int, n: int) -> complex:
    """Coefficient of chi^n in (mu + sum_p mus[p-1] chi^p)^k by composition sums."""
    if n == 0:
        return mu**k
    mus = list(mus) + [0.0] * n
    total = 0j
    for r in range(1, min(k, n) + 1):
        s = sum(np.prod([mus[p - 1] for p in comp]) for comp in compositions(n, r))
        total += comb(k, r) * mu ** (-r) * s
    return mu**k * total
