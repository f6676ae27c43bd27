"""Directed graphs, Google matrices and the classical PageRank baseline."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConvergenceError,
    DuplicateEdge,
    EmptyGraph,
    HeaderMismatch,
    InadmissiblePerturbation,
    InvalidParameter,
    MalformedLine,
)

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-12
_HEADER = re.compile(r"^nodes\s*:\s*(\S+)\s*$", re.IGNORECASE)


@dataclass(frozen=True)
class DirectedGraph:
    """Node count plus a set of 1-based ordered edges."""

    n: int
    edges: frozenset[tuple[int, int]]
    out_degree: tuple[int, ...] = field(init=False)
    dangling: tuple[bool, ...] = field(init=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise EmptyGraph("graph has no nodes")
        deg = [0] * self.n
        for i, j in self.edges:
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise InvalidParameter(f"edge ({i},{j}) outside [1,{self.n}]")
            deg[i - 1] += 1
        object.__setattr__(self, "out_degree", tuple(deg))
        object.__setattr__(self, "dangling", tuple(d == 0 for d in deg))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "DirectedGraph":
        edges = list(edges)
        unique = frozenset(edges)
        if len(unique) != len(edges):
            raise DuplicateEdge("duplicate edge in edge iterable")
        return cls(n, unique)

    def relabel(self, perm: Sequence[int]) -> "DirectedGraph":
        """Return the graph with node i renamed perm[i-1] (both 1-based)."""
        return DirectedGraph(
            self.n, frozenset((perm[i - 1], perm[j - 1]) for i, j in self.edges)
        )


@dataclass(frozen=True)
class GoogleMatrix:
    n: int
    alpha: float
    v: np.ndarray
    entries: np.ndarray

    def __post_init__(self) -> None:
        self.entries.setflags(write=False)
        self.v.setflags(write=False)


@dataclass(frozen=True)
class MatrixSeries:
    """G(chi) = base + sum_l chi^l terms[l-1], with a geometric envelope.

    ``bound_A0`` and ``bound_B0`` satisfy ||terms[l-1]||_2 <= A0 * B0**(l-1).
    """

    base: np.ndarray
    terms: tuple[np.ndarray, ...]
    bound_A0: float
    bound_B0: float

    def __post_init__(self) -> None:
        n = self.base.shape[0]
        for l, term in enumerate(self.terms, start=1):
            if term.shape != (n, n):
                raise InadmissiblePerturbation(f"order {l} term has shape {term.shape}")
            if not np.all(np.isfinite(term)):
                raise InadmissiblePerturbation(f"order {l} term is not finite")
            bad = np.abs(term.sum(axis=1)).max(initial=0.0)
            if bad > ROW_SUM_TOL:
                raise InadmissiblePerturbation(
                    f"order {l} rows must sum to 0 (max deviation {bad:.3e})"
                )
            norm = np.linalg.norm(term, 2)
            allowed = self.bound_A0 * self.bound_B0 ** (l - 1)
            if norm > allowed * (1 + 1e-12) + 1e-15:
                raise InadmissiblePerturbation(
                    f"||G^({l})|| = {norm:.6g} exceeds A0*B0^(l-1) = {allowed:.6g}"
                )
        if self.bound_A0 < 0 or self.bound_B0 <= 0:
            raise InadmissiblePerturbation("A0 must be >= 0 and B0 > 0")

    @classmethod
    def build(
        cls,
        base: np.ndarray,
        terms: Sequence[np.ndarray],
        A0: float | None = None,
        B0: float | None = None,
    ) -> "MatrixSeries":
        """Attach terms to ``base``; missing envelope constants are fitted.

        The fit takes the smallest admissible B0 >= 1 (which is 1 for a finite
        list of terms) and then the smallest A0.
        """
        terms = tuple(np.array(t, dtype=float) for t in terms)
        if B0 is None:
            B0 = 1.0
        if A0 is None:
            A0 = max(
                (np.linalg.norm(t, 2) / B0 ** (l - 1) for l, t in enumerate(terms, 1)),
                default=0.0,
            )
        return cls(np.array(base, dtype=float), terms, float(A0), float(B0))

    @property
    def n(self) -> int:
        return self.base.shape[0]

    @property
    def order(self) -> int:
        return len(self.terms)

    def term(self, l: int) -> np.ndarray:
        if l == 0:
            return self.base
        if l <= len(self.terms):
            return self.terms[l - 1]
        return np.zeros_like(self.base)

    def is_zero(self) -> bool:
        return all(not np.any(t) for t in self.terms)

    def evaluate(self, chi: complex) -> np.ndarray:
        out = np.array(self.base, dtype=complex if np.iscomplexobj(chi) else float)
        power = 1.0
        for t in self.terms:
            power = power * chi
            out = out + power * t
        return out


def load_edge_list(text: str) -> DirectedGraph:
    """Parse "src<TAB>dst" lines, "#" comments and an optional "nodes: N" header."""
    declared: int | None = None
    edges: dict[tuple[int, int], int] = {}
    seen_content = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        header = _HEADER.match(line)
        if header:
            if seen_content or declared is not None:
                raise MalformedLine("header must be the first entry", lineno)
            try:
                declared = int(header.group(1))
            except ValueError:
                raise MalformedLine(f"bad node count {header.group(1)!r}", lineno) from None
            if declared < 1:
                raise EmptyGraph("header declares zero nodes", lineno)
            seen_content = True
            continue
        seen_content = True
        parts = line.split("\t") if "\t" in line else line.split()
        parts = [p.strip() for p in parts]
        if len(parts) != 2:
            raise MalformedLine(f"expected 'src<TAB>dst', got {raw!r}", lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedLine(f"non-integer node id in {raw!r}", lineno) from None
        if i < 1 or j < 1:
            raise MalformedLine("node ids must be positive", lineno)
        if (i, j) in edges:
            raise DuplicateEdge(f"edge ({i},{j}) already on line {edges[(i, j)]}", lineno)
        edges[(i, j)] = lineno
    top = max((max(e) for e in edges), default=0)
    if declared is not None:
        if top > declared:
            raise HeaderMismatch(f"header declares {declared} nodes but node {top} is used")
        n = declared
    else:
        n = top
    if n == 0:
        raise EmptyGraph("no nodes referenced")
    return DirectedGraph(n, frozenset(edges))


def build_google(
    g: DirectedGraph, alpha: float = 0.85, v: Sequence[float] | None = None
) -> GoogleMatrix:
    if not 0.0 < alpha < 1.0:
        raise InvalidParameter(f"alpha must lie in (0,1), got {alpha}")
    n = g.n
    if v is None:
        vec = np.full(n, 1.0 / n)
    else:
        vec = np.asarray(v, dtype=float)
        if vec.shape != (n,):
            raise InvalidParameter(f"personalization vector needs length {n}")
        if np.any(vec < 0):
            raise InvalidParameter("personalization vector has negative entries")
        if abs(vec.sum() - 1.0) > 1e-12:
            raise InvalidParameter("personalization vector must sum to 1")
    H = np.zeros((n, n))
    for i, j in g.edges:
        H[i - 1, j - 1] = 1.0 / g.out_degree[i - 1]
    a = np.array(g.dangling, dtype=float)
    W = H + np.outer(a, np.full(n, 1.0 / n))
    G = alpha * W + (1.0 - alpha) * np.outer(np.ones(n), vec)
    return GoogleMatrix(n, float(alpha), vec, G)


def classical_pagerank(
    G: GoogleMatrix | np.ndarray, tol: float = 1e-12, max_iter: int = 10_000
) -> np.ndarray:
    """Power iteration pi <- pi G from the uniform vector."""
    M = G.entries if isinstance(G, GoogleMatrix) else np.asarray(G, dtype=float)
    n = M.shape[0]
    pi = np.full(n, 1.0 / n)
    residual = np.inf
    for _ in range(max_iter):
        nxt = pi @ M
        nxt /= nxt.sum()
        residual = np.abs(nxt - pi).sum()
        pi = nxt
        if residual <= tol:
            # one more check on the returned vector itself
            residual = np.abs(pi @ M - pi).sum()
            if residual <= tol:
                return pi
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps", residual)
