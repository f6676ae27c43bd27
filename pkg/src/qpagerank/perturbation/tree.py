"""Eigenvalue series for T(chi), including the recursive splitting of clusters.

A degenerate cluster with eigenvalue lam and projection P(chi) is resolved
by studying X(chi) = (T(chi) - lam) P(chi) / chi.  Its value at chi = 0 is
P T^(1) P, whose eigenvalues on the range of P are the first-order branch
slopes.  The complement of P is moved away from those slopes by adding
c (I - P(chi)); with c = 0 this is the plain restriction.  Repeating the
construction on every still-degenerate slope cluster produces the tree.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateEigenvalue
from ..series import Series
from ..spectral import SpectralData, eigendecompose
from .kato import KatoExpansion, eigenvalue_trace_formula

logger = logging.getLogger(__name__)


def projection_series(spec: SpectralData, ts: Series, h: int, K: int) -> Series:
    if K < 0:
        raise ValueError("order K must be nonnegative")
    return KatoExpansion(spec, h, ts.truncate(K)).projection


def eigenvalue_series_simple(spec: SpectralData, ts: Series, h: int, K: int) -> Series:
    """Series of a simple eigenvalue via the trace formula."""
    if spec.multiplicities[h] != 1:
        raise DegenerateEigenvalue(
            f"eigenvalue {spec.eigenvalues[h]:.6g} has multiplicity {spec.multiplicities[h]}"
        )
    return eigenvalue_trace_formula(spec, h, ts.truncate(K), K)


def low_order_eigenvalue(spec: SpectralData, ts: Series, h: int) -> tuple[float, float]:
    """First two coefficients from the eigenvector forms (simple eigenvalue)."""
    phi = spec.vectors[h][:, 0]
    S = spec.reduced_resolvents[h]
    T1 = ts.coeffs[1]
    T2 = ts.coeffs[2] if ts.K >= 2 else np.zeros_like(T1)
    first = phi @ T1 @ phi
    second = phi @ T2 @ phi - phi @ T1 @ S @ T1 @ phi
    return float(first), float(second)


@dataclass
class TreeNode:
    level: int
    value: float
    multiplicity: int
    chain: tuple[float, ...]
    op: Series
    spec: SpectralData
    cluster: int
    expansion: KatoExpansion
    shift: float = 0.0
    children: list["TreeNode"] = field(default_factory=list)
    resolved: bool = True
    # envelope of the operator coefficients: ||op^(n)|| <= op_A op_B^(n-1)
    op_A: float = 0.0
    op_B: float = 0.0
    isolation: float = np.inf
    radius: float = np.inf
    varrho: float = 0.0
    lam_series: Series | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def simple(self) -> bool:
        return self.is_leaf and self.multiplicity == 1

    @property
    def projection(self) -> Series:
        return self.expansion.projection

    @property
    def reduced(self) -> Series:
        return self.expansion.reduced_operator

    def leaves(self) -> list["TreeNode"]:
        if self.is_leaf:
            return [self]
        out = []
        for c in self.children:
            out += c.leaves()
        return out

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass
class EigenvalueTree:
    roots: list[TreeNode]
    K: int
    depth_cap: int
    events: list[str] = field(default_factory=list)

    def leaves(self) -> list[TreeNode]:
        out = []
        for r in self.roots:
            out += r.leaves()
        return out

    def nodes(self):
        for r in self.roots:
            yield from r.walk()

    @property
    def depth(self) -> int:
        return max(n.level for n in self.nodes())

    def leaf_values(self, chi: float) -> np.ndarray:
        """Leaf eigenvalue series at chi, each repeated by its multiplicity."""
        out = []
        for leaf in self.leaves():
            out += [leaf.lam_series.evaluate(chi)] * leaf.multiplicity
        return np.array(out)

    def split_level(self, root_index: int) -> int | None:
        """Smallest level at which the root's cluster branches, or None."""
        node = self.roots[root_index]
        while not node.is_leaf:
            if len(node.children) > 1:
                return node.level + 1
            node = node.children[0]
        return None


def choose_shift(values: np.ndarray) -> float:
    """Pick c so the complement of the cluster stays clear of every slope.

    c = 0 (the plain restriction) is kept whenever it is at least one slope
    gap away from every slope; otherwise c goes below the smallest slope.
    """
    distinct = np.unique(np.round(values, 12))
    gaps = np.diff(distinct)
    D = gaps.min() if len(gaps) else max(1.0, 2.0 * np.abs(distinct).max())
    if np.abs(distinct).min() >= D:
        return 0.0
    return float(distinct.min() - D)


def reduction_tree(
    spec: SpectralData,
    ts: Series,
    K: int,
    envelope: tuple[float, float] | None = None,
    depth_cap: int | None = None,
) -> EigenvalueTree:
    """Build the eigenvalue tree of T(chi) = ts.

    ``ts`` must carry at least K + depth_cap orders; each level of descent
    consumes one.  Leaves below ``depth_cap`` are reported unresolved and
    their series is the cluster mean, exact through order K whenever the
    cluster only splits beyond that order.
    """
    n = spec.dim
    if depth_cap is None:
        depth_cap = max(0, min(K, n - 1))
    need = K + depth_cap
    if ts.K < need:
        raise ValueError(f"T series has order {ts.K}, tree needs {need}")
    A0, B0 = envelope if envelope is not None else (0.0, 0.0)
    tree = EigenvalueTree([], K, depth_cap)
    ts = ts.truncate(need)
    for h in range(spec.s):
        root = _expand(tree, ts, spec, h, 0, (float(spec.eigenvalues[h]),), A0, B0, np.inf)
        tree.roots.append(root)
    for leaf in tree.leaves():
        _finish_leaf(leaf, K, tree)
    return tree


def _expand(tree, op, spec, c, level, chain, A, B, parent_radius) -> TreeNode:
    ke = KatoExpansion(spec, c, op)
    d = float(spec.isolation[c])
    if A > 0 and np.isfinite(d):
        radius = min(parent_radius, 1.0 / (2.0 * A / d + B))
    elif A > 0:
        radius = min(parent_radius, 1.0 / B) if B > 0 else parent_radius
    else:
        radius = parent_radius
    node = TreeNode(
        level=level,
        value=float(np.real(spec.eigenvalues[c])),
        multiplicity=spec.multiplicities[c],
        chain=chain,
        op=op,
        spec=spec,
        cluster=c,
        expansion=ke,
        op_A=A,
        op_B=B,
        isolation=d,
        radius=radius,
    )
    if node.multiplicity == 1:
        return node
    if level >= tree.depth_cap or op.K <= 1:
        node.resolved = False
        tree.events.append(
            f"cluster {chain} left unresolved at level {level} (multiplicity {node.multiplicity})"
        )
        return node
    P = ke.projection
    X = ke.reduced_operator.over_chi(1)
    P = P.truncate(X.K)
    base = X.coeffs[0]
    inside = spec.vectors[c]
    slopes = np.linalg.eigvalsh(inside.T @ base @ inside)
    shift = choose_shift(slopes)
    if shift != 0.0:
        tree.events.append(f"level {level + 1} under {chain}: complement shifted by {shift:.6g}")
    node.shift = shift
    I = np.eye(op.shape[0])
    Y = X + shift * (Series.constant(I, X.K) - P)
    child_spec = eigendecompose(Y.coeffs[0], spec.cluster_tol)
    if A > 0 and np.isfinite(d):
        Bt = B + 2.0 * A / d
        cA = A * Bt + 2.0 * abs(shift) * A / d
        cB = Bt
    else:
        cA, cB = 0.0, 0.0
    for idx in range(child_spec.s):
        vecs = child_spec.vectors[idx]
        # keep only clusters living inside the parent's range
        if np.linalg.norm(P.coeffs[0] @ vecs - vecs) > 1e-6:
            continue
        value = float(child_spec.eigenvalues[idx])
        node.children.append(
            _expand(tree, Y, child_spec, idx, level + 1, chain + (value,), cA, cB, radius)
        )
    got = sum(ch.multiplicity for ch in node.children)
    if got != node.multiplicity:
        raise DegenerateEigenvalue(
            f"children of {chain} carry multiplicity {got}, expected {node.multiplicity}"
        )
    return node


def _finish_leaf(leaf: TreeNode, K: int, tree: EigenvalueTree) -> None:
    mean = leaf.expansion.mean_eigenvalue
    lvl = leaf.level
    coeffs = np.zeros(K + 1)
    coeffs[:lvl] = leaf.chain[:lvl]
    tail = np.real(mean.coeffs[: K + 1 - lvl])
    coeffs[lvl : lvl + len(tail)] = tail
    leaf.lam_series = Series(coeffs)
    # Cauchy bound constant: |lam(chi) - lam_h| on the circle |chi| = radius
    path = _path_to(tree, leaf)
    root = path[0]
    if not np.isfinite(leaf.radius) or leaf.op_A == 0:
        leaf.varrho = 0.0
        for node in path:
            node.varrho = max(node.varrho, 0.0)
        return
    r = leaf.radius
    b = abs(leaf.value) + leaf.isolation / 2.0 if lvl > 0 else None
    for node in reversed(path[1:-1]):
        b = abs(node.value) + r * b
    bound = root.isolation / 2.0
    if lvl > 0:
        bound = min(bound, r * b)
    leaf.varrho = float(bound)


def _path_to(tree: EigenvalueTree, leaf: TreeNode) -> list[TreeNode]:
    for root in tree.roots:
        path = _search(root, leaf)
        if path:
            return path
    raise KeyError("leaf not in tree")


def _search(node: TreeNode, target: TreeNode) -> list[TreeNode] | None:
    if node is target:
        return [node]
    for c in node.children:
        sub = _search(c, target)
        if sub:
            return [node] + sub
    return None
