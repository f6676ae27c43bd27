"""One-stop assembly of every series, radius and bound for a perturbed graph."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..graph import MatrixSeries
from ..series import Series
from ..spectral import CLUSTER_TOL, SpectralData, build_t, eigendecompose
from ..szegedy import WalkSpectrum, build_walk, he_eigenpairs, is_unit
from .bounds import (
    BoundLedger,
    Majorant,
    entry_envelopes,
    projection_majorant,
    psi_majorant,
    t_majorant,
    u_majorant,
    v_majorant,
)
from .radius import RadiusEstimate, convergence_radius
from .tree import EigenvalueTree, TreeNode, reduction_tree
from .tseries import psi_series, t_series, u_series
from .walk import WalkExpansion, iq_series, nq_series, u_projection_series, walk_expansion, walk_spectral_data

MAX_ORDER = 8


@dataclass
class PerturbationAnalysis:
    gs: MatrixSeries
    K: int
    cluster_tol: float = CLUSTER_TOL
    events: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not 1 <= self.K <= MAX_ORDER:
            raise ValueError(f"order K must lie in [1, {MAX_ORDER}]")
        self.spec: SpectralData = eigendecompose(build_t(self.gs.base), self.cluster_tol)
        self.depth_cap = max(0, min(self.K, self.gs.n - 1))
        self.ts: Series = t_series(self.gs, self.K + self.depth_cap)
        self.psi: Series = psi_series(self.gs, self.K)
        self.us: Series = u_series(self.gs, self.K)
        G = self.gs.base
        B0 = self.gs.bound_B0
        self.A0_entries = entry_envelopes(
            [self.gs.term(l) for l in range(1, self.gs.order + 1)], B0, G.shape
        )
        self.psi_maj = psi_majorant(G, self.A0_entries, B0)
        self.u_maj = u_majorant(self.psi_maj)
        self.t_maj = t_majorant(G, self.A0_entries, B0)
        self.tree: EigenvalueTree = reduction_tree(
            self.spec, self.ts, self.K, envelope=(self.t_maj.A, self.t_maj.B), depth_cap=self.depth_cap
        )
        self.events += self.tree.events
        self.radius: RadiusEstimate = convergence_radius(self.gs, self.tree)
        self.walk: WalkExpansion = walk_expansion(self.tree, self.psi, self.K)

    # ------------------------------------------------------------ walk spectrum
    @cached_property
    def ops(self):
        return build_walk(self.gs.base)

    @cached_property
    def walk_spectrum(self) -> WalkSpectrum:
        return he_eigenpairs(self.ops, self.spec)

    @cached_property
    def uspec(self) -> SpectralData:
        return walk_spectral_data(self.walk_spectrum)

    @cached_property
    def u_projections(self) -> list[Series]:
        return [u_projection_series(self.uspec, self.us, h, self.K) for h in range(self.uspec.s)]

    # ------------------------------------------------------------ quantities
    def nq(self, psi0: np.ndarray, i: int, m: int, variant: str = "paper") -> Series:
        return nq_series(self.walk, psi0, i, m, variant)

    def iq(self, psi0: np.ndarray, i: int, m: int, variant: str = "paper") -> Series:
        return iq_series(self.nq(psi0, i, m, variant))

    def lambda_coefficients(self) -> list[tuple[TreeNode, np.ndarray]]:
        return [(leaf, leaf.lam_series.coeffs) for leaf in self.tree.leaves()]

    # ------------------------------------------------------------ bounds
    def lambda_majorant(self, leaf: TreeNode) -> Majorant:
        lam0 = abs(float(leaf.lam_series.coeffs[0]))
        if not np.isfinite(leaf.radius) or leaf.varrho == 0:
            return Majorant(lam0, 0.0, 0.0)
        return Majorant(lam0, leaf.varrho / leaf.radius, 1.0 / leaf.radius)

    def branch_majorants(self) -> list[tuple[Majorant, Majorant]]:
        """(E_f, mu_f) majorants for every walk branch."""
        Amaj = self.psi_maj
        out = []
        for b in self.walk.branches:
            leaf = b.leaf
            P = projection_majorant(leaf.op_A, leaf.op_B, leaf.isolation)
            lam = self.lambda_majorant(leaf)
            lam0 = float(leaf.lam_series.coeffs[0])
            if b.branch == 0:
                out.append((Amaj * (P * Amaj), Majorant(1.0, 0.0, 0.0)))
                continue
            c0 = 1.0 - lam0 * lam0
            one_minus = lam * lam
            one_minus = Majorant(abs(c0), one_minus.A, one_minus.B)
            root = one_minus.sqrt(c0)
            mu = lam + root
            mu0 = complex(b.mu.coeffs[0])
            mu_inv = mu.reciprocal(mu0)
            w = one_minus.scale(2.0).reciprocal(2.0 * c0)
            L = Amaj + mu * Amaj
            R = Amaj + mu_inv * Amaj
            out.append((w * (L * (P * R)), mu))
        return out

    def error_bounds(self, psi0: np.ndarray, i: int, m: int, variant: str = "paper") -> BoundLedger:
        K = self.K
        led = BoundLedger()
        gs = self.gs
        g_norms = np.array([np.linalg.norm(gs.term(l), 2) for l in range(K + 1)])
        led.add(
            "G",
            Majorant(float(g_norms[0]), gs.bound_A0, gs.bound_B0),
            "input envelope (A0, B0) of the Google matrix series",
            g_norms,
        )
        psi_norms = np.array([np.linalg.norm(self.psi.coeffs[l], axis=0).max() for l in range(K + 1)])
        led.add("psi", self.psi_maj, "entrywise square-root majorant over per-entry envelopes of G", psi_norms)
        led.add("U", self.u_maj, "U = S_w (2 A A^T - I) with the psi majorant", self.us.norms())
        led.add("T", self.t_maj, "product of entry square roots, Frobenius collection", self.ts.truncate(K).norms())

        lam_norms = np.zeros(K + 1)
        for leaf, coeffs in self.lambda_coefficients():
            lam_norms = np.maximum(lam_norms, np.abs(coeffs[: K + 1]))
        r1, rho = self.radius.r1, self.radius.varrho
        if np.isfinite(r1) and rho > 0:
            lam_maj = Majorant(1.0, rho / r1, 1.0 / r1)
        else:
            lam_maj = Majorant(1.0, 0.0, 0.0)
        led.add("lambda", lam_maj, "Cauchy estimate varrho_1 r_1^-n with uniform constants over the tree", lam_norms)

        dmin = float(np.min(self.uspec.isolation)) if self.uspec.s > 1 else math.inf
        P_hat = projection_majorant(self.u_maj.A, self.u_maj.B, dmin)
        ph_norms = np.zeros(K + 1)
        for P in self.u_projections:
            ph_norms = np.maximum(ph_norms, P.norms())
        led.add("P_hat", P_hat, "walk eigenprojection from the U envelope and the smallest walk isolation", ph_norms)

        bm = self.branch_majorants()
        E_total = Majorant(0.0, 0.0, 0.0)
        E_norms = np.zeros(K + 1)
        for (Em, _), b in zip(bm, self.walk.branches):
            E_total = E_total + Em
            E_norms = np.maximum(E_norms, b.projection.norms())
        E_max = Majorant(max([e.a0 for e, _ in bm] + [1.0]), max([e.A for e, _ in bm] + [0.0]), max([e.B for e, _ in bm] + [0.0]))
        led.add("E", E_max, "leaf walk projections from psi, leaf projection and mu majorants", E_norms)
        perp = Majorant(1.0, E_total.A, E_total.B)
        Qm = perp * perp.derivative()
        for Em, _ in bm:
            Qm = Qm + Em * Em.derivative()
        led.add("Q", Qm, "-sum P P' over the leaf projections and their complement", self.walk.Q.norms())
        Vm = v_majorant(Qm)
        vec_norms = np.zeros(K + 1)
        for _, vec in self.walk.pairs:
            vec_norms = np.maximum(vec_norms, vec.norms())
        led.add("V", Vm, "exponential majorant of V' = Q V", self.walk.V.norms())
        led.add("eigvec", Vm, "|mu^(n)> = V^(n)|mu> with unit |mu>", vec_norms)

        psi0 = np.asarray(psi0, dtype=complex)
        s0 = float(np.linalg.norm(psi0))
        n = gs.n
        N_total = Majorant(0.0, 0.0, 0.0)
        a1_max = Majorant(0.0, 0.0, 0.0)
        for (_, mu), b in zip(bm, self.walk.branches):
            a1 = mu.power(2 * m)
            a1_max = Majorant(max(a1_max.a0, a1.a0), max(a1_max.A, a1.A), max(a1_max.B, a1.B))
            overlap = Vm.scale(s0)
            comps = Vm.scale(math.sqrt(n)) if variant == "paper" else Vm
            term = a1 * (overlap * comps)
            N_total = N_total + term.scale(b.multiplicity)
        a1_norms = np.zeros(K + 1)
        for b in self.walk.branches:
            a1_norms = np.maximum(a1_norms, np.abs(b.mu.power(2 * m).coeffs))
        led.add("a1", a1_max, "integer power of the mu majorant", a1_norms)
        nq = self.nq(psi0, i, m, variant)
        nq_norms = np.abs(nq.coeffs) if nq.coeffs.ndim == 1 else np.abs(nq.coeffs).max(axis=1)
        led.add("N_q", N_total, "triple product over walk eigenpairs, summed over pairs", nq_norms)
        I_maj = N_total * N_total
        if variant == "norm":
            I_maj = I_maj.scale(n)
        iq = self.iq(psi0, i, m, variant)
        led.add("I_q", I_maj, "N_q times its conjugate", np.abs(iq.coeffs))
        return led
