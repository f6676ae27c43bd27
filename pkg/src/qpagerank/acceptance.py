"""The ten acceptance checks as plain functions returning pass/fail records."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import fixtures, oracle
from .graph import MatrixSeries, build_google, classical_pagerank
from .perturbation.analysis import PerturbationAnalysis
from .perturbation.tree import reduction_tree
from .perturbation.tseries import t_first_order, t_series, t_series_three_part
from .spectral import build_t, eigendecompose
from .szegedy import (
    average_pagerank_all,
    build_walk,
    default_psi0,
    he_eigenpairs,
    limit_pagerank_all,
    mixing_bound,
    quantum_pagerank_all,
    swap_indices,
)

SEED = 20240601
SERIES_FIXTURES = ("two_cycle", "k3_breaking", "k3_preserving", "four_node")
GRID_POINTS = 6
# errors below this multiple of the measured rounding noise are not used for slopes
NOISE_FLOOR = 10.0
NOISE_PROBES = (1e-9, 2e-9, 4e-9)
DEGENERATE_FIXTURES = ("k3_breaking", "k3_preserving")


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"criterion {self.number:2d} [{'PASS' if self.passed else 'FAIL'}] {self.title}: {self.detail}"


def _random_googles(count: int = 20, seed: int = SEED):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        g = fixtures.random_graph(rng)
        alpha = float(rng.uniform(0.5, 0.95))
        yield build_google(g, alpha)


def criterion_1(seed: int = SEED) -> CriterionResult:
    worst_u = worst_psi = 0.0
    for G in _random_googles(seed=seed):
        ops = build_walk(G)
        U = ops.U
        worst_u = max(worst_u, np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())
        worst_psi = max(worst_psi, np.abs(ops.psi.T @ ops.psi - np.eye(G.n)).max())
    ok = worst_u <= 1e-10 and worst_psi <= 1e-12
    return CriterionResult(1, "unitarity and psi orthonormality", ok, f"max|U'U-I|={worst_u:.2e}, max|<psi_j|psi_k>-d|={worst_psi:.2e}")


def criterion_2(seed: int = SEED) -> CriterionResult:
    worst = 0.0
    for G in _random_googles(seed=seed):
        ops = build_walk(G)
        n = G.n
        M = np.hstack([ops.psi, ops.psi[swap_indices(n)]])
        Q, sv, _ = np.linalg.svd(M, full_matrices=False)
        rank = int((sv > 1e-10 * sv[0]).sum())
        Q = Q[:, :rank]
        mus = np.linalg.eigvals(Q.T @ ops.U @ Q)
        lam = np.clip(np.linalg.eigvalsh(build_t(G).entries), -1.0, 1.0)
        root = np.sqrt(1.0 - lam**2)
        cands = np.concatenate([lam + 1j * root, lam - 1j * root])
        worst = max(worst, np.abs(mus[:, None] - cands[None, :]).min(axis=1).max())
    return CriterionResult(2, "walk phases from T eigenvalues", worst <= 1e-8, f"max distance {worst:.2e}")


def criterion_3(seed: int = SEED) -> CriterionResult:
    worst = 0.0
    googles = [fixtures.google(n) for n in fixtures.EDGE_LISTS] + list(_random_googles(8, seed))
    for G in googles:
        ops = build_walk(G)
        ws = he_eigenpairs(ops, eigendecompose(build_t(G)))
        psi0 = default_psi0(ops)
        totals = [quantum_pagerank_all(ws, psi0, m, "norm").sum() for m in range(65)]
        worst = max(worst, np.ptp(totals))
    return CriterionResult(3, "norm-variant conservation for m <= 64", worst <= 1e-8, f"max spread {worst:.2e}")


def criterion_4() -> CriterionResult:
    details = []
    ok = True
    for name in ("two_cycle", "k3"):
        G = fixtures.google(name)
        ops = build_walk(G)
        ws = he_eigenpairs(ops, eigendecompose(build_t(G)))
        psi0 = ops.psi[:, 0].astype(complex)
        lim = limit_pagerank_all(ws, psi0)
        gaps = {}
        for t in (10, 100, 1000, 10000):
            gap = np.abs(average_pagerank_all(ws, psi0, t) - lim).max()
            bound = mixing_bound(ws, psi0, t)
            gaps[t] = gap
            ok &= gap <= bound
        ratio = gaps[10000] / gaps[10]
        ok &= ratio < 1e-2
        details.append(f"{name}: ratio {ratio:.2e}")
    return CriterionResult(4, "time average approaches its limit", bool(ok), ", ".join(details))


def truncation_errors(an: PerturbationAnalysis, psi0, i: int, m: int, grid, variant: str = "paper"):
    C = oracle.swap_complement_basis(an.spec)
    iq = an.iq(psi0, i, m, variant)
    errs = [abs(oracle.iq_direct(an.gs, c, psi0, i, m, C, variant) - iq.evaluate(c)) for c in grid]
    return np.array(errs), float(np.real(iq.coeffs[0]))


def noise_floor(an: PerturbationAnalysis, psi0, i: int, m: int, variant: str = "paper") -> float:
    """Rounding level of oracle-minus-series, probed where truncation error is negligible."""
    errs, base = truncation_errors(an, psi0, i, m, NOISE_PROBES, variant)
    return NOISE_FLOOR * max(float(errs.max()), np.finfo(float).eps * max(1.0, abs(base)))


def slope_check(gs: MatrixSeries, K: int, i: int = 1, m: int = 2, variant: str = "paper") -> tuple[float, int]:
    """Slope over the dyadic grid inside 0.3 r_0 and the number of points above the noise floor."""
    an = PerturbationAnalysis(gs, K)
    psi0 = default_psi0(an.ops)
    grid = oracle.dyadic_grid(0.3 * an.radius.r0, GRID_POINTS)
    errs, _ = truncation_errors(an, psi0, i, m, grid, variant)
    floor = noise_floor(an, psi0, i, m, variant)
    return oracle.loglog_slope(grid, errs, floor), int((errs > floor).sum())


def criterion_5() -> CriterionResult:
    passed, unresolved, failed = [], [], []
    worst = np.inf
    for name in SERIES_FIXTURES:
        gs = fixtures.perturbed(name).series
        status = "pass"
        for K in (1, 2, 3):
            for variant in ("paper", "norm"):
                slope, used = slope_check(gs, K, variant=variant)
                if used < 3:
                    status = "unresolved" if status == "pass" else status
                    continue
                worst = min(worst, slope - K)
                if slope < K + 0.7:
                    status = "fail"
        {"pass": passed, "unresolved": unresolved, "fail": failed}[status].append(name)
    ok = not failed and len(passed) >= 3 and any(n in DEGENERATE_FIXTURES for n in passed)
    detail = f"min(slope - K) = {worst:.3f}; passing {passed}"
    if unresolved:
        detail += f"; below noise floor inside 0.3 r0: {unresolved}"
    if failed:
        detail += f"; failing {failed}"
    return CriterionResult(5, "truncation error slope >= K + 0.7", ok, detail)


def criterion_6(seed: int = SEED) -> CriterionResult:
    rng = np.random.default_rng(seed + 6)
    worst = 0.0
    for G in _random_googles(seed=seed):
        gs = fixtures.random_perturbation(rng, G.entries)
        general = t_series_three_part(gs, 2).coeffs[1]
        worst = max(worst, np.abs(general - t_first_order(gs)).max())
    return CriterionResult(6, "first-order T closed form", worst <= 1e-12, f"max difference {worst:.2e}")


def criterion_7() -> CriterionResult:
    chi = 1e-3
    ok = True
    worst = 0.0
    gs = fixtures.perturbed("k3_breaking").series
    spec = eigendecompose(build_t(gs.base))
    direct = np.linalg.eigvalsh(np.real(oracle.t_at(oracle.google_at(gs, chi))))
    for K in (1, 2, 3):
        tree = reduction_tree(spec, t_series(gs, 2 * K), K)
        vals = tree.leaf_values(chi)
        cost = np.abs(vals[:, None] - direct[None, :])
        r, c = linear_sum_assignment(cost)
        err = cost[r, c].max()
        worst = max(worst, err / (10 * chi ** (K + 1)))
        ok &= err <= 10 * chi ** (K + 1)
    pres = fixtures.perturbed("k3_preserving").series
    spec_p = eigendecompose(build_t(pres.base))
    tree = reduction_tree(spec_p, t_series(pres, 6), 3)
    degenerate = [h for h, r in enumerate(tree.roots) if r.multiplicity > 1]
    levels = [tree.split_level(h) for h in degenerate]
    ok &= levels == [2]
    return CriterionResult(7, "degenerate reduction tree", bool(ok), f"error/tolerance {worst:.2e}, split levels {levels}")


def criterion_8() -> CriterionResult:
    ok = True
    worst = 0.0
    for name in SERIES_FIXTURES:
        gs = fixtures.perturbed(name).series
        an = PerturbationAnalysis(gs, 3)
        psi0 = default_psi0(an.ops)
        C = oracle.swap_complement_basis(an.spec)
        for variant in ("paper", "norm"):
            coeffs = an.iq(psi0, 1, 2, variant).coeffs
            rho = 0.4 * min(an.radius.r0, 1.0)

            def f(z, variant=variant):
                return oracle.iq_direct(gs, z, psi0, 1, 2, C, variant)

            for n in range(4):
                est = oracle.coeff_oracle(f, n, 64, rho)
                tol = max(1e-8, est.error)
                diff = abs(est.value - coeffs[n])
                worst = max(worst, diff / tol)
                ok &= diff <= tol
    return CriterionResult(8, "Cauchy extraction matches I_q coefficients", bool(ok), f"max diff/tol {worst:.2e}")


def criterion_9() -> CriterionResult:
    failures = []
    for name in SERIES_FIXTURES:
        gs = fixtures.perturbed(name).series
        an = PerturbationAnalysis(gs, 3)
        psi0 = default_psi0(an.ops)
        for variant in ("paper", "norm"):
            for m in (0, 2):
                led = an.error_bounds(psi0, 1, m, variant)
                failures += [f"{name}:{v}" for v in led.violations()]
    return CriterionResult(9, "bound chain dominates computed norms", not failures, "violations: " + (", ".join(failures) or "none"))


def criterion_10() -> CriterionResult:
    pi = classical_pagerank(fixtures.google("dangling_chain"))
    err = np.abs(pi - np.array([0.350877, 0.649123])).max()
    return CriterionResult(10, "classical PageRank on the dangling chain", err <= 1e-6, f"pi = {np.round(pi, 6).tolist()}")


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


SEEDED = {1, 2, 3, 6}


def run(number: int, seed: int = SEED) -> CriterionResult:
    fn = CRITERIA[number]
    return fn(seed) if number in SEEDED else fn()


def run_all(seed: int = SEED) -> list[CriterionResult]:
    return [run(k, seed) for k in CRITERIA]
