import numpy as np
import pytest

from qpagerank import fixtures
from qpagerank.errors import NotInSubspace, ScaleError
from qpagerank.graph import build_google
from qpagerank.spectral import build_t, eigendecompose
from qpagerank.szegedy import (
    average_pagerank,
    average_pagerank_all,
    build_walk,
    default_psi0,
    diagonal_limit_all,
    he_eigenpairs,
    limit_pagerank_all,
    mixing_bound,
    mixing_bound_rigorous_all,
    quantum_pagerank,
    quantum_pagerank_all,
    swap_matrix,
)

from conftest import walk_of


def dense_rank(ops, hd_proj, psi0, m, variant):
    """I_q from a dense power of U, projected onto span{psi_j, S psi_j}."""
    n = ops.n
    x = np.linalg.matrix_power(ops.U, 2 * m) @ (hd_proj @ psi0)
    amp = x.reshape(n, n)
    if variant == "paper":
        return np.abs(amp.sum(axis=0)) ** 2
    return (np.abs(amp) ** 2).sum(axis=0)


def hd_projector(ops):
    M = np.hstack([ops.psi, ops.S_w @ ops.psi])
    Q, s, _ = np.linalg.svd(M, full_matrices=False)
    Q = Q[:, s > 1e-10 * s[0]]
    return Q @ Q.T


class TestOperators:
    def test_two_cycle_psi(self):
        ops = build_walk(fixtures.google("two_cycle"))
        np.testing.assert_allclose(ops.psi[:, 0], [np.sqrt(0.075), np.sqrt(0.925), 0, 0])

    def test_swap(self):
        S = swap_matrix(2)
        np.testing.assert_array_equal(S @ np.array([1, 2, 3, 4]), [1, 3, 2, 4])
        np.testing.assert_array_equal(S @ S, np.eye(4))

    def test_unitarity_and_projection(self, rng):
        for _ in range(5):
            ops = build_walk(build_google(fixtures.random_graph(rng), 0.85))
            np.testing.assert_allclose(ops.U.conj().T @ ops.U, np.eye(ops.n**2), atol=1e-10)
            np.testing.assert_allclose(ops.B @ ops.B, ops.B, atol=1e-10)
            np.testing.assert_allclose(ops.psi.T @ ops.psi, np.eye(ops.n), atol=1e-12)

    def test_scale_cap(self):
        with pytest.raises(ScaleError) as info:
            build_walk(fixtures.google("four_node"), dim_cap=9)
        assert info.value.exit_code == 4


class TestSpectrum:
    def test_two_cycle_phases(self):
        _, ws = walk_of(fixtures.google("two_cycle"))
        mus = sorted(ws.he_mus, key=lambda z: (z.real, z.imag))
        np.testing.assert_allclose(mus[0], -0.85 - 0.526783j, atol=1e-6)
        np.testing.assert_allclose(mus[1], -0.85 + 0.526783j, atol=1e-6)
        np.testing.assert_allclose(mus[2], 1.0, atol=1e-12)

    def test_eigenpairs(self, rng):
        for _ in range(5):
            ops, ws = walk_of(build_google(fixtures.random_graph(rng), 0.85))
            V = ws.he_vectors
            np.testing.assert_allclose(np.abs(ws.all_mus()), 1, atol=1e-10)
            np.testing.assert_allclose(ops.U @ V, V * ws.he_mus, atol=1e-8)
            np.testing.assert_allclose(V.conj().T @ V, np.eye(V.shape[1]), atol=1e-8)
            full = ws.all_vectors()
            np.testing.assert_allclose(ops.U @ full, full * ws.all_mus(), atol=1e-8)

    def test_zero_eigenvalue_gives_imaginary_unit(self):
        # T with eigenvalue 0: G = [[0.5, 0.5], [0.5, 0.5]] has T with eigenvalues {1, 0}
        ops, ws = walk_of(np.full((2, 2), 0.5))
        mus = ws.he_mus
        assert np.min(np.abs(mus - 1j)) < 1e-10 and np.min(np.abs(mus + 1j)) < 1e-10


class TestRanks:
    def test_matches_dense_power(self, rng):
        for name in ("two_cycle", "k3", "four_node", "dangling_chain"):
            ops, ws = walk_of(fixtures.google(name))
            psi0 = default_psi0(ops)
            Pi = hd_projector(ops)
            for m in (0, 1, 3):
                for variant in ("paper", "norm"):
                    np.testing.assert_allclose(
                        quantum_pagerank_all(ws, psi0, m, variant), dense_rank(ops, Pi, psi0, m, variant), atol=1e-8
                    )

    def test_two_cycle_example(self):
        ops, ws = walk_of(fixtures.google("two_cycle"))
        psi0 = (ops.psi[:, 0] + ops.psi[:, 1]) / np.sqrt(2)
        x = ops.U @ ops.U @ psi0
        expected = (np.abs(x.reshape(2, 2)) ** 2).sum(axis=0)
        np.testing.assert_allclose(quantum_pagerank_all(ws, psi0, 1, "norm"), expected, atol=1e-12)

    def test_norm_conservation(self):
        ops, ws = walk_of(fixtures.google("four_node"))
        psi0 = ops.psi[:, 2].astype(complex)
        totals = [quantum_pagerank_all(ws, psi0, m, "norm").sum() for m in range(65)]
        np.testing.assert_allclose(totals, 1.0, atol=1e-8)

    def test_orthogonal_state_gives_zero(self):
        ops, ws = walk_of(fixtures.google("k3"))
        # antisymmetric under swap and orthogonal to every psi_j
        x = np.zeros(9, dtype=complex)
        x[1], x[3] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        x -= hd_projector(ops) @ x
        x /= np.linalg.norm(x)
        for m in (0, 2):
            np.testing.assert_allclose(quantum_pagerank_all(ws, x, m, "norm", strict=False), 0, atol=1e-12)
        with pytest.raises(NotInSubspace):
            quantum_pagerank(ws, x, 1, 0)

    def test_rejects_non_unit_state(self):
        ops, ws = walk_of(fixtures.google("k3"))
        with pytest.raises(NotInSubspace):
            quantum_pagerank(ws, 2 * default_psi0(ops), 1, 0)

    def test_average_definitions(self):
        ops, ws = walk_of(fixtures.google("four_node"))
        psi0 = ops.psi[:, 0].astype(complex)
        direct = np.mean([quantum_pagerank_all(ws, psi0, m) for m in range(4)], axis=0)
        np.testing.assert_allclose(average_pagerank_all(ws, psi0, 4), direct, atol=1e-13)
        np.testing.assert_allclose(average_pagerank_all(ws, psi0, 1), quantum_pagerank_all(ws, psi0, 0), atol=1e-13)
        vals = np.array([quantum_pagerank_all(ws, psi0, m) for m in range(7)])
        avg = average_pagerank_all(ws, psi0, 7)
        assert np.all(vals.min(axis=0) - 1e-12 <= avg) and np.all(avg <= vals.max(axis=0) + 1e-12)
        assert average_pagerank(ws, psi0, 2, 4) == pytest.approx(direct[1])


class TestLimit:
    def test_two_cycle_long_average(self):
        ops, ws = walk_of(fixtures.google("two_cycle"))
        psi0 = ops.psi[:, 0].astype(complex)
        mus = ws.he_mus
        gap = min(abs(a - b) for k, a in enumerate(mus) for b in mus[k + 1 :])
        t = 10_000
        np.testing.assert_allclose(
            average_pagerank_all(ws, psi0, t), limit_pagerank_all(ws, psi0), atol=2 / (t * gap)
        )

    def test_diagonal_formula_when_simple(self):
        ops, ws = walk_of(fixtures.google("four_node"))
        psi0 = ops.psi[:, 1].astype(complex)
        for variant in ("paper", "norm"):
            np.testing.assert_allclose(
                diagonal_limit_all(ws, psi0, variant), limit_pagerank_all(ws, psi0, variant), atol=1e-12
            )

    def test_mixing_bound_scaling(self):
        ops, ws = walk_of(fixtures.google("two_cycle"))
        psi0 = ops.psi[:, 0].astype(complex)
        assert mixing_bound(ws, psi0, 200) == pytest.approx(mixing_bound(ws, psi0, 100) / 2)
        lhs = np.abs(average_pagerank_all(ws, psi0, 100) - limit_pagerank_all(ws, psi0))
        assert lhs.max() <= mixing_bound(ws, psi0, 100)

    def test_bound_for_single_phase_state(self):
        ops, ws = walk_of(fixtures.google("k3"))
        k = int(np.argmin(np.abs(ws.he_mus - 1.0)))
        psi0 = ws.he_vectors[:, k]
        others = [mu for mu in ws.he_mus if abs(mu - 1.0) > 1e-8]
        expected = sum(2.0 / (10 * abs(1.0 - mu)) for mu in others)
        assert mixing_bound(ws, psi0, 10) == pytest.approx(expected, rel=1e-10)
        # the true gap vanishes because only one phase is occupied
        gap = np.abs(average_pagerank_all(ws, psi0, 10) - limit_pagerank_all(ws, psi0)).max()
        assert gap < 1e-12


def test_literal_mixing_bound_counterexample():
    """The literal bound can fail when T has eigenvalues near +-lambda; the rigorous one holds."""
    rng = np.random.default_rng(7)
    worst_literal = 0.0
    for _ in range(300):
        g = fixtures.random_graph(rng, 5, 5)
        ops, ws = walk_of(build_google(g, 0.85))
        psi0 = ops.psi[:, 0].astype(complex)
        t = 1000
        lhs = np.abs(average_pagerank_all(ws, psi0, t) - limit_pagerank_all(ws, psi0))
        assert np.all(lhs <= mixing_bound_rigorous_all(ws, psi0, t) + 1e-12)
        worst_literal = max(worst_literal, lhs.max() / max(mixing_bound(ws, psi0, t), 1e-300))
    assert worst_literal > 1.0
