import numpy as np
import pytest

from qpagerank import fixtures
from qpagerank.errors import (
    ConvergenceError,
    DuplicateEdge,
    EmptyGraph,
    HeaderMismatch,
    InadmissiblePerturbation,
    InvalidParameter,
    MalformedLine,
)
from qpagerank.graph import DirectedGraph, MatrixSeries, build_google, classical_pagerank, load_edge_list


class TestLoadEdgeList:
    def test_two_cycle(self):
        g = load_edge_list("1\t2\n2\t1")
        assert g.n == 2
        assert g.edges == {(1, 2), (2, 1)}
        assert not any(g.dangling)

    def test_single_edge_leaves_target_dangling(self):
        g = load_edge_list("1\t2")
        assert g.n == 2
        assert g.dangling == (False, True)

    def test_duplicate_reports_line(self):
        with pytest.raises(DuplicateEdge) as info:
            load_edge_list("1\t2\n1\t2")
        assert info.value.line == 2

    def test_comments_and_header(self):
        g = load_edge_list("# a comment\nnodes: 4\n1\t2\n")
        assert g.n == 4
        assert g.dangling == (False, True, True, True)

    @pytest.mark.parametrize(
        "text, exc",
        [
            ("1\t2\t3\n", MalformedLine),
            ("a\tb\n", MalformedLine),
            ("0\t1\n", MalformedLine),
            ("nodes: 2\n1\t3\n", HeaderMismatch),
            ("# nothing\n", EmptyGraph),
            ("nodes: 0\n", EmptyGraph),
            ("1\t2\nnodes: 2\n", MalformedLine),
        ],
    )
    def test_rejects(self, text, exc):
        with pytest.raises(exc):
            load_edge_list(text)

    def test_malformed_line_number(self):
        with pytest.raises(MalformedLine, match="line 3"):
            load_edge_list("1\t2\n2\t1\nbroken\n")

    def test_from_edges_is_one_based(self):
        with pytest.raises(InvalidParameter):
            DirectedGraph.from_edges(2, [(0, 1)])


class TestGoogle:
    def test_two_cycle_matrix(self):
        G = fixtures.google("two_cycle")
        np.testing.assert_allclose(G.entries, [[0.075, 0.925], [0.925, 0.075]], atol=1e-15)

    def test_dangling_patch_uses_uniform(self):
        G = fixtures.google("dangling_chain")
        np.testing.assert_allclose(G.entries, [[0.075, 0.925], [0.5, 0.5]], atol=1e-15)

    def test_personalization_keeps_rows_stochastic(self):
        g = fixtures.graph("four_node")
        v = np.array([0.1, 0.2, 0.3, 0.4])
        G = build_google(g, 0.7, v)
        np.testing.assert_allclose(G.entries.sum(axis=1), 1.0, atol=1e-12)
        assert G.entries.min() >= 0.3 * v.min() - 1e-15

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
    def test_alpha_range(self, alpha):
        with pytest.raises(InvalidParameter):
            build_google(fixtures.graph("k3"), alpha)

    @pytest.mark.parametrize("v", [[0.5, 0.5], [1.2, -0.1, -0.1], [0.2, 0.2, 0.2]])
    def test_bad_personalization(self, v):
        with pytest.raises(InvalidParameter):
            build_google(fixtures.graph("k3"), 0.85, v)

    def test_teleport_floor(self, rng):
        for _ in range(10):
            g = fixtures.random_graph(rng)
            G = build_google(g, 0.85)
            assert G.entries.min() >= 0.15 / g.n - 1e-15

    def test_entries_read_only(self):
        G = fixtures.google("k3")
        with pytest.raises(ValueError):
            G.entries[0, 0] = 1.0


class TestClassical:
    def test_two_cycle_uniform(self):
        np.testing.assert_allclose(classical_pagerank(fixtures.google("two_cycle")), [0.5, 0.5], atol=1e-12)

    def test_dangling_chain_matches_stationary_solve(self):
        G = fixtures.google("dangling_chain").entries
        # independent route: null vector of (G^T - I) with the normalization row
        M = np.vstack([G.T - np.eye(2), np.ones(2)])
        exact = np.linalg.lstsq(M, np.array([0.0, 0.0, 1.0]), rcond=None)[0]
        pi = classical_pagerank(fixtures.google("dangling_chain"))
        np.testing.assert_allclose(pi, exact, atol=1e-10)
        np.testing.assert_allclose(pi, [0.350877, 0.649123], atol=1e-6)

    def test_residual_contract(self, rng):
        for _ in range(5):
            G = build_google(fixtures.random_graph(rng), 0.85)
            pi = classical_pagerank(G, tol=1e-11)
            assert np.abs(pi @ G.entries - pi).sum() <= 1e-11
            assert abs(pi.sum() - 1) < 1e-12 and pi.min() >= 0

    def test_nonconvergence(self):
        with pytest.raises(ConvergenceError) as info:
            classical_pagerank(fixtures.google("four_node"), tol=1e-300, max_iter=3)
        assert info.value.residual > 0
        assert info.value.exit_code == 3

    def test_automorphism_symmetry(self):
        pi = classical_pagerank(fixtures.google("k3"))
        np.testing.assert_allclose(pi, 1 / 3, atol=1e-11)


class TestMatrixSeries:
    def test_row_sums_checked(self):
        G = fixtures.google("two_cycle").entries
        with pytest.raises(InadmissiblePerturbation):
            MatrixSeries.build(G, [np.array([[0.1, 0.0], [0.0, 0.0]])])

    def test_envelope_fit(self):
        G = fixtures.google("two_cycle").entries
        t1 = np.array([[0.1, -0.1], [0.0, 0.0]])
        gs = MatrixSeries.build(G, [t1, 2 * t1])
        assert gs.bound_B0 == 1.0
        assert gs.bound_A0 == pytest.approx(2 * np.linalg.norm(t1, 2))

    def test_envelope_violation(self):
        G = fixtures.google("two_cycle").entries
        with pytest.raises(InadmissiblePerturbation):
            MatrixSeries.build(G, [np.array([[0.1, -0.1], [0.0, 0.0]])], A0=0.01, B0=1.0)

    def test_evaluate(self):
        gs = fixtures.perturbed("two_cycle").series
        np.testing.assert_allclose(gs.evaluate(0.01), [[0.076, 0.924], [0.925, 0.075]], atol=1e-15)
        assert gs.evaluate(0.0) is not gs.base
        np.testing.assert_array_equal(gs.evaluate(0.0), gs.base)
