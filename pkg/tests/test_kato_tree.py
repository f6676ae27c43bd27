import numpy as np
import pytest

from qpagerank import fixtures
from qpagerank.errors import DegenerateEigenvalue
from qpagerank.oracle import google_at, t_at
from qpagerank.perturbation.kato import KatoExpansion, eigenvalue_trace_formula
from qpagerank.perturbation.tree import (
    choose_shift,
    eigenvalue_series_simple,
    low_order_eigenvalue,
    projection_series,
    reduction_tree,
)
from qpagerank.perturbation.tseries import t_series
from qpagerank.spectral import build_t, eigendecompose


def setup(name, K=4):
    gs = fixtures.perturbed(name).series
    spec = eigendecompose(build_t(gs.base))
    return gs, spec, t_series(gs, K)


def direct_projection(T, lam, radius):
    w, v = np.linalg.eigh(T)
    sel = np.abs(w - lam) < radius
    return v[:, sel] @ v[:, sel].T


class TestKato:
    def test_first_order_projection(self):
        gs, spec, ts = setup("four_node")
        T1 = ts.coeffs[1]
        for h in range(spec.s):
            P, S = spec.projections[h], spec.reduced_resolvents[h]
            P1 = projection_series(spec, ts, h, 1).coeffs[1]
            np.testing.assert_allclose(P1, -P @ T1 @ S - S @ T1 @ P, atol=1e-13)

    @pytest.mark.parametrize("name", sorted(fixtures.PERTURBATIONS))
    def test_projection_traces_vanish(self, name):
        gs, spec, ts = setup(name)
        for h in range(spec.s):
            P = projection_series(spec, ts, h, 4).coeffs
            np.testing.assert_allclose([np.trace(P[l]) for l in range(1, 5)], 0, atol=1e-12)

    @pytest.mark.parametrize("name", sorted(fixtures.PERTURBATIONS))
    def test_projection_sums_to_direct(self, name):
        gs, spec, ts = setup(name, 6)
        chi = 1e-4 if name == "k3_preserving" else 1e-3
        T = t_at(google_at(gs, chi))
        for h in range(spec.s):
            P = projection_series(spec, ts, h, 6).evaluate(chi)
            Pd = direct_projection(T, spec.eigenvalues[h], spec.isolation[h] / 2)
            np.testing.assert_allclose(P, Pd, atol=1e-12)

    @pytest.mark.parametrize("name", sorted(fixtures.PERTURBATIONS))
    def test_trace_formula_agrees_with_recursion(self, name):
        gs, spec, ts = setup(name, 4)
        for h in range(spec.s):
            dp = KatoExpansion(spec, h, ts).mean_eigenvalue.coeffs
            brute = eigenvalue_trace_formula(spec, h, ts, 4).coeffs
            np.testing.assert_allclose(dp, brute, atol=1e-12)

    def test_unit_eigenvalue_stays_one_for_reversible_chains(self):
        # two-state chains and symmetric perturbations of K3 stay reversible
        for name in ("two_cycle", "k3_breaking", "k3_preserving"):
            gs, spec, ts = setup(name, 5)
            h = int(np.argmax(spec.eigenvalues))
            lam = eigenvalue_series_simple(spec, ts, h, 5).coeffs
            np.testing.assert_allclose(lam, [1, 0, 0, 0, 0, 0], atol=1e-12)

    def test_low_order_matches_series(self):
        gs, spec, ts = setup("four_node")
        for h in range(spec.s):
            first, second = low_order_eigenvalue(spec, ts, h)
            lam = eigenvalue_series_simple(spec, ts, h, 2).coeffs
            assert first == pytest.approx(lam[1], abs=1e-13)
            assert second == pytest.approx(lam[2], abs=1e-13)

    def test_degenerate_rejected_by_simple_route(self):
        gs, spec, ts = setup("k3_breaking")
        h = int(np.argmin(spec.eigenvalues))
        with pytest.raises(DegenerateEigenvalue):
            eigenvalue_series_simple(spec, ts, h, 2)


class TestTree:
    def test_simple_spectrum_tree_is_flat(self):
        gs, spec, ts = setup("four_node", 4)
        tree = reduction_tree(spec, ts, 4, depth_cap=0)
        assert tree.depth == 0
        for h, root in enumerate(tree.roots):
            np.testing.assert_allclose(
                root.lam_series.coeffs, eigenvalue_series_simple(spec, ts, h, 4).coeffs, atol=1e-12
            )

    def test_breaking_children_are_first_order_slopes(self):
        gs, spec, ts = setup("k3_breaking", 4)
        h = int(np.argmin(spec.eigenvalues))
        tree = reduction_tree(spec, ts, 2)
        node = tree.roots[h]
        assert tree.split_level(h) == 1
        phi = spec.vectors[h]
        slopes = np.linalg.eigvalsh(phi.T @ ts.coeffs[1] @ phi)
        got = np.sort([leaf.lam_series.coeffs[1] for leaf in node.leaves()])
        np.testing.assert_allclose(got, slopes, atol=1e-12)

    def test_preserving_splits_at_second_level(self):
        gs, spec, ts = setup("k3_preserving", 6)
        tree = reduction_tree(spec, ts, 3)
        h = int(np.argmin(spec.eigenvalues))
        assert tree.roots[h].multiplicity == 2
        assert tree.split_level(h) == 2
        # the first-order coefficient is shared by both branches
        c1 = [leaf.lam_series.coeffs[1] for leaf in tree.roots[h].leaves()]
        assert c1[0] == pytest.approx(c1[1], abs=1e-12)

    @pytest.mark.parametrize("name", ["k3_breaking", "k3_preserving"])
    def test_leaf_values_match_direct(self, name):
        gs, spec, ts = setup(name, 6)
        tree = reduction_tree(spec, ts, 3)
        chi = 1e-3 if name == "k3_breaking" else 2e-4
        direct = np.sort(np.linalg.eigvalsh(t_at(google_at(gs, chi))))
        np.testing.assert_allclose(np.sort(tree.leaf_values(chi)), direct, atol=50 * chi**4)

    def test_depth_cap_leaves_unresolved(self):
        gs, spec, ts = setup("k3_preserving", 6)
        tree = reduction_tree(spec, ts, 3, depth_cap=1)
        assert any(not leaf.resolved for leaf in tree.leaves())
        assert tree.events

    def test_short_series_rejected(self):
        gs, spec, ts = setup("k3_breaking", 2)
        with pytest.raises(ValueError):
            reduction_tree(spec, ts, 3)


@pytest.mark.parametrize(
    "values, expected",
    [
        (np.array([0.1, 0.2]), 0.0),
        (np.array([0.0, 0.3]), -0.3),
        (np.array([0.5, -0.5]), -1.5),
    ],
)
def test_choose_shift(values, expected):
    c = choose_shift(values)
    assert c == pytest.approx(expected)
    gap = np.diff(np.unique(values)).min()
    assert np.abs(values - c).min() >= gap - 1e-12
