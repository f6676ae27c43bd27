import numpy as np
import pytest

from qpagerank import fixtures, oracle
from qpagerank.errors import InadmissibleChi, MatchingAmbiguity
from qpagerank.perturbation.analysis import PerturbationAnalysis
from qpagerank.szegedy import default_psi0, psi_matrix, quantum_pagerank_all, walk_unitary


class TestCoefficientOracle:
    def test_monomial(self):
        est = oracle.coeff_oracle(lambda z: z**2, 2, 16, 0.5)
        assert est.value == pytest.approx(1.0, abs=1e-12)
        assert oracle.coeff_oracle(lambda z: z**2, 1, 16, 0.5).value == pytest.approx(0.0, abs=1e-12)

    def test_geometric(self):
        est = oracle.coeff_oracle(lambda z: 1 / (1 - z), 3, 64, 0.1)
        assert est.value == pytest.approx(1.0, abs=1e-10)
        assert abs(est.value - 1.0) <= est.error

    @pytest.mark.parametrize("M, n", [(12, 1), (8, 3)])
    def test_sample_count_checked(self, M, n):
        with pytest.raises(ValueError):
            oracle.coeff_oracle(lambda z: z, n, M, 0.1)


class TestDirectEvaluation:
    def test_google_at(self):
        gs = fixtures.perturbed("two_cycle").series
        np.testing.assert_allclose(oracle.google_at(gs, 0.01), [[0.076, 0.924], [0.925, 0.075]], atol=1e-15)
        with pytest.raises(InadmissibleChi):
            oracle.google_at(gs, -1.0)

    def test_walk_unitary_along_path(self):
        gs = fixtures.perturbed("four_node").series
        for chi in (0.01, 0.05):
            U = walk_unitary(psi_matrix(oracle.google_at(gs, chi)))
            np.testing.assert_allclose(U.T @ U, np.eye(16), atol=1e-12)

    def test_projector_is_orthogonal_for_real_chi(self):
        gs = fixtures.perturbed("four_node").series
        an = PerturbationAnalysis(gs, 2)
        C = oracle.swap_complement_basis(an.spec)
        Pi = oracle.dynamical_projector(psi_matrix(oracle.google_at(gs, 0.02)), C)
        np.testing.assert_allclose(Pi @ Pi, Pi, atol=1e-12)
        np.testing.assert_allclose(Pi, Pi.T, atol=1e-12)

    @pytest.mark.parametrize("name", ["two_cycle", "k3_breaking", "four_node"])
    def test_unperturbed_point(self, name, analyses):
        an = analyses(name)
        psi0 = default_psi0(an.ops)
        C = oracle.swap_complement_basis(an.spec)
        ref = an.walk_spectrum.he_mus
        sample = oracle.evaluate_at(an.gs, 0.0, psi0, [1, 2], [0, 1, 2], C, ref)
        np.testing.assert_allclose(sample.mus, ref, atol=1e-10)
        for m in (0, 1, 2):
            direct = quantum_pagerank_all(an.walk_spectrum, psi0, m)
            for i in (1, 2):
                assert sample.iq_chi[i, m] == pytest.approx(direct[i - 1], abs=1e-12)

    def test_rejects_complex_chi(self, analyses):
        an = analyses("two_cycle")
        with pytest.raises(InadmissibleChi):
            oracle.evaluate_at(an.gs, 0.01j, default_psi0(an.ops), [1], [0], oracle.swap_complement_basis(an.spec), an.walk_spectrum.he_mus)

    def test_ambiguous_matching(self):
        with pytest.raises(MatchingAmbiguity):
            oracle.match_eigenvalues(np.array([0.5, 0.5001]), np.array([0.0, 1.0]))
        perm = oracle.match_eigenvalues(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        np.testing.assert_array_equal(perm, [1, 0])
        # confusion inside one cluster is fine
        oracle.match_eigenvalues(np.array([0.5, 0.5001]), np.array([0.0, 1.0]), groups=[0, 0])


def errors_at(gs, K, grid, i=1, m=2):
    an = PerturbationAnalysis(gs, K)
    psi0 = default_psi0(an.ops)
    C = oracle.swap_complement_basis(an.spec)
    I = an.iq(psi0, i, m)
    return np.array([abs(oracle.iq_direct(gs, c, psi0, i, m, C) - I.evaluate(c)) for c in grid])


class TestTruncation:
    grid = [0.01 * 2.0**-k for k in range(5)]

    def test_higher_order_is_closer(self):
        gs = fixtures.perturbed("four_node").series
        e1, e2 = errors_at(gs, 1, self.grid), errors_at(gs, 2, self.grid)
        assert np.all(e2 < e1)

    def test_second_order_slope(self):
        gs = fixtures.perturbed("four_node").series
        slope = oracle.loglog_slope(self.grid, errors_at(gs, 2, self.grid))
        assert slope >= 2.7

    def test_zero_perturbation(self):
        gs = fixtures.zero_perturbation("four_node")
        np.testing.assert_allclose(errors_at(gs, 1, [0.1, 0.05]), 0, atol=1e-14)

    def test_compare_truncation_table(self):
        rep = oracle.compare_truncation(
            np.array([1.0, 1.0]), lambda x: 1 / (1 - x), [0.1, 0.05], 1, lambda x: x**2 / (1 - x)
        )
        assert rep.all_within
        assert rep.rows[0].abs_error == pytest.approx(0.01 / 0.9)
        assert rep.to_csv().splitlines()[0] == "chi,quantity,oracle,truncated,abs_error,tail_bound,within_bound"
        assert rep.slope == pytest.approx(2.0, abs=0.1)

    def test_slope_skips_floor(self):
        assert oracle.loglog_slope([1, 2, 4], [1e-20, 4.0, 16.0], floor=1e-10) == pytest.approx(2.0)
        assert np.isnan(oracle.loglog_slope([1, 2], [0.0, 1.0]))

    def test_dyadic_grid(self):
        assert oracle.dyadic_grid(0.03, 3) == [0.025, 0.0125, 0.00625]
        assert oracle.dyadic_grid(0.0) == []
