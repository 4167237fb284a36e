import itertools
import math

import numpy as np
import pytest

from pmsim import hilbert as hb
from pmsim.mixtures import (
    WITH_REPLACEMENT,
    WITHOUT_REPLACEMENT,
    DrawRecord,
    FiniteEnsemble,
    averaged_spin_stats,
    beam_merge_demo,
    conditional_distribution,
    despagnat_experiment,
    ensemble_density_matrix,
    frequency_convergence,
    sample,
    total_spin_z_stats,
    x_pair_ensemble,
    z_pair_ensemble,
)


def enumerate_conditional(counts, prefix):
    """Oracle: enumerate every ordering of the multiset and count.

    Returns P(next draw = component a | the ordering starts with ``prefix``)
    for each component a.
    """
    population = [i for i, c in enumerate(counts) for _ in range(c)]
    matched = 0
    next_counts = [0] * len(counts)
    for perm in set(itertools.permutations(population)):
        if list(perm[: len(prefix)]) != list(prefix):
            continue
        matched += 1
        next_counts[perm[len(prefix)]] += 1
    return [c / matched for c in next_counts]


class TestFiniteEnsemble:
    def test_rejects_fractional_counts(self):
        with pytest.raises(ValueError, match="integer"):
            FiniteEnsemble(((hb.basis_state(2, 0), 1.5),))

    def test_rejects_empty_population(self):
        with pytest.raises(ValueError, match="at least 1"):
            FiniteEnsemble(((hb.basis_state(2, 0), 0),))

    def test_weights(self):
        e = FiniteEnsemble(((hb.basis_state(2, 0), 7), (hb.basis_state(2, 1), 3)))
        assert e.total == 10
        assert np.allclose(e.weights(), [0.7, 0.3])


class TestEnsembleDensityMatrix:
    def test_z_pair(self):
        rho = ensemble_density_matrix(z_pair_ensemble(6))
        assert np.allclose(rho.entries, np.eye(2) / 2, atol=1e-14)

    def test_x_pair_same_matrix(self):
        rho_z = ensemble_density_matrix(z_pair_ensemble(6))
        rho_x = ensemble_density_matrix(x_pair_ensemble(6))
        assert hb.trace_distance(rho_z, rho_x) <= 1e-14

    def test_weighted_diagonal(self):
        e = FiniteEnsemble(((hb.basis_state(2, 0), 7), (hb.basis_state(2, 1), 3)))
        assert np.allclose(ensemble_density_matrix(e).entries, np.diag([0.7, 0.3]))

    def test_invariant_under_permutation_and_splitting(self):
        up, down = hb.basis_state(2, 0), hb.plus_y()
        original = FiniteEnsemble(((up, 4), (down, 2)))
        permuted = FiniteEnsemble(((down, 2), (up, 4)))
        split = FiniteEnsemble(((up, 2), (down, 2), (up, 2)))
        rho = ensemble_density_matrix(original)
        assert hb.trace_distance(rho, ensemble_density_matrix(permuted)) <= 1e-14
        assert hb.trace_distance(rho, ensemble_density_matrix(split)) <= 1e-14


class TestSample:
    def test_exhaustive_draw_reproduces_counts(self):
        e = FiniteEnsemble(((hb.basis_state(2, 0), 3), (hb.basis_state(2, 1), 5)))
        for seed in range(5):
            record = sample(e, 8, WITHOUT_REPLACEMENT, seed)
            assert tuple(record.component_counts(2)) == (3, 5)

    def test_reproducible_for_fixed_seed(self):
        e = z_pair_ensemble(10)
        a = sample(e, 6, WITHOUT_REPLACEMENT, seed=42)
        b = sample(e, 6, WITHOUT_REPLACEMENT, seed=42)
        assert a == b
        c = sample(e, 6, WITH_REPLACEMENT, seed=42)
        d = sample(e, 6, WITH_REPLACEMENT, seed=42)
        assert c == d

    def test_overdraw_rejected(self):
        e = z_pair_ensemble(4)
        with pytest.raises(ValueError, match="without replacement"):
            sample(e, 5, WITHOUT_REPLACEMENT, seed=0)
        sample(e, 5, WITH_REPLACEMENT, seed=0)  # replacement has no cap

    def test_hypergeometric_prefix_probability(self):
        # Oracle: P(three up-draws in a row) = (3/6)(2/5)(1/4) = 1/20 for the
        # {3,3} ensemble without replacement.
        e = z_pair_ensemble(6)
        trials = 20_000
        hits = sum(
            sample(e, 3, WITHOUT_REPLACEMENT, seed).outcomes == (0, 0, 0)
            for seed in range(trials)
        )
        p = 1.0 / 20.0
        se = math.sqrt(p * (1 - p) / trials)
        assert abs(hits / trials - p) <= 3 * se

    def test_with_replacement_frequencies_converge(self):
        e = FiniteEnsemble(((hb.basis_state(2, 0), 7), (hb.basis_state(2, 1), 3)))
        record = sample(e, 100_000, WITH_REPLACEMENT, seed=7)
        freq = record.component_counts(2) / 100_000
        for observed, expected in zip(freq, [0.7, 0.3]):
            se = math.sqrt(expected * (1 - expected) / 100_000)
            assert abs(observed - expected) <= 3 * se


class TestConditionalDistribution:
    def test_no_observations(self):
        e = FiniteEnsemble(((hb.basis_state(2, 0), 3), (hb.basis_state(2, 1), 5)))
        empty_wo = DrawRecord((), WITHOUT_REPLACEMENT, 0)
        empty_w = DrawRecord((), WITH_REPLACEMENT, 0)
        assert np.allclose(conditional_distribution(e, empty_wo), [3 / 8, 5 / 8])
        assert np.allclose(conditional_distribution(e, empty_w), [3 / 8, 5 / 8])

    def test_two_up_prefix_matches_enumeration(self):
        e = z_pair_ensemble(6)
        record = DrawRecord((0, 0), WITHOUT_REPLACEMENT, 0)
        cond = conditional_distribution(e, record)
        assert np.allclose(cond, [0.25, 0.75])
        oracle = enumerate_conditional([3, 3], [0, 0])
        assert np.allclose(cond, oracle)

    def test_with_replacement_has_no_memory(self):
        e = z_pair_ensemble(6)
        for prefix in [(), (0,), (0, 0), (1, 0, 1)]:
            record = DrawRecord(prefix, WITH_REPLACEMENT, 0)
            assert np.array_equal(conditional_distribution(e, record), [0.5, 0.5])

    def test_exhausted_component_probability_zero(self):
        e = FiniteEnsemble(((hb.basis_state(2, 0), 2), (hb.basis_state(2, 1), 4)))
        record = DrawRecord((0, 0), WITHOUT_REPLACEMENT, 0)
        cond = conditional_distribution(e, record)
        assert cond[0] == 0.0
        assert cond[1] == 1.0

    def test_inconsistent_prefix_rejected(self):
        e = FiniteEnsemble(((hb.basis_state(2, 0), 2), (hb.basis_state(2, 1), 4)))
        record = DrawRecord((0, 0, 0), WITHOUT_REPLACEMENT, 0)
        with pytest.raises(ValueError, match="more often"):
            conditional_distribution(e, record)

    def test_memory_dichotomy(self):
        # Two equal-length prefixes must disagree by at least 1/(N - n) in
        # total variation without replacement; with replacement they agree
        # exactly.
        e = FiniteEnsemble(((hb.basis_state(2, 0), 4), (hb.plus_x(), 3)))
        n = 2
        rec_a = DrawRecord((0,) * n, WITHOUT_REPLACEMENT, 0)
        rec_b = DrawRecord((1,) * n, WITHOUT_REPLACEMENT, 0)
        tv = 0.5 * np.sum(
            np.abs(conditional_distribution(e, rec_a) - conditional_distribution(e, rec_b))
        )
        assert tv >= 1.0 / (e.total - n)
        rec_aw = DrawRecord((0,) * n, WITH_REPLACEMENT, 0)
        rec_bw = DrawRecord((1,) * n, WITH_REPLACEMENT, 0)
        assert np.array_equal(
            conditional_distribution(e, rec_aw), conditional_distribution(e, rec_bw)
        )


class TestSpinStats:
    def test_z_pair_has_zero_fluctuation(self):
        mean, std = total_spin_z_stats(z_pair_ensemble(100))
        assert (mean, std) == (0.0, 0.0)

    def test_x_pair_has_sqrt_n_fluctuation(self):
        mean, std = total_spin_z_stats(x_pair_ensemble(100))
        assert mean == pytest.approx(0.0, abs=1e-12)
        assert std == pytest.approx(10.0, abs=1e-12)

    def test_single_aligned_component(self):
        e = FiniteEnsemble(((hb.basis_state(2, 0), 50),))
        assert total_spin_z_stats(e) == (50.0, 0.0)

    def test_averaged_spin_is_one_over_sqrt_n(self):
        for n in (100, 400, 10_000):
            _, std = averaged_spin_stats(x_pair_ensemble(n))
            assert std == 1.0 / math.sqrt(n)

    def test_averaged_scaling_halves_when_n_quadruples(self):
        _, std_100 = averaged_spin_stats(x_pair_ensemble(100))
        _, std_400 = averaged_spin_stats(x_pair_ensemble(400))
        assert std_100 == pytest.approx(0.1)
        assert std_400 == pytest.approx(0.05)
        assert std_400 == std_100 / 2

    def test_z_pair_averaged_zero(self):
        for n in (10, 1000):
            assert averaged_spin_stats(z_pair_ensemble(n))[1] == 0.0

    def test_rejects_non_qubits(self):
        e = FiniteEnsemble(((hb.basis_state(3, 0), 2),))
        with pytest.raises(ValueError, match="qubit"):
            total_spin_z_stats(e)


class TestDespagnatExperiment:
    def test_z_preparation_deterministic(self):
        report = despagnat_experiment(100, trials=200, seed=3)
        assert report.z_prepared.empirical_std == 0.0
        assert np.all(report.z_prepared.totals == 0)

    def test_x_preparation_matches_binomial_oracle(self):
        # Oracle: totals are 2 * Binomial(N, 1/2) - N, whose standard
        # deviation is sqrt(N) = 10 at N = 100.
        report = despagnat_experiment(100, trials=10_000, seed=5)
        assert abs(report.x_prepared.empirical_std - 10.0) <= 0.5
        assert report.x_prepared.analytic_std == pytest.approx(10.0)
        assert abs(report.x_prepared.empirical_mean) <= 3 * 10.0 / math.sqrt(10_000)

    def test_shared_density_matrix_is_half_identity(self):
        report = despagnat_experiment(10, trials=5, seed=1)
        assert np.allclose(report.shared_density_matrix.entries, np.eye(2) / 2)

    def test_reproducible(self):
        a = despagnat_experiment(50, trials=100, seed=11)
        b = despagnat_experiment(50, trials=100, seed=11)
        assert np.array_equal(a.x_prepared.totals, b.x_prepared.totals)
        assert a.x_prepared.empirical_std == b.x_prepared.empirical_std

    def test_analytic_agrees_with_empirical_within_five_percent(self):
        report = despagnat_experiment(100, trials=10_000, seed=9)
        assert report.x_prepared.empirical_std == pytest.approx(
            report.x_prepared.analytic_std, rel=0.05
        )


class TestBeamMerge:
    def test_spin_reductions_identical(self):
        result = beam_merge_demo()
        assert result.spin_trace_distance <= 1e-12
        assert np.allclose(result.rho_spin_a.entries, np.eye(2) / 2, atol=1e-14)
        assert np.allclose(result.rho_spin_b.entries, np.eye(2) / 2, atol=1e-14)

    def test_path_reductions_identical(self):
        result = beam_merge_demo()
        assert result.path_trace_distance <= 1e-12
        assert np.allclose(result.rho_path_a.entries, np.eye(2) / 2, atol=1e-14)

    def test_full_matrices_distinguishable(self):
        # Oracle: eigendecompose the 4x4 difference.  The blocks are
        # +-(sigma_z - sigma_x)/4 with eigenvalues +-sqrt(2)/4, so the trace
        # distance is (1/2) * 4 * sqrt(2)/4 = 1/sqrt(2).
        result = beam_merge_demo()
        evals = np.linalg.eigvalsh(result.rho_full_a.entries - result.rho_full_b.entries)
        oracle = 0.5 * float(np.sum(np.abs(evals)))
        assert result.full_trace_distance == pytest.approx(oracle, abs=1e-12)
        assert result.full_trace_distance == pytest.approx(1 / math.sqrt(2), abs=1e-10)
        assert result.full_trace_distance > 0


class TestFrequencyConvergence:
    def test_zero_draws_gives_zero_distance(self):
        table = frequency_convergence([0.5, 0.5], [6, 60, 600], n_draws=0, seed=0)
        assert all(row.distance == 0.0 for row in table.rows)

    def test_half_half_small_collection(self):
        # Oracle: conditional_distribution after the (0, 0) prefix.
        table = frequency_convergence([0.5, 0.5], [6], n_draws=2, seed=0)
        assert table.rows[0].distance == pytest.approx(0.25, abs=1e-14)
        e = z_pair_ensemble(6)
        cond = conditional_distribution(e, DrawRecord((0, 0), WITHOUT_REPLACEMENT, 0))
        assert table.rows[0].distance == pytest.approx(abs(cond[0] - 0.5))

    def test_large_collection_closed_form(self):
        table = frequency_convergence([0.5, 0.5], [600], n_draws=2, seed=0)
        expected = abs((600 / 2 - 2) / (600 - 2) - 0.5)
        assert table.rows[0].distance == pytest.approx(expected, abs=1e-15)
        assert table.rows[0].distance == pytest.approx(1.7e-3, abs=1e-4)

    def test_distances_decrease_along_ladder(self):
        table = frequency_convergence([0.5, 0.25, 0.25], [8, 16, 64, 256], n_draws=2)
        d = table.distances()
        assert all(b < a for a, b in zip(d, d[1:]))

    def test_non_integral_counts_rejected(self):
        with pytest.raises(ValueError, match="non-integral"):
            frequency_convergence([1 / 3, 2 / 3], [10], n_draws=1)

    def test_prefix_must_be_drawable(self):
        with pytest.raises(ValueError, match="component 0"):
            frequency_convergence([0.5, 0.5], [6], n_draws=4)
