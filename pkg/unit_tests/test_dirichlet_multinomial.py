import itertools
import logging
import math
import unittest

import numpy as np

from src import dirichlet_multinomial as dm
from src import numerics
from src.dirichlet_multinomial import CountVector, DirichletPosterior
from src.exceptions import DomainError

# Configure logging at the module level
logging.basicConfig(level=logging.INFO)


class TestCountsAndPosteriors(unittest.TestCase):
    """
    Unit tests for CountVector, DirichletPosterior and the conjugate update.
    """

    def test_count_vector_frequencies(self):
        counts = CountVector.from_mapping({"a": 1, "b": 3})
        self.assertEqual(counts.total, 4)
        np.testing.assert_allclose(counts.frequencies().entries, [0.25, 0.75])

    def test_count_vector_rejects_negative_counts(self):
        with self.assertRaises(DomainError):
            CountVector(("a",), np.array([-1]))

    def test_reindex_fills_zeros_and_refuses_to_drop(self):
        counts = CountVector.from_mapping({"b": 2})
        self.assertEqual(counts.reindex(["a", "b"]).as_dict(), {"a": 0, "b": 2})
        with self.assertRaises(DomainError):
            counts.reindex(["a"])

    def test_update_adds_counts(self):
        posterior = DirichletPosterior.uniform(["a", "b"])
        updated = dm.update(posterior, CountVector.from_mapping({"a": 3}))
        self.assertEqual(updated.to_dict(), {"a": 4.0, "b": 1.0})
        self.assertEqual(posterior.to_dict(), {"a": 1.0, "b": 1.0})

    def test_update_extends_unseen_categories(self):
        posterior = DirichletPosterior.uniform(["a"])
        updated = dm.update(posterior, CountVector.from_mapping({"c": 2}), prior_scale=0.5)
        self.assertEqual(updated.category_ids, ("a", "c"))
        self.assertEqual(updated.to_dict(), {"a": 1.0, "c": 2.5})

    def test_log_mean_of_unseen_category(self):
        posterior = DirichletPosterior(("a", "b"), np.array([3.0, 5.0]))
        self.assertAlmostEqual(posterior.log_mean("a"), math.log(3.0 / 8.0))
        self.assertAlmostEqual(posterior.log_mean("z"), math.log(1.0 / 9.0))

    def test_serialization(self):
        posterior = DirichletPosterior(("x", "y"), np.array([1.5, 2.0]))
        restored = DirichletPosterior.from_dict(posterior.to_dict())
        self.assertEqual(restored.category_ids, posterior.category_ids)
        np.testing.assert_array_equal(restored.alpha, posterior.alpha)


class TestExactPredictive(unittest.TestCase):
    """
    Unit tests for the exact Dirichlet-Multinomial predictive.
    """

    def test_small_known_values(self):
        posterior = DirichletPosterior.uniform(["a", "b"])
        self.assertAlmostEqual(dm.exact_log_predictive(posterior, [1, 0]), math.log(0.5))
        # uniform over the three splits of two draws
        self.assertAlmostEqual(dm.exact_log_predictive(posterior, [1, 1]), math.log(1.0 / 3.0))

    def test_single_category_is_certain(self):
        posterior = DirichletPosterior(("a",), np.array([7.0]))
        self.assertAlmostEqual(dm.exact_log_predictive(posterior, [42]), 0.0, places=10)

    def test_probabilities_sum_to_one(self):
        posterior = DirichletPosterior(("a", "b", "c"), np.array([0.5, 2.0, 3.0]))
        total = 5
        values = [
            dm.exact_log_predictive(posterior, [i, j, total - i - j])
            for i, j in itertools.product(range(total + 1), repeat=2) if i + j <= total
        ]
        self.assertAlmostEqual(numerics.log_sum_exp(values), 0.0, places=10)

    def test_count_vector_is_aligned_by_label(self):
        posterior = DirichletPosterior(("a", "b"), np.array([2.0, 5.0]))
        swapped = CountVector(("b", "a"), np.array([4, 1]))
        self.assertAlmostEqual(
            dm.exact_log_predictive(posterior, swapped), dm.exact_log_predictive(posterior, [1, 4])
        )

    def test_dimension_mismatch(self):
        posterior = DirichletPosterior.uniform(["a", "b"])
        with self.assertRaises(DomainError):
            dm.exact_log_predictive(posterior, [1, 2, 3])
        with self.assertRaises(DomainError):
            dm.exact_log_predictive(posterior, CountVector.from_mapping({"a": 1, "c": 1}))


class TestStirlingPredictive(unittest.TestCase):
    """
    The Stirling form tracks the exact predictive in relative terms.
    """

    def _relative_error(self, alpha, counts):
        alpha, counts = np.asarray(alpha, dtype=float), np.asarray(counts, dtype=float)
        posterior = DirichletPosterior(tuple("abcdef"[:alpha.size]), alpha)
        exact = dm.exact_log_predictive(posterior, counts)
        return abs(dm.stirling_log_predictive(posterior, counts) - exact) / abs(exact)

    def test_large_counts(self):
        self.assertLessEqual(self._relative_error([500.0, 1500.0, 3000.0], [50, 150, 300]), 0.01)

    def test_small_counts(self):
        self.assertLessEqual(self._relative_error([50.0, 150.0, 300.0], [5, 15, 30]), 0.05)

    def test_error_shrinks_with_the_counts(self):
        small = self._relative_error([50.0, 150.0, 300.0], [5, 15, 30])
        large = self._relative_error([500.0, 1500.0, 3000.0], [50, 150, 300])
        self.assertLess(large, small)

    def test_single_category(self):
        posterior = DirichletPosterior(("a",), np.array([3.0]))
        self.assertAlmostEqual(dm.stirling_log_predictive(posterior, [4]), 0.0, places=12)

    def test_zero_count_is_rejected(self):
        posterior = DirichletPosterior.uniform(["a", "b"])
        with self.assertRaises(DomainError):
            dm.stirling_log_predictive(posterior, [0, 3])


class TestLaplaceAndImpacts(unittest.TestCase):
    """
    Unit tests for the mode, the separable Laplace form and the per-category impacts.
    """

    def setUp(self):
        self.rng = np.random.default_rng(2024)

    def _random_posterior(self, dimension: int, alpha_total: float) -> DirichletPosterior:
        weights = self.rng.uniform(1.0, 2.0, size=dimension)
        return DirichletPosterior(tuple(f"c{i}" for i in range(dimension)),
                                  alpha_total * weights / weights.sum())

    def test_mode(self):
        posterior = DirichletPosterior(("a", "b", "c"), np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(dm.mode(posterior, 12), [2.0, 4.0, 6.0])
        with self.assertRaises(DomainError):
            dm.mode(posterior, 0)

    def test_laplace_equals_exact_at_the_mode(self):
        posterior = DirichletPosterior(("a", "b", "c"), np.array([1.0, 2.0, 3.0]))
        counts = [2, 4, 6]
        self.assertAlmostEqual(
            dm.laplace_log_predictive(posterior, counts), dm.exact_log_predictive(posterior, counts),
            places=10,
        )
        self.assertAlmostEqual(dm.impacts(posterior, counts).deficiency, 0.0, places=14)

    def test_impacts_are_non_positive_and_sum_to_laplace_gap(self):
        posterior = DirichletPosterior(("a", "b", "c"), np.array([100.0, 300.0, 600.0]))
        counts = [30, 25, 45]
        result = dm.impacts(posterior, counts)
        self.assertTrue(np.all(result.impacts <= 0))
        self.assertAlmostEqual(
            result.deficiency,
            dm.laplace_log_predictive(posterior, counts) - result.mode_log_likelihood,
            places=10,
        )
        self.assertEqual(min(result.as_dict(), key=result.as_dict().get), "a")

    def test_worked_impacts(self):
        p = np.array([0.1, 0.3, 0.6])
        counts = [20, 25, 55]
        # a near-infinite concentration gives the multinomial limit
        limit = dm.impacts(DirichletPosterior(("a", "b", "c"), 1e12 * p), counts)
        np.testing.assert_allclose(limit.impacts, [-5.0, -5 / 12, -5 / 24], rtol=1e-6)
        # alpha' = 900 against k = 100 shrinks every impact by 0.9
        shrunk = dm.impacts(DirichletPosterior(("a", "b", "c"), 900 * p), counts)
        np.testing.assert_allclose(shrunk.impacts, [-4.5, -0.375, -0.1875], rtol=1e-9)

    def test_laplace_fidelity_near_the_mode(self):
        # zero-sum displacements of up to 20% per category, with alpha' at least 5k
        for _ in range(200):
            dimension = int(self.rng.integers(2, 7))
            alpha_total = 10 ** self.rng.uniform(3, 6)
            total = int(self.rng.integers(100, int(min(2000, alpha_total / 5)) + 1))
            posterior = self._random_posterior(dimension, alpha_total)
            p = posterior.mode_frequencies().entries
            relative = self.rng.uniform(-0.2, 0.2, size=dimension)
            relative -= (p * relative).sum()
            relative *= min(1.0, 0.2 / np.abs(relative).max())
            at_mode = dm.mode(posterior, total)
            counts = at_mode * (1 + relative)
            exact = dm.exact_log_predictive(posterior, counts)
            exact_mode = dm.exact_log_predictive(posterior, at_mode)
            error = abs(dm.laplace_log_predictive(posterior, counts) - exact)
            self.assertLessEqual(error, max(0.05 * abs(exact - exact_mode), 0.1))

    def test_restricted_hessian_is_diagonal(self):
        step = 5.0
        for dimension in (2, 3, 5):
            posterior = self._random_posterior(dimension, 1e5)
            total = 1000
            at_mode = dm.mode(posterior, total)

            def f(shift):
                return dm.exact_log_predictive(posterior, at_mode + shift)

            hessian = np.zeros((dimension, dimension))
            centre = f(np.zeros(dimension))
            for i in range(dimension):
                e_i = np.eye(dimension)[i] * step
                hessian[i, i] = (f(e_i) - 2 * centre + f(-e_i)) / step ** 2
                for j in range(i + 1, dimension):
                    e_j = np.eye(dimension)[j] * step
                    hessian[i, j] = hessian[j, i] = (
                        f(e_i + e_j) - f(e_i - e_j) - f(-e_i + e_j) + f(-e_i - e_j)
                    ) / (4 * step ** 2)

            off_diagonal = hessian[~np.eye(dimension, dtype=bool)]
            np.testing.assert_allclose(off_diagonal, off_diagonal.mean(), rtol=1e-6)
            np.testing.assert_allclose(
                off_diagonal, dm.mode_hessian(posterior, total)[0, 1], rtol=1e-4
            )

            p = posterior.mode_frequencies().entries
            diagonal_form = -posterior.alpha_total / (total * (total + posterior.alpha_total) * p)
            for _ in range(50):
                displacement = self.rng.normal(size=dimension)
                displacement -= displacement.mean()
                measured = displacement @ hessian @ displacement
                predicted = float((diagonal_form * displacement ** 2).sum())
                self.assertAlmostEqual(measured / predicted, 1.0, delta=0.01)

    def test_mode_maximizes_the_laplace_form(self):
        for _ in range(50):
            dimension = int(self.rng.integers(2, 7))
            posterior = self._random_posterior(dimension, 10 ** self.rng.uniform(3, 6))
            total = int(self.rng.integers(100, 2001))
            at_mode = dm.mode(posterior, total)
            best = dm.laplace_log_predictive(posterior, at_mode)
            for i, j in itertools.permutations(range(dimension), 2):
                for delta in (0.1, 1.0):
                    shift = np.zeros(dimension)
                    shift[i], shift[j] = delta, -delta
                    self.assertLess(dm.laplace_log_predictive(posterior, at_mode + shift), best)

    def test_mode_of_the_worked_posterior(self):
        posterior = DirichletPosterior(("a", "b", "c"), np.array([100.0, 300.0, 600.0]))
        at_mode = dm.mode(posterior, 100)
        np.testing.assert_allclose(at_mode, [10.0, 30.0, 60.0])
        best = dm.exact_log_predictive(posterior, at_mode)
        for i, j in itertools.permutations(range(3), 2):
            shift = np.zeros(3)
            shift[i], shift[j] = 1.0, -1.0
            self.assertLess(dm.exact_log_predictive(posterior, at_mode + shift), best)
            # the exact maximizer sits a fraction of a count away, about 4e-3 higher
            value = dm.exact_log_predictive(posterior, at_mode + 0.1 * shift)
            self.assertLessEqual(value, best + 5e-3)
            self.assertLess(dm.laplace_log_predictive(posterior, at_mode + 0.1 * shift),
                            dm.laplace_log_predictive(posterior, at_mode))

    def test_mode_is_near_optimal_for_the_exact_form(self):
        # the exact maximizer sits O(1/k) away from k * alpha / alpha'
        for _ in range(50):
            dimension = int(self.rng.integers(2, 7))
            posterior = self._random_posterior(dimension, 10 ** self.rng.uniform(3, 6))
            total = int(self.rng.integers(1000, 2001))
            at_mode = dm.mode(posterior, total)
            best = dm.exact_log_predictive(posterior, at_mode)
            for i, j in itertools.permutations(range(dimension), 2):
                for delta in (0.1, 1.0):
                    shift = np.zeros(dimension)
                    shift[i], shift[j] = delta, -delta
                    value = dm.exact_log_predictive(posterior, at_mode + shift)
                    self.assertLessEqual(value, best + 1e-3)


if __name__ == "__main__":
    unittest.main()
