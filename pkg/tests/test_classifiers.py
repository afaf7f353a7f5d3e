"""Tests for the classifiers module."""

import math
import os
import tempfile
import unittest

import numpy as np
from scipy.stats import multivariate_normal

from cpml.classifiers import (
    ADABOOST,
    MODEL_TYPES,
    QDA,
    SVM,
    AdaBoostModel,
    QdaModel,
    Stump,
    SvmModel,
    ada_score,
    best_stump,
    default_gamma,
    load_model,
    model_from_dict,
    predict,
    pseudo_inverse,
    qda_score,
    rbf_kernel,
    save_model,
    svm_dual_objective,
    svm_kkt_violations,
    svm_score,
    to_signed_labels,
    train_adaboost,
    train_classifier,
    train_qda,
    train_svm,
)
from cpml.errors import ConvergenceError, DimensionError, ModelFitError


def overlapping_classes(rng, n_per_class, n_features, shift=1.0):
    """Two Gaussian clouds with 0/1 labels."""
    X = np.vstack([rng.normal(size=(n_per_class, n_features)),
                   rng.normal(size=(n_per_class, n_features)) + shift])
    y = np.array([0] * n_per_class + [1] * n_per_class)
    return X, y


def grid_dual_optimum(X, signed, C, gamma, steps=41):
    """Best dual objective over a grid of feasible alphas for 4 points."""
    kernel = rbf_kernel(X, X, gamma)
    axis = np.linspace(0.0, C, steps)
    a1, a2, a3 = (grid.ravel() for grid in np.meshgrid(axis, axis, axis, indexing="ij"))
    a4 = -signed[3] * (a1 * signed[0] + a2 * signed[1] + a3 * signed[2])
    feasible = (a4 >= -1e-12) & (a4 <= C + 1e-12)
    alphas = np.column_stack([a1, a2, a3, np.clip(a4, 0.0, C)])[feasible]
    coefficients = alphas * signed
    values = alphas.sum(axis=1) - 0.5 * np.einsum("ij,jk,ik->i", coefficients, kernel, coefficients)
    return float(values.max())


class TestLabels(unittest.TestCase):
    """Test label handling shared by the trainers."""

    def test_to_signed_labels(self):
        """Test {0,1} and {-1,+1} inputs."""
        test_cases = [
            ([0, 1, 1], [-1.0, 1.0, 1.0]),
            ([-1, 1], [-1.0, 1.0]),
            ([1, 1], [1.0, 1.0]),
        ]
        for labels, expected in test_cases:
            with self.subTest(labels=labels):
                self.assertEqual(to_signed_labels(labels).tolist(), expected)

    def test_invalid_labels(self):
        """Test labels outside both encodings."""
        with self.assertRaises(ValueError):
            to_signed_labels([0, 2])

    def test_single_class(self):
        """Test that every trainer needs both classes."""
        X = np.arange(8.0).reshape(4, 2)
        for model_type in MODEL_TYPES:
            with self.subTest(model_type=model_type):
                with self.assertRaises(ModelFitError):
                    train_classifier(model_type, X, [1, 1, 1, 1])

    def test_unknown_model_type(self):
        """Test dispatch on an unknown name."""
        with self.assertRaises(ValueError):
            train_classifier("forest", np.zeros((2, 1)), [0, 1])


class TestSvm(unittest.TestCase):
    """Test the SMO-trained RBF SVM."""

    def test_default_gamma(self):
        """Test the automatic RBF width."""
        X = np.array([[0.0, 0.0], [2.0, 2.0], [4.0, 4.0]])
        self.assertAlmostEqual(default_gamma(X), 1.0 / (2 * 4.0))
        self.assertEqual(default_gamma(np.ones((5, 4))), 0.25)

    def test_brute_force_qp(self):
        """Test SMO against a grid search on 200 random 4-point problems."""
        rng = np.random.default_rng(0)
        for trial in range(200):
            X = rng.normal(size=(4, 2)) * 1.5
            y = np.array([1, 0, int(rng.integers(0, 2)), int(rng.integers(0, 2))])
            signed = to_signed_labels(y)
            model = train_svm(X, y, C=1.0, gamma=0.5, tol=1e-5)
            alphas = np.zeros(4)
            alphas[model.support_indices] = np.abs(model.alphas)
            with self.subTest(trial=trial):
                self.assertAlmostEqual(float(alphas @ signed), 0.0, delta=1e-9)
                self.assertTrue(np.all(alphas >= 0.0) and np.all(alphas <= 1.0))
                self.assertGreaterEqual(svm_dual_objective(X, y, alphas, 0.5),
                                        grid_dual_optimum(X, signed, 1.0, 0.5) - 1e-4)

    def test_kkt_conditions(self):
        """Test KKT conditions at the default tolerance."""
        rng = np.random.default_rng(1)
        for trial in range(20):
            X, y = overlapping_classes(rng, 15, 3)
            for C in (0.5, 1.0, 10.0):
                model = train_svm(X, y, C=C, tol=1e-3)
                with self.subTest(trial=trial, C=C):
                    self.assertLess(model.kkt_gap, 1e-3)
                    self.assertLessEqual(float(svm_kkt_violations(model, X, y).max()), 1e-3 + 1e-8)

    def test_small_problems_meet_kkt(self):
        """Test KKT conditions on the 4-point problems at the default tolerance."""
        rng = np.random.default_rng(2)
        for trial in range(200):
            X = rng.normal(size=(4, 2))
            y = np.array([0, 1, int(rng.integers(0, 2)), int(rng.integers(0, 2))])
            model = train_svm(X, y)
            with self.subTest(trial=trial):
                self.assertLessEqual(float(svm_kkt_violations(model, X, y).max()), 1e-3 + 1e-8)

    def test_separable_data(self):
        """Test that well separated clusters are classified correctly."""
        rng = np.random.default_rng(3)
        X, y = overlapping_classes(rng, 20, 2, shift=8.0)
        model = train_svm(X, y, C=10.0)
        predictions = [predict(model, row) for row in X]
        self.assertEqual(predictions, y.tolist())
        self.assertGreater(svm_score(model, X[-1]), 0.0)
        self.assertLess(svm_score(model, X[0]), 0.0)

    def test_two_point_solution(self):
        """Test the closed-form dual solution for x = -1 and x = +1 at gamma 0.5."""
        X, y = np.array([[-1.0], [1.0]]), [0, 1]
        coupling = math.exp(-2.0)
        test_cases = [
            # (C, alpha magnitude, score at x = +1)
            (10.0, 1.0 / (1.0 - coupling), 1.0),
            (1.0, 1.0, 1.0 - coupling),
        ]
        for C, magnitude, score_at_one in test_cases:
            with self.subTest(C=C):
                model = train_svm(X, y, C=C, gamma=0.5)
                by_index = dict(zip(model.support_indices, model.alphas))
                self.assertAlmostEqual(by_index[0], -magnitude, delta=1e-9)
                self.assertAlmostEqual(by_index[1], magnitude, delta=1e-9)
                self.assertAlmostEqual(model.bias, 0.0, delta=1e-9)
                self.assertAlmostEqual(svm_score(model, [1.0]), score_at_one, delta=1e-9)
                self.assertAlmostEqual(svm_score(model, [0.0]), 0.0, delta=1e-9)

    def test_far_rows_score_bias(self):
        """Test that a row far from every support vector scores the bias."""
        X, y = np.array([[0.0], [1.0], [2.0], [5.0]]), [0, 1, 1, 1]
        for gamma in (5.0, 50.0, 500.0):
            with self.subTest(gamma=gamma):
                model = train_svm(X, y, gamma=gamma)
                self.assertAlmostEqual(svm_score(model, [40.0]), model.bias, delta=1e-12)

    def test_decision_function_matches_score(self):
        """Test the vectorized scores against per-row scoring."""
        rng = np.random.default_rng(4)
        X, y = overlapping_classes(rng, 25, 4)
        model = train_svm(X, y)
        vectorized = model.decision_function(X)
        np.testing.assert_allclose(vectorized, [model.score(row) for row in X], atol=1e-12)

    def test_iteration_budget(self):
        """Test that an exhausted budget raises with diagnostics."""
        rng = np.random.default_rng(5)
        X, y = overlapping_classes(rng, 10, 2, shift=0.5)
        with self.assertRaises(ConvergenceError) as context:
            train_svm(X, y, max_iter=1)
        self.assertEqual(context.exception.diagnostics["iterations"], 1)
        self.assertIn("kkt_gap", str(context.exception))

    def test_invalid_parameters(self):
        """Test non-positive C and gamma."""
        X, y = np.array([[0.0], [1.0]]), [0, 1]
        with self.assertRaises(ValueError):
            train_svm(X, y, C=0.0)
        with self.assertRaises(ValueError):
            train_svm(X, y, gamma=-1.0)

    def test_dimension_mismatch(self):
        """Test scoring a row of the wrong length."""
        model = train_svm(np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]), [0, 1, 0, 1])
        with self.assertRaises(DimensionError):
            model.score([1.0, 2.0, 3.0])
        with self.assertRaises(DimensionError):
            model.decision_function(np.zeros((2, 3)))

    def test_threshold_tie_goes_positive(self):
        """Test that a score equal to the threshold predicts 1."""
        model = SvmModel(support_vectors=np.zeros((0, 2)), alphas=np.zeros(0), bias=0.0, gamma=1.0, C=1.0)
        self.assertEqual(predict(model, [3.0, 4.0]), 1)
        self.assertEqual(predict(model, [3.0, 4.0], threshold=0.1), 0)
        self.assertEqual(model.predict([3.0, 4.0], threshold=-0.1), 1)


class TestQda(unittest.TestCase):
    """Test quadratic discriminant analysis."""

    def test_closed_form_boundary(self):
        """Test the 1-D equal-variance case with boundary at x = 1."""
        X = np.array([[-2.0], [-1.0], [0.0], [1.0], [2.0], [0.0], [1.0], [2.0], [3.0], [4.0]])
        y = [0] * 5 + [1] * 5
        model = train_qda(X, y)

        np.testing.assert_allclose(model.means.ravel(), [0.0, 2.0])
        np.testing.assert_allclose(model.covariances.ravel(), [2.5, 2.5])
        self.assertLess(abs(qda_score(model, [1.0])), 1e-12)
        self.assertLess(qda_score(model, [1.0 - 1e-9]), 0.0)
        self.assertGreater(qda_score(model, [1.0 + 1e-9]), 0.0)
        self.assertGreater(qda_score(model, [1.5]), 0.0)
        self.assertAlmostEqual(qda_score(model, [1.5]), (4 * 1.5 - 4) / 5.0, places=12)

    def test_gaussian_log_likelihood_oracle(self):
        """Test full-rank scores against scipy's multivariate normal."""
        rng = np.random.default_rng(6)
        negatives = rng.normal(size=(40, 3)) @ np.diag([1.0, 2.0, 0.5])
        positives = rng.normal(size=(20, 3)) + [1.0, -1.0, 0.5]
        X = np.vstack([negatives, positives])
        y = [0] * 40 + [1] * 20
        model = train_qda(X, y)

        for row in rng.normal(size=(10, 3)):
            expected = (
                multivariate_normal.logpdf(row, positives.mean(axis=0), np.cov(positives, rowvar=False))
                - multivariate_normal.logpdf(row, negatives.mean(axis=0), np.cov(negatives, rowvar=False))
                + math.log(20 / 60) - math.log(40 / 60)
            )
            with self.subTest(row=row.tolist()):
                self.assertAlmostEqual(qda_score(model, row), expected, places=8)

    def test_rank_deficient_class(self):
        """Test that a singular class covariance still trains."""
        X = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 0.0],
                      [3.0, 0.0, 1.0], [4.0, 1.0, 0.0], [5.0, 0.5, 2.0], [3.5, 2.0, 1.0]])
        y = [0, 0, 1, 1, 1, 1]
        model = train_qda(X, y)
        self.assertTrue(np.all(np.isfinite(model.decision_function(X))))
        self.assertGreater(qda_score(model, [4.0, 1.0, 1.0]), qda_score(model, [0.5, 0.5, 0.0]))

    def test_pseudo_inverse(self):
        """Test the Moore-Penrose properties and the cutoff."""
        covariance = np.array([[2.0, 0.0, 0.0], [0.0, 1e-14, 0.0], [0.0, 0.0, 4.0]])
        inverse, log_det = pseudo_inverse(covariance)
        np.testing.assert_allclose(inverse, np.diag([0.5, 0.0, 0.25]), atol=1e-12)
        self.assertAlmostEqual(log_det, math.log(8.0))
        full = np.array([[2.0, 0.5], [0.5, 1.0]])
        inverse, _ = pseudo_inverse(full)
        np.testing.assert_allclose(inverse, np.linalg.inv(full), atol=1e-12)
        np.testing.assert_array_equal(pseudo_inverse(np.zeros((2, 2)))[0], np.zeros((2, 2)))

    def test_too_few_samples(self):
        """Test that each class needs two samples."""
        with self.assertRaises(ModelFitError):
            train_qda(np.array([[0.0], [1.0], [2.0]]), [0, 0, 1])


class TestAdaBoost(unittest.TestCase):
    """Test AdaBoost over decision stumps."""

    def replay_rounds(self, model, X, y):
        """Recompute sample weights round by round from the recorded stumps."""
        signed = to_signed_labels(y)
        weights = np.full(X.shape[0], 1.0 / X.shape[0])
        for (stump, alpha), recorded_error in zip(model.rounds, model.round_errors):
            predictions = stump.predict_all(X)
            error = float(weights[predictions != signed].sum())
            self.assertAlmostEqual(max(error, 1e-10), recorded_error, delta=1e-12)
            self.assertLess(error, 0.5)
            weights = weights * np.exp(-alpha * signed * predictions)
            weights = weights / weights.sum()
            self.assertAlmostEqual(float(weights.sum()), 1.0, delta=1e-12)
            if error > 1e-10:
                reweighted = float(weights[predictions != signed].sum())
                self.assertAlmostEqual(reweighted, 0.5, delta=1e-10)

    def test_theorem_checks(self):
        """Test weight normalization, reweighted error and the training error bound."""
        rng = np.random.default_rng(7)
        for trial in range(10):
            X, y = overlapping_classes(rng, 30, 3, shift=0.8)
            model = train_adaboost(X, y, n_rounds=25)
            with self.subTest(trial=trial):
                self.replay_rounds(model, X, y)
                predictions = np.array([predict(model, row) for row in X])
                training_error = float(np.mean(predictions != y))
                self.assertLessEqual(training_error, model.training_error_bound() + 1e-12)
                self.assertEqual(len(model.round_errors), len(model.rounds))

    def test_perfect_stump_stops(self):
        """Test that a perfect first stump ends boosting."""
        X = np.array([[0.0, 5.0], [1.0, 3.0], [2.0, 4.0], [3.0, 1.0]])
        y = [0, 0, 1, 1]
        model = train_adaboost(X, y, n_rounds=10)
        self.assertEqual(len(model.rounds), 1)
        stump, alpha = model.rounds[0]
        self.assertEqual(stump, Stump(feature=0, threshold=1.5, polarity=1))
        self.assertAlmostEqual(alpha, 0.5 * math.log((1 - 1e-10) / 1e-10))
        self.assertEqual([predict(model, row) for row in X], y)

    def test_single_round_examples(self):
        """Test one round on three points: a perfect split and an error of one third."""
        X = np.array([[1.0], [2.0], [3.0]])

        model = train_adaboost(X, [1, 1, 0], n_rounds=1)
        self.assertEqual(model.rounds[0][0], Stump(feature=0, threshold=2.5, polarity=-1))
        self.assertEqual([predict(model, row) for row in X], [1, 1, 0])

        model = train_adaboost(X, [1, 0, 1], n_rounds=1)
        self.assertEqual(len(model.rounds), 1)
        self.assertAlmostEqual(model.round_errors[0], 1.0 / 3.0, delta=1e-12)
        self.assertAlmostEqual(model.rounds[0][1], 0.5 * math.log(2.0), delta=1e-12)

    def test_best_stump_tie_break(self):
        """Test ties: lowest feature, then lowest threshold, then polarity +1."""
        X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        signed = np.array([-1.0, 1.0, -1.0, 1.0])
        stump, error = best_stump(X, signed, np.full(4, 0.25))
        self.assertEqual(stump.feature, 0)
        self.assertEqual(stump.threshold, 0.5)
        self.assertEqual(stump.polarity, 1)
        self.assertAlmostEqual(error, 0.25)

    def test_unlearnable(self):
        """Test constant features."""
        with self.assertRaises(ModelFitError):
            train_adaboost(np.ones((6, 2)), [0, 1, 0, 1, 0, 1])

    def test_score_is_weighted_vote(self):
        """Test that the score sums alpha times stump output."""
        model = AdaBoostModel(rounds=[(Stump(0, 0.5, 1), 0.7), (Stump(1, 2.0, -1), 0.2)], n_rounds=2,
                              n_features_in=2)
        self.assertAlmostEqual(ada_score(model, [1.0, 3.0]), 0.7 - 0.2)
        self.assertAlmostEqual(ada_score(model, [0.0, 0.0]), -0.7 + 0.2)

    def test_invalid_rounds(self):
        """Test a non-positive round count."""
        with self.assertRaises(ValueError):
            train_adaboost(np.array([[0.0], [1.0]]), [0, 1], n_rounds=0)


class TestSerialization(unittest.TestCase):
    """Test saving and loading classifiers."""

    def setUp(self):
        """Set up test fixtures."""
        rng = np.random.default_rng(8)
        self.X, self.y = overlapping_classes(rng, 20, 3)

    def test_round_trip(self):
        """Test that every model scores identically after reload."""
        with tempfile.TemporaryDirectory() as temp_dir:
            for model_type in MODEL_TYPES:
                with self.subTest(model_type=model_type):
                    model = train_classifier(model_type, self.X, self.y)
                    path = save_model(model, os.path.join(temp_dir, f"model_{model_type}.json"),
                                      {"seed": 0, "config_digest": "abc"})
                    loaded = load_model(path)
                    self.assertIsInstance(loaded, type(model))
                    np.testing.assert_array_equal(loaded.decision_function(self.X), model.decision_function(self.X))

    def test_model_types(self):
        """Test the model_type field of each document."""
        expected = {SVM: SvmModel, QDA: QdaModel, ADABOOST: AdaBoostModel}
        for model_type, cls in expected.items():
            with self.subTest(model_type=model_type):
                model = train_classifier(model_type, self.X, self.y)
                self.assertIsInstance(model, cls)
                self.assertEqual(model.to_dict()["model_type"], model_type)

    def test_invalid_documents(self):
        """Test unknown types and schema versions."""
        document = train_classifier(QDA, self.X, self.y).to_dict()
        with self.assertRaises(ValueError):
            model_from_dict(dict(document, model_type="forest"))
        with self.assertRaises(ValueError):
            model_from_dict(dict(document, schema_version=99))


if __name__ == "__main__":
    unittest.main()
