"""Tests for the vital_features module."""

import math
import os
import tempfile
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from cpml.errors import FeatureError
from cpml.ingest import HEART_RATE, RESP_RATE, SPO2, VitalRecord
from cpml.vital_features import (
    FEATURE_NAMES,
    N_FEATURES,
    STAGES,
    bucket_fractions,
    featurize_cohort,
    featurize_record,
    load_feature_matrix,
    plausibility_issues,
    save_feature_matrix,
    stage_sample,
    summary_stats,
)

finite_samples = st.lists(
    st.floats(min_value=0.0, max_value=300.0, allow_nan=False, allow_infinity=False),
    min_size=1,
    max_size=50,
)


class TestSummaryStats(unittest.TestCase):
    """Test per-signal statistics."""

    def test_examples(self):
        """Test hand-computed statistics."""
        stats = summary_stats([12, 18, 14, 16, 20])
        self.assertEqual((stats.max, stats.min, stats.mean, stats.median), (20.0, 12.0, 16.0, 16.0))
        self.assertAlmostEqual(stats.std, math.sqrt(10), places=12)

        self.assertEqual(tuple(summary_stats([7])), (7.0, 7.0, 7.0, 7.0, 0.0))
        self.assertEqual(summary_stats([1, 2, 3, 4]).median, 2.5)

    def test_invalid_series(self):
        """Test empty and non-finite series."""
        for series in [[], [1.0, float("nan")], [float("inf")]]:
            with self.subTest(series=series):
                with self.assertRaises(FeatureError):
                    summary_stats(series)

    @settings(deadline=None)
    @given(finite_samples)
    def test_ordering_and_sort_oracle(self, series):
        """Test min <= median, mean <= max and agreement with a sort oracle."""
        stats = summary_stats(series)
        ordered = sorted(series)
        self.assertEqual(stats.min, ordered[0])
        self.assertEqual(stats.max, ordered[-1])
        middle = len(ordered) // 2
        median = ordered[middle] if len(ordered) % 2 else (ordered[middle - 1] + ordered[middle]) / 2
        self.assertAlmostEqual(stats.median, median, places=9)
        self.assertLessEqual(stats.min, stats.mean)
        self.assertLessEqual(stats.mean, stats.max)
        self.assertGreaterEqual(stats.std, 0.0)

    @settings(deadline=None)
    @given(finite_samples, st.randoms(use_true_random=False))
    def test_permutation_invariant(self, series, random):
        """Test that sample order does not change max, min and median."""
        shuffled = list(series)
        random.shuffle(shuffled)
        first, second = summary_stats(series), summary_stats(shuffled)
        self.assertEqual((first.max, first.min, first.median), (second.max, second.min, second.median))
        self.assertAlmostEqual(first.mean, second.mean, delta=1e-9 * max(1.0, abs(first.mean)))


class TestStaging(unittest.TestCase):
    """Test severity stage assignment."""

    def test_examples(self):
        """Test the documented stage of representative samples."""
        test_cases = [
            (HEART_RATE, 115, "Severe"),
            (HEART_RATE, 89.9, "Normal"),
            (HEART_RATE, 90, "Mild"),
            (HEART_RATE, 100, "Moderate"),
            (HEART_RATE, 110, "Severe"),
            (HEART_RATE, 120, "VerySevere"),
            (RESP_RATE, 10, "Low"),
            (RESP_RATE, 12, "Normal"),
            (RESP_RATE, 18, "High"),
            (RESP_RATE, 20, "Abnormal"),
            (SPO2, 78, "VerySevere"),
            (SPO2, 80, "VerySevere"),
            (SPO2, 85, "Severe"),
            (SPO2, 90, "Moderate"),
            (SPO2, 92, "Mild"),
            (SPO2, 92.01, "Normal"),
        ]
        for kind, value, expected in test_cases:
            with self.subTest(kind=kind, value=value):
                self.assertEqual(stage_sample(kind, value), expected)

    def test_grid_partition(self):
        """Test that a fine grid over [0, 300] maps each value to one known stage."""
        grid = np.round(np.arange(0.0, 300.0001, 0.05), 2)
        for kind in (HEART_RATE, RESP_RATE, SPO2):
            with self.subTest(kind=kind):
                stages = [stage_sample(kind, float(value)) for value in grid]
                self.assertTrue(set(stages) <= set(STAGES[kind]))
                self.assertEqual(set(stages), set(STAGES[kind]))

    def test_non_finite(self):
        """Test that NaN cannot be staged."""
        with self.assertRaises(FeatureError):
            stage_sample(HEART_RATE, float("nan"))

    def test_bucket_fractions(self):
        """Test stage occupancy examples."""
        self.assertEqual(
            bucket_fractions(HEART_RATE, [85, 85, 95, 125]),
            {"Normal": 0.5, "Mild": 0.25, "Moderate": 0.0, "Severe": 0.0, "VerySevere": 0.25},
        )
        self.assertEqual(bucket_fractions(RESP_RATE, [15, 15, 15])["Normal"], 1.0)
        self.assertEqual(set(bucket_fractions(SPO2, [95, 91, 89, 84, 79]).values()), {0.2})

    def test_bucket_fractions_empty(self):
        """Test that an empty series is an error."""
        with self.assertRaises(FeatureError):
            bucket_fractions(SPO2, [])

    @settings(deadline=None)
    @given(st.sampled_from([HEART_RATE, RESP_RATE, SPO2]), finite_samples)
    def test_fractions_sum_to_one(self, kind, series):
        """Test that stage fractions always sum to 1."""
        fractions = bucket_fractions(kind, series)
        self.assertAlmostEqual(sum(fractions.values()), 1.0, delta=1e-12)
        self.assertTrue(all(0.0 <= value <= 1.0 for value in fractions.values()))


class TestFeaturizeRecord(unittest.TestCase):
    """Test the 29-feature vector."""

    def test_constant_record(self):
        """Test constant series."""
        record = VitalRecord("v1", 0, (80.0, 80.0), (96.0,), (15.0, 15.0, 15.0))
        vector = featurize_record(record)

        self.assertEqual(vector.shape, (29,))
        self.assertEqual(N_FEATURES, 29)
        features = dict(zip(FEATURE_NAMES, vector.tolist()))
        self.assertEqual([features[f"hr_{stat}"] for stat in ("max", "min", "mean", "median", "std")],
                         [80.0, 80.0, 80.0, 80.0, 0.0])
        self.assertEqual(features["rr_mean"], 15.0)
        self.assertEqual(features["spo2_median"], 96.0)
        self.assertEqual(features["hr_frac_normal"], 1.0)
        self.assertEqual(features["rr_frac_normal"], 1.0)
        self.assertEqual(features["spo2_frac_normal"], 1.0)
        self.assertEqual(sum(vector[15:]), 3.0)

    def test_feature_order(self):
        """Test the documented column order."""
        self.assertEqual(FEATURE_NAMES[:5], ("hr_max", "hr_min", "hr_mean", "hr_median", "hr_std"))
        self.assertEqual(FEATURE_NAMES[5], "rr_max")
        self.assertEqual(FEATURE_NAMES[10], "spo2_max")
        self.assertEqual(FEATURE_NAMES[15:20], ("hr_frac_normal", "hr_frac_mild", "hr_frac_moderate",
                                                "hr_frac_severe", "hr_frac_verysevere"))
        self.assertEqual(FEATURE_NAMES[20:24], ("rr_frac_normal", "rr_frac_low", "rr_frac_high", "rr_frac_abnormal"))
        self.assertEqual(FEATURE_NAMES[24], "spo2_frac_normal")

    def test_composition(self):
        """Test a record built from the bucket examples."""
        record = VitalRecord("v1", 1, (85.0, 85.0, 95.0, 125.0), (95.0, 91.0, 89.0, 84.0, 79.0), (15.0, 15.0, 15.0))
        vector = featurize_record(record)
        self.assertEqual(vector[15:20].tolist(), [0.5, 0.25, 0.0, 0.0, 0.25])
        self.assertEqual(vector[20:24].tolist(), [1.0, 0.0, 0.0, 0.0])
        self.assertEqual(vector[24:29].tolist(), [0.2] * 5)
        self.assertEqual(vector[5:10].tolist(), [15.0, 15.0, 15.0, 15.0, 0.0])

    def test_empty_series_names_signal(self):
        """Test that an empty series is reported by signal."""
        record = VitalRecord("v1", 0, (80.0,), (), (15.0,))
        with self.assertRaises(FeatureError) as context:
            featurize_record(record)
        self.assertIn("SPO2", str(context.exception))

    def test_cohort(self):
        """Test stacking records in order."""
        records = [
            VitalRecord("v1", 0, (80.0,), (96.0,), (15.0,)),
            VitalRecord("v2", 1, (110.0,), (88.0,), (22.0,)),
        ]
        matrix = featurize_cohort(records)
        self.assertEqual(matrix.shape, (2, 29))
        self.assertEqual(matrix[1, 0], 110.0)
        self.assertEqual(featurize_cohort([]).shape, (0, 29))


class TestPlausibilityAndExport(unittest.TestCase):
    """Test the plausibility report and feature matrix files."""

    def test_plausibility_issues(self):
        """Test that out-of-range samples are listed, not rejected."""
        records = [VitalRecord("v1", 0, (80.0, 310.0), (101.0, 97.0), (-1.0,))]
        issues = plausibility_issues(records)
        self.assertEqual([(issue.signal, issue.position, issue.value) for issue in issues],
                         [(HEART_RATE, 1, 310.0), (RESP_RATE, 0, -1.0), (SPO2, 0, 101.0)])
        self.assertEqual(featurize_record(records[0]).shape, (29,))

    def test_feature_matrix_round_trip(self):
        """Test that the CSV export preserves values exactly."""
        records = [
            VitalRecord("v1", 0, (80.1, 81.7), (96.3,), (15.0, 16.1)),
            VitalRecord("v2", 1, (101.0,), (88.8, 90.2, 92.0), (21.3,)),
        ]
        matrix = featurize_cohort(records)
        with tempfile.TemporaryDirectory() as temp_dir:
            path = save_feature_matrix(os.path.join(temp_dir, "features.csv"), ["v1", "v2"], [0, 1], matrix)
            ids, labels, loaded, names = load_feature_matrix(path)
        self.assertEqual(ids, ["v1", "v2"])
        self.assertEqual(labels.tolist(), [0, 1])
        self.assertEqual(names, list(FEATURE_NAMES))
        np.testing.assert_array_equal(loaded, matrix)


if __name__ == "__main__":
    unittest.main()
