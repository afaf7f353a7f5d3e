"""Tests for the synthetic module."""

import math
import unittest
from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import norm

from cpml.errors import ConfigError
from cpml.evaluation import auc
from cpml.ingest import HEART_RATE, RESP_RATE, SPO2
from cpml.synthetic import (
    MARKER_TOKENS,
    NotesSynthConfig,
    SignalDistribution,
    SynthConfig,
    VitalsSynthConfig,
    analytic_auc_target,
    draw_labels,
    generate_notes_corpus,
    generate_vitals_cohort,
    normal_cdf,
    synth_config_from_dict,
    synthetic_vocabulary,
    token_distributions,
    truncated_normal,
)
from cpml.text_features import DEFAULT_STOP_WORDS, prepare_corpus
from cpml.utils import make_rng


def single_shift_config(n_records=200, shift=20.0, within_std=0.0, **kwargs):
    """Only heart rate differs between classes."""
    signals = {
        HEART_RATE: SignalDistribution(80.0, 80.0 + shift, 10.0, 10.0, within_std),
        RESP_RATE: SignalDistribution(16.0, 16.0, 2.0, 2.0, 1.0),
        SPO2: SignalDistribution(95.0, 95.0, 1.5, 1.5, 0.5),
    }
    return SynthConfig(n_records=n_records, vitals=VitalsSynthConfig(signals=signals), **kwargs)


def hanley_mcneil_se(area, n_pos, n_neg):
    """Standard error of an empirical AUC."""
    q1 = area / (2 - area)
    q2 = 2 * area * area / (1 + area)
    variance = (area * (1 - area) + (n_pos - 1) * (q1 - area ** 2) + (n_neg - 1) * (q2 - area ** 2)) / (n_pos * n_neg)
    return math.sqrt(variance)


class TestLabels(unittest.TestCase):
    """Test label drawing."""

    def test_exact_positive_count(self):
        """Test that the positive count is fixed at round(prevalence * n)."""
        test_cases = [(1000, 0.25, 7, 250), (31, 0.5, 0, 16), (10, 0.1, 3, 1)]
        for n, prevalence, seed, expected in test_cases:
            with self.subTest(n=n, prevalence=prevalence):
                self.assertEqual(int(draw_labels(n, prevalence, seed).sum()), expected)

    def test_cohort_prevalence(self):
        """Test the count of positive records in a generated cohort."""
        records = generate_vitals_cohort(SynthConfig(n_records=1000, prevalence=0.25), seed=7)
        self.assertEqual(sum(record.label for record in records), 250)
        self.assertEqual(records[0].record_id, "v000001")


class TestVitalsCohort(unittest.TestCase):
    """Test vital-sign cohort generation."""

    def test_determinism(self):
        """Test that the same seed repeats and another seed differs."""
        config = SynthConfig(n_records=50)
        self.assertEqual(generate_vitals_cohort(config, seed=3), generate_vitals_cohort(config, seed=3))
        self.assertNotEqual(generate_vitals_cohort(config, seed=3), generate_vitals_cohort(config, seed=4))
        self.assertEqual(generate_vitals_cohort(replace(config, seed=3)), generate_vitals_cohort(config, seed=3))

    def test_records_independent_of_cohort_size(self):
        """Test that a record's draws depend only on seed, index and label."""
        small = generate_vitals_cohort(SynthConfig(n_records=10), seed=5)
        large = generate_vitals_cohort(SynthConfig(n_records=30), seed=5)
        matched = [(a, b) for a, b in zip(small, large) if a.label == b.label]
        self.assertTrue(matched)
        for first, second in matched:
            with self.subTest(record=first.record_id):
                self.assertEqual(first, second)

    def test_series_lengths_and_range(self):
        """Test configured lengths and the [0, 300] physiologic range."""
        signals = {
            HEART_RATE: SignalDistribution(5.0, 295.0, 60.0, 60.0, 40.0),
            RESP_RATE: SignalDistribution(2.0, 2.0, 5.0, 5.0, 5.0),
            SPO2: SignalDistribution(95.0, 95.0, 2.0, 2.0, 1.0),
        }
        config = SynthConfig(n_records=60, vitals=VitalsSynthConfig(min_samples=3, max_samples=7, signals=signals))
        for record in generate_vitals_cohort(config, seed=1):
            for name in (HEART_RATE, RESP_RATE, SPO2):
                series = record.series(name)
                with self.subTest(record=record.record_id, signal=name):
                    self.assertTrue(3 <= len(series) <= 7)
                    self.assertTrue(all(0.0 <= value <= 300.0 for value in series))

    def test_zero_within_std(self):
        """Test that a noiseless signal repeats its record baseline."""
        for record in generate_vitals_cohort(single_shift_config(n_records=20), seed=2):
            with self.subTest(record=record.record_id):
                self.assertEqual(len(set(record.heart_rate)), 1)

    def test_truncated_normal(self):
        """Test resampling instead of clipping."""
        values = truncated_normal(make_rng(0), 1.0, 5.0, 2000)
        self.assertTrue(np.all(values >= 0.0))
        self.assertFalse(np.any(values == 0.0))
        np.testing.assert_array_equal(truncated_normal(make_rng(0), 42.0, 0.0, 3), [42.0, 42.0, 42.0])
        with self.assertRaises(ConfigError):
            truncated_normal(make_rng(0), -1000.0, 1.0, 1)

    @pytest.mark.slow
    def test_empirical_auc_converges(self):
        """Test the generating feature's AUC against the analytic target at n = 10,000."""
        config = single_shift_config(n_records=10000, prevalence=0.5)
        config = replace(config, vitals=replace(config.vitals, min_samples=1, max_samples=1))
        records = generate_vitals_cohort(config, seed=11)
        scores = [record.heart_rate[0] for record in records]
        labels = [record.label for record in records]
        target = analytic_auc_target(config)
        empirical = auc(scores, labels)
        self.assertLessEqual(abs(empirical - target), 3 * hanley_mcneil_se(target, 5000, 5000))


class TestNotesCorpus(unittest.TestCase):
    """Test clinical note generation."""

    def test_determinism(self):
        """Test that the same seed repeats."""
        config = SynthConfig(n_records=30)
        self.assertEqual(generate_notes_corpus(config, seed=9), generate_notes_corpus(config, seed=9))
        self.assertNotEqual(generate_notes_corpus(config, seed=9), generate_notes_corpus(config, seed=10))

    def test_distributions_are_valid(self):
        """Test that both token distributions sum to one."""
        for boost in (0.0, 8.0, 40.0):
            with self.subTest(boost=boost):
                terms, negative, positive = token_distributions(NotesSynthConfig(marker_boost=boost))
                self.assertEqual(len(terms), len(negative))
                self.assertAlmostEqual(float(negative.sum()), 1.0, delta=1e-12)
                self.assertAlmostEqual(float(positive.sum()), 1.0, delta=1e-12)
                self.assertTrue(np.all(positive > 0))

    def test_zero_boost_is_null(self):
        """Test that boost 0 gives one distribution and similar marker rates."""
        notes = NotesSynthConfig(marker_boost=0.0, missing_rate=0.0)
        _, negative, positive = token_distributions(notes)
        np.testing.assert_array_equal(negative, positive)

        config = SynthConfig(n_records=600, prevalence=0.5, notes=notes)
        ratio = self.marker_rate_ratio(generate_notes_corpus(config, seed=1), notes.marker_count)
        self.assertTrue(0.7 < ratio < 1.4, ratio)

    def test_boost_raises_marker_rate(self):
        """Test marker frequency ratio against the configured multinomials."""
        notes = NotesSynthConfig(marker_boost=8.0, missing_rate=0.0)
        config = SynthConfig(n_records=400, prevalence=0.5, notes=notes)
        ratio = self.marker_rate_ratio(generate_notes_corpus(config, seed=2), notes.marker_count)
        self.assertTrue(6.0 < ratio < 12.0, ratio)

    def marker_rate_ratio(self, records, marker_count):
        """Positive over negative marker frequency per token."""
        markers = set(MARKER_TOKENS[:marker_count])
        rates = {}
        for label in (0, 1):
            corpus = prepare_corpus(record.text for record in records if record.label == label)
            tokens = [token for tokens in corpus for token in tokens]
            rates[label] = sum(token in markers for token in tokens) / len(tokens)
        return rates[1] / rates[0]

    def test_stop_words_and_missing_notes(self):
        """Test that stop words appear and absent notes are generated."""
        notes = NotesSynthConfig(missing_rate=0.2, stop_word_rate=0.3)
        records = generate_notes_corpus(SynthConfig(n_records=200, notes=notes), seed=4)
        self.assertTrue(any(record.text is None for record in records))
        tokens = [token for tokens in prepare_corpus(record.text for record in records) for token in tokens]
        stop_share = sum(token in DEFAULT_STOP_WORDS for token in tokens) / len(tokens)
        self.assertGreater(stop_share, 0.2)
        self.assertEqual(records[0].admission_id, "h000001")

    def test_vocabulary_is_alphabetic(self):
        """Test that filler terms survive tokenization unchanged."""
        terms = synthetic_vocabulary(1000)
        self.assertEqual(len(set(terms)), 1000)
        self.assertEqual(prepare_corpus([" ".join(terms)])[0], terms)


class TestConfig(unittest.TestCase):
    """Test generator configuration."""

    def test_from_dict(self):
        """Test nested sections and partial signal overrides."""
        config = synth_config_from_dict({
            "n_records": 300,
            "prevalence": 0.4,
            "vitals": {"signals": {"HR": {"positive_mean": 85.0}}},
            "notes": {"marker_boost": 3.0},
        })
        self.assertEqual(config.n_records, 300)
        self.assertEqual(config.vitals.signals[HEART_RATE].positive_mean, 85.0)
        self.assertEqual(config.vitals.signals[HEART_RATE].negative_mean, 80.0)
        self.assertEqual(config.notes.marker_boost, 3.0)
        self.assertEqual(config.to_dict()["notes"]["marker_boost"], 3.0)

    def test_invalid(self):
        """Test rejected settings."""
        test_cases = [
            {"n_records": 1},
            {"prevalence": 0.0},
            {"prevalence": 1.0},
            {"n_records": 4, "prevalence": 0.05},
            {"seed": -1},
            {"colour": "blue"},
            {"vitals": {"signals": {"BP": {}}}},
            {"vitals": {"signals": {"HR": {"negative_std": 0.0}}}},
            {"vitals": {"min_samples": 5, "max_samples": 2}},
            {"notes": {"marker_boost": -1.0}},
            {"notes": {"marker_rate": 0.05, "marker_boost": 8.0}},
            {"notes": {"marker_count": 50}},
        ]
        for data in test_cases:
            with self.subTest(data=data):
                with self.assertRaises(ConfigError):
                    synth_config_from_dict(data)


class TestAnalyticTarget(unittest.TestCase):
    """Test the optimal AUC of a single shifted signal."""

    def test_examples(self):
        """Test zero, two-sigma and very large shifts."""
        self.assertEqual(analytic_auc_target(single_shift_config(shift=0.0)), 0.5)
        self.assertAlmostEqual(analytic_auc_target(single_shift_config(shift=20.0)), 0.9213503964748575, places=12)
        self.assertAlmostEqual(analytic_auc_target(single_shift_config(shift=200.0)), 1.0, places=12)
        self.assertAlmostEqual(analytic_auc_target(single_shift_config(shift=-20.0)), 0.9213503964748575, places=12)

    def test_several_shifted_signals(self):
        """Test that the default three-signal shift has no closed form here."""
        with self.assertRaises(ConfigError):
            analytic_auc_target(SynthConfig())

    def test_normal_cdf(self):
        """Test the erf-based CDF against scipy."""
        for z in np.linspace(-8.0, 8.0, 161):
            with self.subTest(z=z):
                self.assertAlmostEqual(normal_cdf(float(z)), float(norm.cdf(z)), delta=1e-12)


if __name__ == "__main__":
    unittest.main()
