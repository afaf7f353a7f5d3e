"""Vital-sign featurization module.

Each record's heart rate, respiration rate and SpO2 series are reduced to
five summary statistics per signal plus the fraction of samples falling in
each severity stage, 29 features in all.

Stage bands (boundaries belong to the more severe stage):

    HR    <90 Normal, [90,100) Mild, [100,110) Moderate, [110,120) Severe,
          >=120 VerySevere
    RR    <12 Low, [12,18) Normal, [18,20) High, >=20 Abnormal
    SpO2  >92 Normal, (90,92] Mild, (85,90] Moderate, (80,85] Severe,
          <=80 VerySevere
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Sequence, Tuple

import numpy as np
import pandas as pd

from cpml.errors import FeatureError
from cpml.ingest import HEART_RATE, RESP_RATE, SPO2, VitalRecord

logger = logging.getLogger(__name__)

NORMAL = "Normal"
MILD = "Mild"
MODERATE = "Moderate"
SEVERE = "Severe"
VERY_SEVERE = "VerySevere"
LOW = "Low"
HIGH = "High"
ABNORMAL = "Abnormal"

STAGES: Dict[str, Tuple[str, ...]] = {
    HEART_RATE: (NORMAL, MILD, MODERATE, SEVERE, VERY_SEVERE),
    RESP_RATE: (NORMAL, LOW, HIGH, ABNORMAL),
    SPO2: (NORMAL, MILD, MODERATE, SEVERE, VERY_SEVERE),
}

FEATURE_SIGNALS = (HEART_RATE, RESP_RATE, SPO2)
STAT_NAMES = ("max", "min", "mean", "median", "std")

FEATURE_NAMES: Tuple[str, ...] = tuple(
    [f"{signal.lower()}_{stat}" for signal in FEATURE_SIGNALS for stat in STAT_NAMES]
    + [f"{signal.lower()}_frac_{stage.lower()}" for signal in FEATURE_SIGNALS for stage in STAGES[signal]]
)
N_FEATURES = len(FEATURE_NAMES)

PLAUSIBLE_RANGES = {
    HEART_RATE: (0.0, 300.0),
    RESP_RATE: (0.0, 300.0),
    SPO2: (0.0, 100.0),
}


class SummaryStats(NamedTuple):
    """Five per-signal statistics in the signal's units."""

    max: float
    min: float
    mean: float
    median: float
    std: float


@dataclass(frozen=True)
class SignalFeatures:
    """Statistics and stage occupancy of one signal series."""

    stats: SummaryStats
    stage_fractions: Dict[str, float]


@dataclass(frozen=True)
class PlausibilityIssue:
    """A sample outside the physiologic range of its signal."""

    record_id: str
    signal: str
    position: int
    value: float


def _check_series(series: Sequence[float], name: str = "series") -> np.ndarray:
    values = np.asarray(series, dtype=float)
    if values.size == 0:
        raise FeatureError(f"{name} is empty")
    if not np.all(np.isfinite(values)):
        raise FeatureError(f"{name} contains non-finite values")
    return values


def summary_stats(series: Sequence[float]) -> SummaryStats:
    """Max, min, mean, median and sample standard deviation of a series.

    The standard deviation uses divisor n-1 and is 0 for a single sample.

    Args:
        series: Non-empty finite samples

    Returns:
        The five statistics
    """
    values = _check_series(series)
    low = float(np.min(values))
    high = float(np.max(values))
    mean = min(max(float(np.mean(values)), low), high)
    std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return SummaryStats(max=high, min=low, mean=mean, median=float(np.median(values)), std=std)


def stage_sample(kind: str, value: float) -> str:
    """Map one sample to its severity stage.

    Args:
        kind: Signal name (HR, RR or SPO2)
        value: Finite sample value

    Returns:
        Stage name
    """
    if not math.isfinite(value):
        raise FeatureError(f"cannot stage non-finite value {value!r}")
    if kind == HEART_RATE:
        if value < 90:
            return NORMAL
        if value < 100:
            return MILD
        if value < 110:
            return MODERATE
        if value < 120:
            return SEVERE
        return VERY_SEVERE
    if kind == RESP_RATE:
        if value < 12:
            return LOW
        if value < 18:
            return NORMAL
        if value < 20:
            return HIGH
        return ABNORMAL
    if kind == SPO2:
        if value > 92:
            return NORMAL
        if value > 90:
            return MILD
        if value > 85:
            return MODERATE
        if value > 80:
            return SEVERE
        return VERY_SEVERE
    raise KeyError(f"unknown signal kind {kind!r}")


def bucket_fractions(kind: str, series: Sequence[float]) -> Dict[str, float]:
    """Fraction of samples in each stage of a signal.

    Args:
        kind: Signal name (HR, RR or SPO2)
        series: Non-empty finite samples

    Returns:
        Stage name to fraction, in the signal's stage order
    """
    values = _check_series(series, f"{kind} series")
    counts = {stage: 0 for stage in STAGES[kind]}
    for value in values:
        counts[stage_sample(kind, float(value))] += 1
    return {stage: count / values.size for stage, count in counts.items()}


def signal_features(kind: str, series: Sequence[float]) -> SignalFeatures:
    """Statistics and stage fractions of one signal."""
    return SignalFeatures(stats=summary_stats(series), stage_fractions=bucket_fractions(kind, series))


def featurize_record(record: VitalRecord) -> np.ndarray:
    """Build the 29-feature vector of a record.

    Order: HR, RR, SpO2 statistics (max, min, mean, median, std each), then
    HR, RR, SpO2 stage fractions in stage order. See ``FEATURE_NAMES``.

    Args:
        record: Record with three non-empty series

    Returns:
        Feature vector of length 29
    """
    per_signal = {}
    for kind in FEATURE_SIGNALS:
        series = record.series(kind)
        if len(series) == 0:
            raise FeatureError(f"record {record.record_id!r} has an empty {kind} series")
        per_signal[kind] = signal_features(kind, series)

    values: List[float] = []
    for kind in FEATURE_SIGNALS:
        values.extend(per_signal[kind].stats)
    for kind in FEATURE_SIGNALS:
        values.extend(per_signal[kind].stage_fractions[stage] for stage in STAGES[kind])
    return np.asarray(values, dtype=float)


def featurize_cohort(records: Sequence[VitalRecord]) -> np.ndarray:
    """Stack feature vectors of many records, preserving input order."""
    if not records:
        return np.empty((0, N_FEATURES))
    return np.vstack([featurize_record(record) for record in records])


def plausibility_issues(records: Sequence[VitalRecord]) -> List[PlausibilityIssue]:
    """List samples outside the physiologic range of their signal.

    Loading never rejects these; callers decide whether to report or drop.

    Args:
        records: Vital records to check

    Returns:
        One issue per out-of-range sample
    """
    issues = []
    for record in records:
        for kind in FEATURE_SIGNALS:
            low, high = PLAUSIBLE_RANGES[kind]
            for position, value in enumerate(record.series(kind)):
                if value < low or value > high:
                    issues.append(PlausibilityIssue(record.record_id, kind, position, float(value)))
    return issues


def save_feature_matrix(path: str,
                        ids: Sequence[str],
                        labels: Sequence[int],
                        matrix: np.ndarray,
                        names: Sequence[str] = FEATURE_NAMES) -> str:
    """Write a dense feature matrix as CSV (record_id, label, features...)."""
    frame = pd.DataFrame(np.asarray(matrix, dtype=float), columns=list(names))
    frame.insert(0, "label", [int(label) for label in labels])
    frame.insert(0, "record_id", list(ids))
    frame.to_csv(path, index=False, encoding="utf-8")
    return path


def load_feature_matrix(path: str) -> Tuple[List[str], np.ndarray, np.ndarray, List[str]]:
    """Read a matrix written by ``save_feature_matrix``.

    Returns:
        Tuple of (ids, labels, matrix, feature names)
    """
    frame = pd.read_csv(path, dtype={"record_id": str}, keep_default_na=False, float_precision="round_trip")
    names = [column for column in frame.columns if column not in ("record_id", "label")]
    return (
        frame["record_id"].tolist(),
        frame["label"].to_numpy(dtype=int),
        frame[names].to_numpy(dtype=float),
        names,
    )


def save_plausibility_report(issues: Sequence[PlausibilityIssue], path: str) -> str:
    """Write plausibility issues as CSV."""
    frame = pd.DataFrame(
        [(issue.record_id, issue.signal, issue.position, issue.value) for issue in issues],
        columns=["record_id", "signal", "position", "value"],
    )
    frame.to_csv(path, index=False, encoding="utf-8")
    return path
