"""ROC analysis of classifier scores.

The ROC sweep treats tied scores as one group, so the trapezoidal area under
the curve equals the Mann-Whitney statistic with ties counted as one half.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from cpml.errors import CpmlError

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.0


class EvaluationError(CpmlError):
    """Scores and labels cannot be evaluated together."""


@dataclass(frozen=True)
class RocCurve:
    """ROC points from (0,0) to (1,1); ``thresholds[k]`` produced point k."""

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    false_positives: np.ndarray
    true_positives: np.ndarray

    def __len__(self) -> int:
        return int(self.fpr.shape[0])

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


@dataclass(frozen=True)
class EvalReport:
    """Validation metrics of one classifier run."""

    model_type: str
    auc: float
    accuracy: float
    n_pos: int
    n_neg: int
    seed: Optional[int] = None
    config_digest: Optional[str] = None
    threshold: float = DEFAULT_THRESHOLD

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvalReport":
        return cls(
            model_type=str(data["model_type"]),
            auc=float(data["auc"]),
            accuracy=float(data["accuracy"]),
            n_pos=int(data["n_pos"]),
            n_neg=int(data["n_neg"]),
            seed=None if data.get("seed") is None else int(data["seed"]),
            config_digest=data.get("config_digest"),
            threshold=float(data.get("threshold", DEFAULT_THRESHOLD)),
        )


def _scores_and_labels(scores: Sequence[float], labels: Sequence[int], require_both: bool = True):
    score_array = np.asarray(scores, dtype=float).ravel()
    label_array = np.asarray(labels).ravel()
    if score_array.shape != label_array.shape:
        raise EvaluationError(f"{score_array.size} scores for {label_array.size} labels")
    if score_array.size == 0:
        raise EvaluationError("no scores to evaluate")
    if not np.all(np.isin(label_array, (0, 1))):
        raise EvaluationError("labels must be 0 or 1")
    if np.any(np.isnan(score_array)):
        raise EvaluationError("scores contain NaN")
    label_array = label_array.astype(int)
    if require_both and (label_array.min() == label_array.max()):
        raise EvaluationError("labels contain a single class; ROC needs both")
    return score_array, label_array


def roc_curve(scores: Sequence[float], labels: Sequence[int]) -> RocCurve:
    """Sweep the threshold over every distinct score, highest first.

    Args:
        scores: Real-valued scores, larger favoring the positive class
        labels: 0/1 labels aligned with scores

    Returns:
        The ROC curve; the first point has threshold +inf
    """
    score_array, label_array = _scores_and_labels(scores, labels)
    order = np.argsort(-score_array, kind="mergesort")
    sorted_scores = score_array[order]
    sorted_labels = label_array[order]

    group_ends = np.flatnonzero(np.diff(sorted_scores) != 0)
    group_ends = np.append(group_ends, sorted_scores.size - 1)
    true_positives = np.concatenate(([0], np.cumsum(sorted_labels)[group_ends]))
    false_positives = np.concatenate(([0], np.cumsum(1 - sorted_labels)[group_ends]))
    thresholds = np.concatenate(([np.inf], sorted_scores[group_ends]))

    n_pos = int(true_positives[-1])
    n_neg = int(false_positives[-1])
    return RocCurve(
        fpr=false_positives / n_neg,
        tpr=true_positives / n_pos,
        thresholds=thresholds,
        false_positives=false_positives,
        true_positives=true_positives,
    )


def curve_area(curve: RocCurve) -> float:
    """Trapezoidal area of a curve, summed in integer counts then divided once."""
    n_pos = int(curve.true_positives[-1])
    n_neg = int(curve.false_positives[-1])
    steps = np.diff(curve.false_positives)
    heights = curve.true_positives[1:] + curve.true_positives[:-1]
    return int(np.sum(steps * heights)) / (2.0 * n_pos * n_neg)


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Area under the ROC curve.

    Args:
        scores: Real-valued scores
        labels: 0/1 labels

    Returns:
        AUC in [0, 1]
    """
    return curve_area(roc_curve(scores, labels))


def mann_whitney_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """AUC as the Mann-Whitney U statistic over n_pos * n_neg, ties as one half."""
    score_array, label_array = _scores_and_labels(scores, labels)
    ranks = rankdata(score_array, method="average")
    n_pos = int(label_array.sum())
    n_neg = label_array.size - n_pos
    u_statistic = float(ranks[label_array == 1].sum()) - n_pos * (n_pos + 1) / 2.0
    return u_statistic / (n_pos * n_neg)


def accuracy(scores: Sequence[float], labels: Sequence[int], threshold: float = DEFAULT_THRESHOLD) -> float:
    """Fraction of rows where (score >= threshold) matches the label."""
    score_array, label_array = _scores_and_labels(scores, labels, require_both=False)
    predictions = (score_array >= threshold).astype(int)
    return float(np.mean(predictions == label_array))


def evaluate_scores(model_type: str,
                    scores: Sequence[float],
                    labels: Sequence[int],
                    threshold: float = DEFAULT_THRESHOLD,
                    seed: Optional[int] = None,
                    config_digest: Optional[str] = None):
    """ROC curve plus report for one classifier's validation scores.

    Returns:
        Tuple of (RocCurve, EvalReport)
    """
    curve = roc_curve(scores, labels)
    label_array = np.asarray(labels).astype(int)
    report = EvalReport(
        model_type=model_type,
        auc=curve_area(curve),
        accuracy=accuracy(scores, labels, threshold),
        n_pos=int(label_array.sum()),
        n_neg=int(label_array.size - label_array.sum()),
        seed=seed,
        config_digest=config_digest,
        threshold=threshold,
    )
    logger.info("%s: AUC %.4f, accuracy %.4f", model_type, report.auc, report.accuracy)
    return curve, report


def emit_report(curve: RocCurve,
                auc_value: float,
                accuracy_value: float,
                metadata: Dict[str, Any],
                output_dir: str) -> EvalReport:
    """Write the ROC points CSV and summary JSON of one classifier.

    Args:
        curve: ROC curve
        auc_value: Area under the curve
        accuracy_value: Accuracy at the chosen threshold
        metadata: model_type, n_pos, n_neg and optionally seed,
            config_digest and threshold
        output_dir: Directory receiving roc_<model>.csv and summary_<model>.json

    Returns:
        The report that was written
    """
    from cpml.report_writer import ReportWriter

    report = EvalReport(
        model_type=str(metadata["model_type"]),
        auc=float(auc_value),
        accuracy=float(accuracy_value),
        n_pos=int(metadata["n_pos"]),
        n_neg=int(metadata["n_neg"]),
        seed=metadata.get("seed"),
        config_digest=metadata.get("config_digest"),
        threshold=float(metadata.get("threshold", DEFAULT_THRESHOLD)),
    )
    writer = ReportWriter()
    writer.save_roc_curve(curve, report.model_type, output_dir)
    writer.save_summary(report, output_dir)
    return report
