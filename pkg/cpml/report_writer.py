"""Evaluation report writing module.

This module writes ROC curves, per-classifier summaries, the combined
multi-seed summary and the results table of a pipeline run.
"""

import os
from collections import OrderedDict
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from cpml.classifiers import MODEL_TYPES
from cpml.evaluation import EvalReport, RocCurve
from cpml.utils import ensure_directory, mean_or_none, write_json

ROC_COLUMNS = ["threshold", "fpr", "tpr"]
TABLE_ORDER = ("svm", "adaboost", "qda")
TABLE_LABELS = {"svm": "SVM", "adaboost": "Ada-Boost", "qda": "QDA"}


class ReportWriter:
    """Write evaluation artifacts to an output directory."""

    def create_combined_summary(self,
                                reports: Sequence[EvalReport],
                                config_digest: Optional[str] = None,
                                model_kind: Optional[str] = None) -> Dict[str, Any]:
        """Group reports by model type and average them over seeds.

        Args:
            reports: Reports of every classifier and seed
            config_digest: Digest of the effective configuration
            model_kind: Which model family produced the reports (notes or vitals)

        Returns:
            Summary document keyed by model type
        """
        grouped: "OrderedDict[str, List[EvalReport]]" = OrderedDict()
        for report in reports:
            grouped.setdefault(report.model_type, []).append(report)

        models = {}
        for model_type, runs in grouped.items():
            models[model_type] = {
                "runs": [report.to_dict() for report in runs],
                "mean_auc": mean_or_none([report.auc for report in runs]),
                "mean_accuracy": mean_or_none([report.accuracy for report in runs]),
                "seeds": [report.seed for report in runs],
            }

        return {
            "config_digest": config_digest,
            "model_kind": model_kind,
            "models": models,
        }

    def _artifact_name(self, prefix: str, model_type: str, extension: str) -> str:
        if model_type not in MODEL_TYPES:
            raise ValueError(f"unknown model type {model_type!r}; expected one of {list(MODEL_TYPES)}")
        return f"{prefix}_{model_type}.{extension}"

    def save_roc_curve(self, curve: RocCurve, model_type: str, output_dir: str) -> str:
        """Save ROC points as roc_<model_type>.csv (threshold, fpr, tpr).

        Args:
            curve: ROC curve
            model_type: Classifier name used in the filename
            output_dir: Directory path to save into

        Returns:
            Path to the saved file
        """
        ensure_directory(output_dir)
        full_path = os.path.join(output_dir, self._artifact_name("roc", model_type, "csv"))
        frame = pd.DataFrame({"threshold": curve.thresholds, "fpr": curve.fpr, "tpr": curve.tpr},
                             columns=ROC_COLUMNS)
        frame.to_csv(full_path, index=False, encoding="utf-8")
        return full_path

    def save_summary(self, report: EvalReport, output_dir: str) -> str:
        """Save one report as summary_<model_type>.json.

        Args:
            report: Evaluation report
            output_dir: Directory path to save into

        Returns:
            Path to the saved file
        """
        ensure_directory(output_dir)
        full_path = os.path.join(output_dir, self._artifact_name("summary", report.model_type, "json"))
        return write_json(report.to_dict(), full_path)

    def save_combined_summary(self, summary: Dict[str, Any], output_dir: str) -> str:
        """Save the combined summary as summary.json."""
        ensure_directory(output_dir)
        return write_json(summary, os.path.join(output_dir, "summary.json"))

    def generate_results_table(self, summary: Dict[str, Any], title: Optional[str] = None) -> str:
        """Render mean accuracy and AUC per classifier as a text table.

        Args:
            summary: Combined summary document
            title: Optional heading line

        Returns:
            Table text with one row per classifier
        """
        models = summary.get("models", {})
        ordered = [name for name in TABLE_ORDER if name in models]
        ordered += [name for name in models if name not in TABLE_ORDER]

        lines = []
        if title:
            lines.append(title)
        lines.append(f"{'Machine Learning Type':<24}{'Accuracy':>10}{'AUC':>8}")
        for name in ordered:
            entry = models[name]
            accuracy = entry.get("mean_accuracy")
            auc = entry.get("mean_auc")
            accuracy_text = f"{accuracy * 100:.1f}%" if accuracy is not None else "n/a"
            auc_text = f"{auc:.2f}" if auc is not None else "n/a"
            lines.append(f"{TABLE_LABELS.get(name, name):<24}{accuracy_text:>10}{auc_text:>8}")
        return "\n".join(lines) + "\n"

    def compare_tables(self, summaries: Sequence[Dict[str, Any]], titles: Optional[Sequence[str]] = None,
                       gap: int = 4) -> str:
        """Render the results tables of several runs side by side.

        Args:
            summaries: Combined summary documents
            titles: Heading per summary (defaults to each summary's model_kind)
            gap: Spaces between columns of tables

        Returns:
            Joined table text
        """
        if titles is None:
            titles = [f"Model: {summary.get('model_kind') or 'unknown'}" for summary in summaries]
        blocks = [self.generate_results_table(summary, title).rstrip("\n").split("\n")
                  for summary, title in zip(summaries, titles)]
        if not blocks:
            return ""
        height = max(len(block) for block in blocks)
        widths = [max(len(line) for line in block) for block in blocks]
        lines = []
        for row in range(height):
            cells = [(block[row] if row < len(block) else "").ljust(width) for block, width in zip(blocks, widths)]
            lines.append((" " * gap).join(cells).rstrip())
        return "\n".join(lines) + "\n"

    def save_results_table(self, summary: Dict[str, Any], output_dir: str, title: Optional[str] = None) -> str:
        """Save the results table as results_table.txt."""
        ensure_directory(output_dir)
        full_path = os.path.join(output_dir, "results_table.txt")
        with open(full_path, "w", encoding="utf-8") as f:
            f.write(self.generate_results_table(summary, title))
        return full_path

