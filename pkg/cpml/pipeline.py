"""Pipeline stages and their on-disk hand-off.

A run is the sequence featurize -> split -> train -> eval. Each stage reads
only what the previous stages wrote under ``config.output_dir``, so running
the stages one by one gives the same files as ``run_pipeline``.

Output layout::

    effective_config.yaml   status.json   artifacts.json
    features.csv | tokens.csv + term_histogram.csv   [plausibility.csv]
    seed_<N>/split_manifest.csv
    seed_<N>/vocabulary.txt + dtm_triplets.csv       (notes)
    seed_<N>/pls_model.json   seed_<N>/model_<type>.json
    seed_<N>/roc_<type>.csv   seed_<N>/summary_<type>.json
    seed_<N>/artifacts.json
    summary.json   results_table.txt
"""

import logging
import os
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from cpml import classifiers, partitioning, pls
from cpml.config import NOTES, VITALS, PipelineConfig, save_effective_config
from cpml.errors import ArtifactMissingError, CpmlError, DataFormatError, ModelFitError, StageError
from cpml.evaluation import EvalReport, emit_report, evaluate_scores
from cpml.ingest import load_notes, load_vitals, record_key, save_notes, save_vitals, summarize_labels
from cpml.report_writer import ReportWriter
from cpml.synthetic import SynthConfig, analytic_auc_target, generate_notes_corpus, generate_vitals_cohort
from cpml.text_features import (
    DocumentTermMatrix,
    StopWordList,
    Vocabulary,
    build_vocabulary,
    prepare_corpus,
    save_term_histogram,
    term_histogram,
    vectorize,
)
from cpml.utils import ensure_directory, read_json, write_json
from cpml.vital_features import (
    FEATURE_NAMES,
    featurize_cohort,
    load_feature_matrix,
    plausibility_issues,
    save_feature_matrix,
    save_plausibility_report,
)

logger = logging.getLogger(__name__)

SYNTH = "synth"
FEATURIZE = "featurize"
SPLIT = "split"
TRAIN = "train"
EVAL = "eval"
STAGES = (FEATURIZE, SPLIT, TRAIN, EVAL)

RUNNING = "running"
INCOMPLETE = "incomplete"
COMPLETE = "complete"

FEATURES_FILE = "features.csv"
TOKENS_FILE = "tokens.csv"
TERM_HISTOGRAM_FILE = "term_histogram.csv"
PLAUSIBILITY_FILE = "plausibility.csv"
MANIFEST_FILE = "split_manifest.csv"
VOCABULARY_FILE = "vocabulary.txt"
TRIPLETS_FILE = "dtm_triplets.csv"
PLS_FILE = "pls_model.json"
STATUS_FILE = "status.json"
ARTIFACTS_FILE = "artifacts.json"
TOKENS_COLUMNS = ["doc_id", "label", "tokens"]
# notes densified per PLS projection call
TRANSFORM_CHUNK_ROWS = 2048


@dataclass
class Dataset:
    """Featurized records in file order."""

    ids: List[str]
    labels: Dict[str, int]
    features: Optional[np.ndarray] = None
    tokens: Optional[List[List[str]]] = None

    def rows(self, keys: Sequence[str]) -> List[int]:
        positions = {key: row for row, key in enumerate(self.ids)}
        return [positions[key] for key in keys]

    def label_vector(self, keys: Sequence[str]) -> np.ndarray:
        return np.asarray([self.labels[key] for key in keys], dtype=int)


def seed_directory(output_dir: str, seed: int) -> str:
    return os.path.join(output_dir, f"seed_{seed}")


def _require(path: str, stage: str) -> str:
    if not os.path.exists(path):
        raise ArtifactMissingError(path, stage)
    return path


def save_tokens(path: str, ids: Sequence[str], labels: Sequence[int], corpus: Sequence[Sequence[str]]) -> str:
    """Write tokenized notes as CSV (doc_id, label, space-joined tokens)."""
    frame = pd.DataFrame(
        {"doc_id": list(ids), "label": [int(label) for label in labels],
         "tokens": [" ".join(tokens) for tokens in corpus]},
        columns=TOKENS_COLUMNS,
    )
    frame.to_csv(path, index=False, encoding="utf-8")
    return path


def load_tokens(path: str) -> Tuple[List[str], List[int], List[List[str]]]:
    """Read a file written by ``save_tokens``."""
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False)
    if list(frame.columns) != TOKENS_COLUMNS:
        raise DataFormatError(f"header {list(frame.columns)} does not match {TOKENS_COLUMNS}", path=path)
    corpus = [text.split() for text in frame["tokens"]]
    return frame["doc_id"].tolist(), [int(label) for label in frame["label"]], corpus


class Pipeline:
    """Runs the stages of one configuration against its output directory."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.output_dir = config.output_dir
        self.digest = config.digest
        self.writer = ReportWriter()

    # status and provenance

    def _status_path(self) -> str:
        return os.path.join(self.output_dir, STATUS_FILE)

    def _read_status(self) -> Dict[str, Any]:
        path = self._status_path()
        if os.path.exists(path):
            return read_json(path)
        return {"completed_stages": []}

    def _write_status(self, state: str, stage: str, completed: List[str], error: Optional[str] = None) -> None:
        write_json({
            "state": state,
            "stage": stage,
            "completed_stages": completed,
            "failed_stage": stage if error is not None else None,
            "error": error,
            "config_digest": self.digest,
        }, self._status_path())

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Track a stage in status.json and wrap its failures in StageError.

        Stages after ``name`` are dropped from the completed list, since
        their inputs are being rewritten.
        """
        ensure_directory(self.output_dir)
        previous = self._read_status().get("completed_stages", [])
        earlier = [done for done in previous if done in STAGES[:STAGES.index(name)]] if name in STAGES else previous
        self._write_status(RUNNING, name, earlier)
        logger.info("Stage %s started", name)
        try:
            yield
        except Exception as e:
            self._write_status(INCOMPLETE, name, earlier, error=str(e))
            if isinstance(e, StageError):
                raise
            raise StageError(name, e) from e
        completed = earlier + [name] if name in STAGES else earlier
        state = COMPLETE if name == EVAL else INCOMPLETE
        self._write_status(state, name, completed)
        logger.info("Stage %s finished", name)

    def _stamp(self, seed: Optional[int]) -> Dict[str, Any]:
        return {"config_digest": self.digest, "seed": seed}

    def _record_artifacts(self, directory: str, seed: Optional[int], stage: str, paths: Sequence[str]) -> None:
        """Add this stage's files to directory/artifacts.json."""
        path = os.path.join(directory, ARTIFACTS_FILE)
        document = read_json(path) if os.path.exists(path) else {}
        if document.get("config_digest") not in (None, self.digest):
            logger.warning("Artifacts in %s were written with config %s, now %s",
                           directory, document.get("config_digest"), self.digest)
            document = {}
        artifacts = document.get("artifacts", {})
        artifacts[stage] = sorted(os.path.basename(item) for item in paths)
        for later in STAGES[STAGES.index(stage) + 1:]:
            artifacts.pop(later, None)
        document.update(self._stamp(seed))
        document["artifacts"] = artifacts
        write_json(document, path)

    # stages

    def synth(self) -> str:
        """Generate the synthetic dataset at ``config.input_path``."""
        synth_config = self.config.synth or SynthConfig()
        ensure_directory(os.path.dirname(os.path.abspath(self.config.input_path)))
        if self.config.model_kind == VITALS:
            records = generate_vitals_cohort(synth_config)
            save_vitals(records, self.config.input_path)
            try:
                logger.info("Analytic AUC target of the generating feature: %.4f", analytic_auc_target(synth_config))
            except CpmlError:
                logger.debug("No analytic AUC target: more than one signal is shifted")
        else:
            records = generate_notes_corpus(synth_config)
            save_notes(records, self.config.input_path)
        summary = summarize_labels(records)
        logger.info("Wrote %d synthetic %s records (%d positive) to %s",
                    summary.n_total, self.config.model_kind, summary.n_positive, self.config.input_path)
        return self.config.input_path

    def featurize(self) -> List[str]:
        """Load the input file and write its feature export."""
        with self.stage(FEATURIZE):
            save_effective_config(self.config, self.output_dir)
            written = self._featurize_vitals() if self.config.model_kind == VITALS else self._featurize_notes()
            self._record_artifacts(self.output_dir, None, FEATURIZE, written)
            return written

    def _featurize_vitals(self) -> List[str]:
        records = load_vitals(_require(self.config.input_path, SYNTH))
        written = [save_feature_matrix(
            os.path.join(self.output_dir, FEATURES_FILE),
            [record_key(record) for record in records],
            [record.label for record in records],
            featurize_cohort(records),
            FEATURE_NAMES,
        )]
        issues = plausibility_issues(records)
        if issues:
            logger.warning("%d vital samples fall outside the physiologic range", len(issues))
            written.append(save_plausibility_report(issues, os.path.join(self.output_dir, PLAUSIBILITY_FILE)))
        return written

    def _featurize_notes(self) -> List[str]:
        records = load_notes(_require(self.config.input_path, SYNTH))
        corpus = prepare_corpus(record.text for record in records)
        return [
            save_tokens(os.path.join(self.output_dir, TOKENS_FILE),
                        [record_key(record) for record in records],
                        [record.label for record in records],
                        corpus),
            save_term_histogram(term_histogram(corpus), os.path.join(self.output_dir, TERM_HISTOGRAM_FILE)),
        ]

    def load_dataset(self) -> Dataset:
        """Read the featurize stage output."""
        if self.config.model_kind == VITALS:
            ids, labels, matrix, _ = load_feature_matrix(_require(os.path.join(self.output_dir, FEATURES_FILE), FEATURIZE))
            return Dataset(ids=ids, labels=dict(zip(ids, labels.tolist())), features=matrix)
        ids, label_list, corpus = load_tokens(_require(os.path.join(self.output_dir, TOKENS_FILE), FEATURIZE))
        return Dataset(ids=ids, labels=dict(zip(ids, label_list)), tokens=corpus)

    def split(self) -> Dict[int, partitioning.BalancedSplit]:
        """Write a balanced split manifest for every seed."""
        with self.stage(SPLIT):
            dataset = self.load_dataset()
            results = {}
            for seed in self.config.seeds:
                directory = ensure_directory(seed_directory(self.output_dir, seed))
                balanced = partitioning.balance_training(
                    partitioning.split(dataset.labels, self.config.effective_train_fraction, seed),
                    dataset.labels,
                    seed,
                )
                counts = partitioning.assignment_counts(balanced, dataset.labels)
                logger.info("Seed %d: train %s (prevalence %.3f), validation %s (prevalence %.3f)",
                            seed, counts["train"], partitioning.prevalence(balanced.train_ids, dataset.labels),
                            counts["validation"], partitioning.prevalence(balanced.validation_ids, dataset.labels))
                path = partitioning.save_manifest(balanced, os.path.join(directory, MANIFEST_FILE))
                self._record_artifacts(directory, seed, SPLIT, [path])
                results[seed] = balanced
            return results

    def load_split(self, seed: int) -> partitioning.BalancedSplit:
        path = _require(os.path.join(seed_directory(self.output_dir, seed), MANIFEST_FILE), SPLIT)
        return partitioning.load_manifest(path, seed)

    def _document_term_matrix(self, dataset: Dataset, train_ids: Sequence[str], directory: str) -> Tuple[DocumentTermMatrix, List[str]]:
        """Vocabulary from the training notes only, applied to every note."""
        train_corpus = [dataset.tokens[row] for row in dataset.rows(train_ids)]
        vocabulary = build_vocabulary(
            train_corpus,
            StopWordList.default(self.config.stop_words),
            self.config.max_features,
        )
        matrix = vectorize(dataset.tokens, vocabulary, dataset.ids)
        written = [
            vocabulary.save(os.path.join(directory, VOCABULARY_FILE)),
            matrix.save_triplets(os.path.join(directory, TRIPLETS_FILE)),
        ]
        return matrix, written

    def _load_document_term_matrix(self, dataset: Dataset, directory: str) -> DocumentTermMatrix:
        vocabulary = Vocabulary.load(_require(os.path.join(directory, VOCABULARY_FILE), TRAIN))
        return DocumentTermMatrix.load_triplets(_require(os.path.join(directory, TRIPLETS_FILE), TRAIN),
                                                vocabulary, dataset.ids)

    def _fit_reduction(self, X: np.ndarray, y: np.ndarray) -> Tuple[pls.PlsModel, np.ndarray]:
        """Fit PLS and score the training rows, lowering the component count when the data cannot support it."""
        n_components = self.config.n_components
        achievable = pls.max_components(X.shape[0], X.shape[1])
        if n_components > achievable:
            logger.warning("PLS components capped at %d (requested %d)", achievable, n_components)
            n_components = achievable
        try:
            return pls.fit_transform(X, y, n_components=n_components, scale=self.config.scale_features)
        except ModelFitError as e:
            if not e.achievable_components:
                raise
            logger.warning("PLS components capped at %d: %s", e.achievable_components, e)
            return pls.fit_transform(X, y, n_components=e.achievable_components, scale=self.config.scale_features)

    @staticmethod
    def _feature_rows(dataset: Dataset, matrix: Optional[DocumentTermMatrix], keys: Sequence[str]) -> np.ndarray:
        """Feature rows of the given records; note counts are densified for these rows only."""
        rows = dataset.rows(keys)
        if matrix is None:
            return dataset.features[rows]
        return matrix.dense_rows(rows)

    def _reduced_rows(self, reduction: pls.PlsModel, dataset: Dataset,
                      matrix: Optional[DocumentTermMatrix], keys: Sequence[str]) -> np.ndarray:
        """PLS scores of the given records; notes are projected in chunks of TRANSFORM_CHUNK_ROWS."""
        if matrix is None:
            return pls.transform(reduction, self._feature_rows(dataset, None, keys))
        chunks = [keys[start:start + TRANSFORM_CHUNK_ROWS] for start in range(0, len(keys), TRANSFORM_CHUNK_ROWS)]
        return np.vstack([pls.transform(reduction, self._feature_rows(dataset, matrix, chunk)) for chunk in chunks])

    def train(self) -> Dict[int, Dict[str, classifiers.Classifier]]:
        """Fit PLS and the configured classifiers on each seed's training set."""
        with self.stage(TRAIN):
            dataset = self.load_dataset()
            trained = {}
            for seed in self.config.seeds:
                directory = seed_directory(self.output_dir, seed)
                balanced = self.load_split(seed)
                written: List[str] = []
                matrix = None
                if self.config.model_kind == NOTES:
                    matrix, written = self._document_term_matrix(dataset, balanced.train_ids, directory)

                X_train = self._feature_rows(dataset, matrix, balanced.train_ids)
                y_train = dataset.label_vector(balanced.train_ids)
                reduction, scores = self._fit_reduction(X_train, y_train)
                written.append(reduction.save(os.path.join(directory, PLS_FILE), self._stamp(seed)))

                models = {}
                for model_type in self.config.classifiers:
                    logger.info("Seed %d: training %s on %d rows", seed, model_type, scores.shape[0])
                    model = classifiers.train_classifier(model_type, scores, y_train,
                                                         **self.config.classifier_params(model_type))
                    written.append(classifiers.save_model(
                        model, os.path.join(directory, f"model_{model_type}.json"), self._stamp(seed)))
                    models[model_type] = model
                self._record_artifacts(directory, seed, TRAIN, written)
                trained[seed] = models
            return trained

    def evaluate(self) -> List[EvalReport]:
        """Score each seed's validation set and write the reports."""
        with self.stage(EVAL):
            dataset = self.load_dataset()
            reports: List[EvalReport] = []
            for seed in self.config.seeds:
                reports.extend(self._evaluate_seed(dataset, seed))

            summary = self.writer.create_combined_summary(reports, self.digest, self.config.model_kind)
            self.writer.save_combined_summary(summary, self.output_dir)
            self.writer.save_results_table(summary, self.output_dir, title=f"Model: {self.config.model_kind}")
            return reports

    def _evaluate_seed(self, dataset: Dataset, seed: int) -> List[EvalReport]:
        directory = seed_directory(self.output_dir, seed)
        balanced = self.load_split(seed)
        matrix = None
        if self.config.model_kind == NOTES:
            matrix = self._load_document_term_matrix(dataset, directory)
        reduction = pls.PlsModel.load(_require(os.path.join(directory, PLS_FILE), TRAIN))
        X_validation = self._reduced_rows(reduction, dataset, matrix, balanced.validation_ids)
        y_validation = dataset.label_vector(balanced.validation_ids)

        reports = []
        written = []
        for model_type in self.config.classifiers:
            model = classifiers.load_model(_require(os.path.join(directory, f"model_{model_type}.json"), TRAIN))
            curve, report = evaluate_scores(
                model_type,
                model.decision_function(X_validation),
                y_validation,
                threshold=self.config.threshold,
                seed=seed,
                config_digest=self.digest,
            )
            reports.append(emit_report(curve, report.auc, report.accuracy, report.to_dict(), directory))
            written += [f"roc_{model_type}.csv", f"summary_{model_type}.json"]
        self._record_artifacts(directory, seed, EVAL, written)
        return reports

    def run(self) -> List[EvalReport]:
        """featurize -> split -> train -> eval."""
        self.featurize()
        self.split()
        self.train()
        return self.evaluate()


def run_pipeline(config: PipelineConfig) -> List[EvalReport]:
    """Run every stage of a configuration.

    Args:
        config: Validated pipeline configuration

    Returns:
        One report per classifier and seed
    """
    return Pipeline(config).run()
