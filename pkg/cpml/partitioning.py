"""Data partitioning and prevalence adjustment.

A labeled dataset is split at random into training and validation sets; the
training set is then balanced by keeping a random subset of its negatives
the size of its positives, and the leftover negatives move to validation.

Randomness comes from ``utils.make_rng`` (numpy PCG64 seeded through a
SeedSequence), so splits reproduce across platforms.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np
import pandas as pd

from cpml.errors import DataFormatError, PartitionError
from cpml.utils import make_rng, round_half_up

logger = logging.getLogger(__name__)

TRAIN = "train"
VALIDATION = "validation"
MANIFEST_COLUMNS = ("id", "assignment", "moved")

_SPLIT_STREAM = 1
_BALANCE_STREAM = 2


@dataclass(frozen=True)
class Split:
    """Random train/validation partition of record keys."""

    train_ids: Tuple[str, ...]
    validation_ids: Tuple[str, ...]
    seed: int
    train_fraction: float


@dataclass(frozen=True)
class BalancedSplit:
    """Split after prevalence adjustment of the training set."""

    train_ids: Tuple[str, ...]
    validation_ids: Tuple[str, ...]
    moved_ids: Tuple[str, ...]
    seed: int


def split(labels: Mapping[str, int], train_fraction: float, seed: int) -> Split:
    """Partition labeled keys uniformly at random without replacement.

    The training set holds round(train_fraction * n) keys. Both output lists
    keep the input order of ``labels``.

    Args:
        labels: Ordered mapping of record key to 0/1 label
        train_fraction: Training share in (0, 1)
        seed: RNG seed

    Returns:
        The split
    """
    if not 0.0 < train_fraction < 1.0:
        raise PartitionError(f"train_fraction must be in (0, 1), got {train_fraction}")
    keys = list(labels)
    values = set(labels.values())
    if not values <= {0, 1}:
        raise PartitionError(f"labels must be 0 or 1, got {sorted(values)}")
    if values != {0, 1}:
        raise PartitionError("dataset must contain both classes to be split")

    n_train = round_half_up(train_fraction * len(keys))
    if n_train == 0 or n_train == len(keys):
        raise PartitionError(
            f"train_fraction {train_fraction} leaves an empty partition for {len(keys)} records"
        )

    rng = make_rng(seed, _SPLIT_STREAM)
    chosen = np.zeros(len(keys), dtype=bool)
    chosen[rng.permutation(len(keys))[:n_train]] = True

    result = Split(
        train_ids=tuple(key for key, is_train in zip(keys, chosen) if is_train),
        validation_ids=tuple(key for key, is_train in zip(keys, chosen) if not is_train),
        seed=seed,
        train_fraction=train_fraction,
    )
    logger.info("Split %d records: %d train, %d validation", len(keys), len(result.train_ids), len(result.validation_ids))
    return result


def balance_training(split_result: Split, labels: Mapping[str, int], seed: int) -> BalancedSplit:
    """Downsample training negatives to the number of training positives.

    Removed negatives are appended to validation. Nothing happens when the
    training negatives do not outnumber the positives; positives are never
    downsampled and negatives never oversampled.

    Args:
        split_result: Split to balance
        labels: Record key to 0/1 label
        seed: RNG seed

    Returns:
        The balanced split
    """
    positives = [key for key in split_result.train_ids if labels[key] == 1]
    negatives = [key for key in split_result.train_ids if labels[key] == 0]
    if not positives:
        raise PartitionError("training set has no positive records to balance against")

    if len(negatives) <= len(positives):
        return BalancedSplit(
            train_ids=split_result.train_ids,
            validation_ids=split_result.validation_ids,
            moved_ids=(),
            seed=seed,
        )

    rng = make_rng(seed, _BALANCE_STREAM)
    keep = np.zeros(len(negatives), dtype=bool)
    keep[rng.choice(len(negatives), size=len(positives), replace=False)] = True
    kept = {key for key, kept_flag in zip(negatives, keep) if kept_flag}
    moved = tuple(key for key, kept_flag in zip(negatives, keep) if not kept_flag)

    logger.info("Balanced training set: kept %d negatives, moved %d to validation", len(kept), len(moved))
    return BalancedSplit(
        train_ids=tuple(key for key in split_result.train_ids if labels[key] == 1 or key in kept),
        validation_ids=split_result.validation_ids + moved,
        moved_ids=moved,
        seed=seed,
    )


def save_manifest(balanced: BalancedSplit, path: str) -> str:
    """Write the split manifest (id, assignment, moved) as CSV."""
    moved = set(balanced.moved_ids)
    rows = [(key, TRAIN, 0) for key in balanced.train_ids]
    rows += [(key, VALIDATION, int(key in moved)) for key in balanced.validation_ids]
    pd.DataFrame(rows, columns=list(MANIFEST_COLUMNS)).to_csv(path, index=False, encoding="utf-8")
    return path


def load_manifest(path: str, seed: int) -> BalancedSplit:
    """Read a manifest written by ``save_manifest``."""
    frame = pd.read_csv(path, dtype={"id": str, "assignment": str}, keep_default_na=False)
    if tuple(frame.columns) != MANIFEST_COLUMNS:
        raise DataFormatError(f"header {list(frame.columns)} does not match {list(MANIFEST_COLUMNS)}", path=path)
    bad = sorted(set(frame["assignment"]) - {TRAIN, VALIDATION})
    if bad:
        raise DataFormatError(f"unknown assignment(s) {bad}", path=path, column="assignment")
    train = frame[frame["assignment"] == TRAIN]
    validation = frame[frame["assignment"] == VALIDATION]
    return BalancedSplit(
        train_ids=tuple(train["id"]),
        validation_ids=tuple(validation["id"]),
        moved_ids=tuple(validation.loc[validation["moved"] == 1, "id"]),
        seed=seed,
    )


def prevalence(keys: Sequence[str], labels: Mapping[str, int]) -> float:
    """Fraction of positive labels among keys."""
    if not keys:
        raise PartitionError("cannot compute prevalence of an empty set")
    return sum(labels[key] for key in keys) / len(keys)


def assignment_counts(balanced: BalancedSplit, labels: Mapping[str, int]) -> Dict[str, Dict[str, int]]:
    """Positive and negative counts per partition, for logging and reports."""
    counts = {}
    for name, keys in ((TRAIN, balanced.train_ids), (VALIDATION, balanced.validation_ids)):
        n_pos = sum(labels[key] for key in keys)
        counts[name] = {"n_pos": n_pos, "n_neg": len(keys) - n_pos}
    return counts
