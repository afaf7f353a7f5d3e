"""Dataset ingestion module.

This module defines the labeled note and vital-sign record schemas and loads
them from (and writes them to) CSV files.

Notes CSV columns: ``admission_id,label,text``. The text column is quoted so
notes can carry commas and line breaks; an empty cell means the note is
absent and is loaded as ``None``.

Vitals CSV columns: ``record_id,label,signal,value`` in long format, one row
per sample, with signal one of ``HR``, ``SPO2`` or ``RR``.
"""

import csv
import logging
import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from cpml.errors import DataFormatError

logger = logging.getLogger(__name__)

NOTES_COLUMNS = ("admission_id", "label", "text")
VITALS_COLUMNS = ("record_id", "label", "signal", "value")

HEART_RATE = "HR"
SPO2 = "SPO2"
RESP_RATE = "RR"
SIGNALS = (HEART_RATE, SPO2, RESP_RATE)


@dataclass(frozen=True)
class NoteRecord:
    """One admission's clinical note. ``text`` is None when absent."""

    admission_id: str
    text: Optional[str]
    label: int


@dataclass(frozen=True)
class VitalRecord:
    """One record's heart rate, SpO2 and respiration rate series."""

    record_id: str
    label: int
    heart_rate: Tuple[float, ...]
    spo2: Tuple[float, ...]
    resp_rate: Tuple[float, ...]

    def series(self, signal: str) -> Tuple[float, ...]:
        """Return the sample series for a signal name (HR, SPO2 or RR)."""
        if signal == HEART_RATE:
            return self.heart_rate
        if signal == SPO2:
            return self.spo2
        if signal == RESP_RATE:
            return self.resp_rate
        raise KeyError(f"unknown signal {signal!r}")


@dataclass(frozen=True)
class LabelSummary:
    """Class counts of a labeled dataset."""

    n_total: int
    n_positive: int
    n_negative: int
    prevalence: float


LabeledRecord = Union[NoteRecord, VitalRecord]


def _check_field_counts(path: str, columns: Sequence[str]) -> None:
    """Raise on the first data row whose field count differs from the header.

    pandas pads short rows with empty cells, which would read as absent
    text, and reports long rows by physical line rather than data row.
    Rows are numbered from 1 after the header, blank lines skipped, so a
    quoted multi-line note counts as one row.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = (fields for fields in csv.reader(f) if fields)
            header = next(rows, None)
            if header is None or len(header) != len(columns):
                return
            for position, fields in enumerate(rows):
                if len(fields) == len(columns):
                    continue
                message = f"expected {len(columns)} fields, got {len(fields)}"
                if len(fields) < len(columns):
                    raise DataFormatError(message, path=path, row=position + 1, column=columns[len(fields)])
                raise DataFormatError(message, path=path, row=position + 1)
    except csv.Error as e:
        raise DataFormatError(f"malformed CSV ({e})", path=path) from e
    except UnicodeDecodeError as e:
        raise DataFormatError(f"file is not valid UTF-8 ({e})", path=path) from e


def _read_frame(path: str, columns: Sequence[str]) -> pd.DataFrame:
    """Read a CSV file as strings and check its header.

    Args:
        path: CSV file path
        columns: Expected header, in order

    Returns:
        DataFrame of raw string cells
    """
    _check_field_counts(path, columns)
    try:
        frame = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            encoding="utf-8",
        )
    except pd.errors.ParserError as e:
        raise DataFormatError(f"malformed CSV ({e})", path=path) from e
    except pd.errors.EmptyDataError as e:
        raise DataFormatError("file is empty; a header row is required", path=path) from e
    except UnicodeDecodeError as e:
        raise DataFormatError(f"file is not valid UTF-8 ({e})", path=path) from e

    header = tuple(frame.columns)
    if header != tuple(columns):
        raise DataFormatError(
            f"header {list(header)} does not match expected {list(columns)}",
            path=path,
            row=0,
        )
    return frame


def _parse_label(raw: str, path: str, row: int) -> int:
    """Parse a label cell that must be exactly 0 or 1."""
    value = raw.strip()
    if value not in ("0", "1"):
        raise DataFormatError(f"label must be 0 or 1, got {raw!r}", path=path, row=row, column="label")
    return int(value)


def _parse_key(raw: str, path: str, row: int, column: str) -> str:
    """Parse a non-empty identifier cell."""
    key = raw.strip()
    if not key:
        raise DataFormatError("identifier is empty", path=path, row=row, column=column)
    return key


def load_notes(path: str) -> List[NoteRecord]:
    """Load labeled clinical notes from CSV.

    Args:
        path: Path to a notes CSV file

    Returns:
        One NoteRecord per data row, in file order
    """
    frame = _read_frame(path, NOTES_COLUMNS)
    records = []
    seen: Dict[str, int] = {}

    for position, (admission_id, label, text) in enumerate(frame.itertuples(index=False, name=None)):
        row = position + 1
        key = _parse_key(admission_id, path, row, "admission_id")
        if key in seen:
            raise DataFormatError(
                f"duplicate admission_id {key!r} (first seen at row {seen[key]})",
                path=path,
                row=row,
                column="admission_id",
            )
        seen[key] = row
        records.append(NoteRecord(
            admission_id=key,
            text=text if text != "" else None,
            label=_parse_label(label, path, row),
        ))

    logger.info("Loaded %d notes from %s", len(records), path)
    return records


def load_vitals(path: str) -> List[VitalRecord]:
    """Load labeled vital-sign series from a long-format CSV.

    Physiologic range is not checked here; see
    ``vital_features.plausibility_issues``.

    Args:
        path: Path to a vitals CSV file

    Returns:
        One VitalRecord per distinct record_id, in order of first appearance
    """
    frame = _read_frame(path, VITALS_COLUMNS)
    grouped: "OrderedDict[str, Dict[str, List[float]]]" = OrderedDict()
    labels: Dict[str, int] = {}

    for position, (record_id, label, signal, raw_value) in enumerate(frame.itertuples(index=False, name=None)):
        row = position + 1
        key = _parse_key(record_id, path, row, "record_id")
        parsed_label = _parse_label(label, path, row)
        name = signal.strip().upper()
        if name not in SIGNALS:
            raise DataFormatError(
                f"unknown signal {signal!r}; expected one of {list(SIGNALS)}",
                path=path,
                row=row,
                column="signal",
            )
        try:
            value = float(raw_value)
        except ValueError as e:
            raise DataFormatError(
                f"value {raw_value!r} is not numeric", path=path, row=row, column="value"
            ) from e
        if not math.isfinite(value):
            raise DataFormatError(f"value {raw_value!r} is not finite", path=path, row=row, column="value")

        if key not in grouped:
            grouped[key] = {signal_name: [] for signal_name in SIGNALS}
            labels[key] = parsed_label
        elif labels[key] != parsed_label:
            raise DataFormatError(
                f"record {key!r} has conflicting labels {labels[key]} and {parsed_label}",
                path=path,
                row=row,
                column="label",
            )
        grouped[key][name].append(value)

    records = []
    for key, series in grouped.items():
        for signal_name in SIGNALS:
            if not series[signal_name]:
                raise DataFormatError(f"record {key!r} has an empty {signal_name} series", path=path)
        records.append(VitalRecord(
            record_id=key,
            label=labels[key],
            heart_rate=tuple(series[HEART_RATE]),
            spo2=tuple(series[SPO2]),
            resp_rate=tuple(series[RESP_RATE]),
        ))

    logger.info("Loaded %d vital records from %s", len(records), path)
    return records


def save_notes(records: Sequence[NoteRecord], path: str) -> str:
    """Write notes to CSV in the schema read by ``load_notes``.

    Args:
        records: Notes to write
        path: Output file path

    Returns:
        The path written
    """
    frame = pd.DataFrame(
        [(record.admission_id, record.label, record.text or "") for record in records],
        columns=list(NOTES_COLUMNS),
    )
    frame.to_csv(path, index=False, quoting=csv.QUOTE_ALL, encoding="utf-8")
    return path


def save_vitals(records: Sequence[VitalRecord], path: str) -> str:
    """Write vital records to long-format CSV.

    Args:
        records: Records to write
        path: Output file path

    Returns:
        The path written
    """
    rows = []
    for record in records:
        for signal_name in SIGNALS:
            for value in record.series(signal_name):
                rows.append((record.record_id, record.label, signal_name, repr(float(value))))
    frame = pd.DataFrame(rows, columns=list(VITALS_COLUMNS))
    frame.to_csv(path, index=False, encoding="utf-8")
    return path


def summarize_labels(records: Sequence[LabeledRecord]) -> LabelSummary:
    """Count positives and negatives in a labeled dataset.

    Args:
        records: Labeled note or vital records

    Returns:
        Exact class counts and prevalence
    """
    if not records:
        raise ValueError("cannot summarize an empty dataset")
    n_positive = sum(1 for record in records if record.label == 1)
    n_total = len(records)
    return LabelSummary(
        n_total=n_total,
        n_positive=n_positive,
        n_negative=n_total - n_positive,
        prevalence=n_positive / n_total,
    )


def record_key(record: LabeledRecord) -> str:
    """Return the identifier of a note or vital record."""
    if isinstance(record, NoteRecord):
        return record.admission_id
    return record.record_id
