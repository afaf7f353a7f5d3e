"""Clinical note featurization module.

This module turns notes into a bag-of-words Document-Term-Matrix: text
cleanup, tokenization, stop-word filtering, a frequency-capped vocabulary
and sparse count vectors.
"""

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import sparse

from cpml.errors import DataFormatError, FeatureError

logger = logging.getLogger(__name__)

DEFAULT_MAX_FEATURES = 3000
MIN_TOKEN_LENGTH = 2

_LINE_BREAKS = re.compile(r"\r\n|\r|\n")
_WORD = re.compile(r"[^\W\d_]+")

DEFAULT_STOP_WORDS = frozenset({
    "a", "about", "after", "all", "also", "am", "an", "and", "any", "are",
    "as", "at", "be", "been", "but", "by", "can", "did", "do", "for",
    "from", "had", "has", "have", "he", "her", "his", "if", "in", "into",
    "is", "it", "its", "may", "no", "not", "of", "on", "or", "per",
    "she", "so", "than", "that", "the", "their", "then", "there", "this", "to",
    "was", "were", "which", "will", "with",
})


@dataclass(frozen=True)
class StopWordList:
    """Lowercase tokens excluded from the vocabulary."""

    terms: FrozenSet[str]

    def __post_init__(self):
        for term in self.terms:
            if term != term.lower() or any(char.isspace() for char in term) or not term:
                raise ValueError(f"stop word {term!r} must be lowercase without whitespace")

    def __contains__(self, token: object) -> bool:
        return token in self.terms

    @classmethod
    def default(cls, extra: Iterable[str] = ()) -> "StopWordList":
        """Shipped English function-word list, optionally extended."""
        return cls(frozenset(DEFAULT_STOP_WORDS | {term.strip().lower() for term in extra}))

    @classmethod
    def from_file(cls, path: str) -> "StopWordList":
        """Load a stop-word list, one term per line; blank lines are skipped."""
        with open(path, "r", encoding="utf-8") as f:
            terms = {line.strip().lower() for line in f if line.strip()}
        return cls(frozenset(terms))


@dataclass(frozen=True)
class Vocabulary:
    """Ordered vocabulary; a term's position is its DTM column."""

    terms: Tuple[str, ...]
    max_features: int = DEFAULT_MAX_FEATURES
    index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("vocabulary terms must be distinct")
        if len(self.terms) > self.max_features:
            raise ValueError(f"vocabulary has {len(self.terms)} terms, more than the cap {self.max_features}")
        object.__setattr__(self, "index", {term: position for position, term in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def save(self, path: str) -> str:
        """Write one term per line in column order."""
        with open(path, "w", encoding="utf-8") as f:
            for term in self.terms:
                f.write(term + "\n")
        return path

    @classmethod
    def load(cls, path: str, max_features: Optional[int] = None) -> "Vocabulary":
        """Read a vocabulary written by ``save``."""
        with open(path, "r", encoding="utf-8") as f:
            terms = tuple(line.rstrip("\n") for line in f if line.rstrip("\n"))
        return cls(terms=terms, max_features=max_features or max(len(terms), 1))


@dataclass
class DocumentTermMatrix:
    """Sparse term counts, rows aligned with ``doc_ids``."""

    counts: sparse.csr_matrix
    vocabulary: Vocabulary
    doc_ids: Tuple[str, ...]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.counts.shape

    def dense_rows(self, positions: Sequence[int]) -> np.ndarray:
        """Dense float counts of the documents at the given row positions."""
        return self.counts[list(positions)].toarray().astype(float)

    def save_triplets(self, path: str) -> str:
        """Write the non-zero entries as (doc_id, term_index, count) rows."""
        coo = self.counts.tocoo()
        order = np.lexsort((coo.col, coo.row))
        frame = pd.DataFrame({
            "doc_id": [self.doc_ids[row] for row in coo.row[order]],
            "term_index": coo.col[order].astype(int),
            "count": coo.data[order].astype(int),
        })
        frame.to_csv(path, index=False, encoding="utf-8")
        return path

    @classmethod
    def load_triplets(cls, path: str, vocabulary: Vocabulary, doc_ids: Sequence[str]) -> "DocumentTermMatrix":
        """Rebuild a matrix from a triplet file and its vocabulary."""
        frame = pd.read_csv(path, dtype={"doc_id": str}, keep_default_na=False)
        positions = {doc_id: row for row, doc_id in enumerate(doc_ids)}
        unknown = set(frame["doc_id"]) - set(positions)
        if unknown:
            raise DataFormatError(f"unknown doc_id(s) {sorted(unknown)[:5]}", path=path, column="doc_id")
        counts = sparse.csr_matrix(
            (frame["count"].to_numpy(dtype=np.int64),
             (frame["doc_id"].map(positions).to_numpy(), frame["term_index"].to_numpy())),
            shape=(len(doc_ids), len(vocabulary)),
        )
        return cls(counts=counts, vocabulary=vocabulary, doc_ids=tuple(doc_ids))


@dataclass(frozen=True)
class TermCount:
    """One row of the term frequency table."""

    token: str
    document_frequency: int
    total_count: int


def clean_text(raw: Optional[str]) -> str:
    """Replace line breaks with a space and absent text with a single space.

    A CRLF pair counts as one line break.

    Args:
        raw: Note text, or None when absent

    Returns:
        Cleaned text
    """
    if raw is None:
        return " "
    return _LINE_BREAKS.sub(" ", raw)


def tokenize(text: str) -> List[str]:
    """Split text into lowercase alphabetic tokens.

    Any non-letter (digits, punctuation, whitespace) separates tokens, and
    tokens shorter than two characters are dropped.

    Args:
        text: Cleaned note text

    Returns:
        Tokens in document order
    """
    return [token for token in (match.lower() for match in _WORD.findall(text))
            if len(token) >= MIN_TOKEN_LENGTH]


def _frequency_order(totals: Counter) -> List[Tuple[str, int]]:
    return sorted(totals.items(), key=lambda item: (-item[1], item[0]))


def term_histogram(corpus: Sequence[Sequence[str]]) -> List[TermCount]:
    """Document frequency and total count of every token in a corpus.

    Args:
        corpus: Token lists, one per document

    Returns:
        Rows sorted by total count descending, then token
    """
    totals: Counter = Counter()
    documents: Counter = Counter()
    for tokens in corpus:
        totals.update(tokens)
        documents.update(set(tokens))
    return [TermCount(token, documents[token], total) for token, total in _frequency_order(totals)]


def save_term_histogram(table: Sequence[TermCount], path: str) -> str:
    """Write a term frequency table as CSV (token, document_frequency, total_count)."""
    frame = pd.DataFrame(
        [(row.token, row.document_frequency, row.total_count) for row in table],
        columns=["token", "document_frequency", "total_count"],
    )
    frame.to_csv(path, index=False, encoding="utf-8")
    return path


def build_vocabulary(corpus: Sequence[Sequence[str]],
                     stop_words: Optional[StopWordList] = None,
                     max_features: int = DEFAULT_MAX_FEATURES) -> Vocabulary:
    """Keep the most frequent non-stop tokens of a corpus.

    Args:
        corpus: Token lists, one per document
        stop_words: Tokens to exclude (default list when None)
        max_features: Maximum vocabulary size

    Returns:
        Vocabulary ordered by total count descending, ties lexicographic
    """
    if max_features < 1:
        raise ValueError(f"max_features must be at least 1, got {max_features}")
    stop_words = stop_words if stop_words is not None else StopWordList.default()

    totals: Counter = Counter()
    for tokens in corpus:
        totals.update(token for token in tokens if token not in stop_words)
    if not totals:
        raise FeatureError("corpus has no tokens left after stop-word removal")

    terms = tuple(token for token, _ in _frequency_order(totals)[:max_features])
    logger.debug("Vocabulary: %d of %d distinct terms kept", len(terms), len(totals))
    return Vocabulary(terms=terms, max_features=max_features)


def vectorize(corpus: Sequence[Sequence[str]],
              vocabulary: Vocabulary,
              doc_ids: Optional[Sequence[str]] = None) -> DocumentTermMatrix:
    """Count vocabulary terms per document.

    Args:
        corpus: Token lists, one per document
        vocabulary: Column definition; other tokens are ignored
        doc_ids: Row keys (defaults to row positions)

    Returns:
        Sparse Document-Term-Matrix
    """
    if doc_ids is None:
        doc_ids = [str(position) for position in range(len(corpus))]
    if len(doc_ids) != len(corpus):
        raise ValueError(f"{len(doc_ids)} doc_ids for {len(corpus)} documents")

    rows: List[int] = []
    columns: List[int] = []
    values: List[int] = []
    for row, tokens in enumerate(corpus):
        counts = Counter(vocabulary.index[token] for token in tokens if token in vocabulary.index)
        for column in sorted(counts):
            rows.append(row)
            columns.append(column)
            values.append(counts[column])

    matrix = sparse.csr_matrix(
        (np.asarray(values, dtype=np.int64), (np.asarray(rows, dtype=np.int64), np.asarray(columns, dtype=np.int64))),
        shape=(len(corpus), len(vocabulary)),
    )
    return DocumentTermMatrix(counts=matrix, vocabulary=vocabulary, doc_ids=tuple(doc_ids))


def prepare_corpus(texts: Iterable[Optional[str]]) -> List[List[str]]:
    """Clean and tokenize raw notes, preserving order."""
    return [tokenize(clean_text(text)) for text in texts]
