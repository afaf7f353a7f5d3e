"""Utility functions shared by the CPML modules."""

import hashlib
import json
import math
import os
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Union, get_args, get_origin, get_type_hints

import numpy as np

from cpml.errors import ConfigError

JSON_INDENT = 2
SCALAR_TYPE_NAMES = {bool: "a boolean", int: "an integer", float: "a number", str: "a string"}


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Create a seeded random generator.

    Every random draw in the package goes through a PCG64 generator seeded
    from a numpy SeedSequence, so the same seed gives the same stream on
    every platform. Extra integers select an independent sub-stream, e.g.
    ``make_rng(seed, record_index)`` for per-record draws.

    Args:
        seed: Non-negative integer seed
        *stream: Optional sub-stream selectors

    Returns:
        A numpy Generator backed by PCG64
    """
    if seed < 0 or any(value < 0 for value in stream):
        raise ValueError(f"seeds must be non-negative, got {(seed,) + stream}")
    entropy = [int(seed), *[int(value) for value in stream]]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def round_half_up(value: float) -> int:
    """Round to the nearest integer, halves away from zero for positives."""
    return int(math.floor(value + 0.5))


def canonical_json(data: Any) -> str:
    """Render data as compact JSON with sorted keys."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_digest(data: Mapping[str, Any]) -> str:
    """Short SHA-256 digest of a configuration mapping.

    Args:
        data: JSON-serializable configuration

    Returns:
        First 16 hex characters of the digest
    """
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()[:16]


def ensure_directory(path: str) -> str:
    """Create a directory if needed and return its absolute path."""
    os.makedirs(path, exist_ok=True)
    return os.path.abspath(path)


def write_json(data: Any, path: str) -> str:
    """Write data as indented JSON with sorted keys.

    Floats are written with Python's shortest round-trip repr, so reading the
    file back yields bit-identical values.

    Args:
        data: JSON-serializable object
        path: Output file path

    Returns:
        The path written
    """
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=JSON_INDENT, sort_keys=True)
        f.write("\n")
    return path


def read_json(path: str) -> Any:
    """Read a JSON document."""
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def as_float_list(values: Iterable[float]) -> list:
    """Convert numbers (including numpy scalars) to plain floats for JSON."""
    return [float(value) for value in values]


def as_matrix(rows: Any, name: str = "X") -> np.ndarray:
    """Coerce input to a finite 2-D float array.

    Args:
        rows: Array-like of shape (n, p)
        name: Name used in error messages

    Returns:
        A float64 array of shape (n, p)
    """
    matrix = np.asarray(rows, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    if matrix.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError(f"{name} contains non-finite values")
    return matrix


def mean_or_none(values: Sequence[float]) -> Optional[float]:
    """Arithmetic mean of a sequence, None when empty."""
    return float(np.mean(values)) if len(values) else None


def _typed_value(value: Any, annotation: Any, name: str) -> Any:
    if get_origin(annotation) is Union:
        if value is None:
            return None
        annotation = next(arg for arg in get_args(annotation) if arg is not type(None))
    if annotation not in SCALAR_TYPE_NAMES:
        return value
    # bool is an int subclass but never a valid count or rate
    if isinstance(value, bool) and annotation is not bool:
        raise ConfigError(f"{name} must be {SCALAR_TYPE_NAMES[annotation]}, got {value!r}")
    if annotation is float and isinstance(value, int):
        return float(value)
    if not isinstance(value, annotation):
        raise ConfigError(f"{name} must be {SCALAR_TYPE_NAMES[annotation]}, got {value!r}")
    return value


def check_field_types(cls: type, data: Mapping[str, Any], path: str = "") -> Dict[str, Any]:
    """Check the scalar settings of a mapping against a dataclass's annotations.

    Integers are accepted where a number is expected and converted to float.
    Nested sections and collections pass through unchanged.

    Args:
        cls: Dataclass the mapping will be passed to
        data: Settings keyed by field name
        path: Dotted prefix used in error messages

    Returns:
        A copy of the mapping with numbers normalized
    """
    hints = get_type_hints(cls)
    return {
        key: _typed_value(value, hints[key], f"{path}.{key}" if path else key) if key in hints else value
        for key, value in data.items()
    }
