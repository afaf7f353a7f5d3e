"""Seeded synthetic cohorts standing in for credentialed clinical data.

Vitals: every record draws one baseline level per signal from its class
Gaussian, and each sample is that baseline plus Gaussian noise with the
signal's ``within_std``. With ``within_std = 0`` every summary statistic of
the signal equals the baseline, so a single shifted signal has an exactly
known optimal AUC (``analytic_auc_target``).

Notes: tokens are drawn from a Zipf-like multinomial over a generated
vocabulary plus clinical marker words; positive notes multiply marker
probabilities by ``1 + marker_boost``. Stop words are mixed in at a fixed
rate so the stop-word path is exercised.

Draws for record i come from ``make_rng(seed, i)``, so records are
independent of generation order. Labels come from ``make_rng(seed)``.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy.special import erf

from cpml.errors import ConfigError
from cpml.ingest import HEART_RATE, RESP_RATE, SPO2, NoteRecord, VitalRecord
from cpml.text_features import DEFAULT_STOP_WORDS
from cpml.utils import check_field_types, make_rng, round_half_up

logger = logging.getLogger(__name__)

VALUE_RANGE = (0.0, 300.0)
MAX_RESAMPLE_ROUNDS = 1000
_LABEL_STREAM = 0
_RECORD_STREAM_OFFSET = 1

MARKER_TOKENS = (
    "wheezing", "dyspnea", "bronchodilator", "exacerbation", "sputum",
    "emphysema", "nebulizer", "tiotropium", "albuterol", "hyperinflation",
    "rhonchi", "hypercapnia", "spirometry", "inhaler", "prednisone",
    "bronchitis", "cough", "oxygen", "accessory", "tachypnea",
)


@dataclass(frozen=True)
class SignalDistribution:
    """Class-conditional baseline Gaussians and within-record noise of one signal."""

    negative_mean: float
    positive_mean: float
    negative_std: float
    positive_std: float
    within_std: float = 0.0

    @property
    def shift(self) -> float:
        return self.positive_mean - self.negative_mean


def _default_signals() -> Dict[str, SignalDistribution]:
    return {
        HEART_RATE: SignalDistribution(80.0, 100.0, 10.0, 10.0, 4.0),
        RESP_RATE: SignalDistribution(15.0, 19.0, 2.5, 2.5, 1.5),
        SPO2: SignalDistribution(96.0, 91.0, 2.0, 2.0, 1.0),
    }


@dataclass(frozen=True)
class VitalsSynthConfig:
    """Series lengths and per-signal distributions of a vitals cohort."""

    min_samples: int = 20
    max_samples: int = 60
    signals: Dict[str, SignalDistribution] = field(default_factory=_default_signals)


@dataclass(frozen=True)
class NotesSynthConfig:
    """Vocabulary, length and marker settings of a notes corpus."""

    vocabulary_size: int = 5000
    mean_length: float = 120.0
    min_length: int = 5
    zipf_exponent: float = 1.05
    marker_count: int = 12
    marker_rate: float = 0.001
    marker_boost: float = 8.0
    stop_word_rate: float = 0.25
    missing_rate: float = 0.01
    line_length: int = 15


@dataclass(frozen=True)
class SynthConfig:
    """Size, prevalence and generator settings of a synthetic dataset."""

    n_records: int = 1000
    prevalence: float = 0.25
    seed: int = 0
    vitals: VitalsSynthConfig = field(default_factory=VitalsSynthConfig)
    notes: NotesSynthConfig = field(default_factory=NotesSynthConfig)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _strict_kwargs(cls: type, data: Mapping[str, Any], path: str) -> Dict[str, Any]:
    if not isinstance(data, Mapping):
        raise ConfigError(f"{path} must be a mapping")
    allowed = {item.name for item in fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {', '.join(f'{path}.{key}' for key in unknown)}")
    return check_field_types(cls, data, path)


def synth_config_from_dict(data: Mapping[str, Any], path: str = "synth") -> SynthConfig:
    """Build a validated SynthConfig from a mapping, rejecting unknown keys."""
    values = _strict_kwargs(SynthConfig, data, path)
    if "vitals" in values:
        vitals = _strict_kwargs(VitalsSynthConfig, values["vitals"] or {}, f"{path}.vitals")
        if "signals" in vitals:
            signals = _default_signals()
            overrides = vitals["signals"] or {}
            if not isinstance(overrides, Mapping):
                raise ConfigError(f"{path}.vitals.signals must be a mapping")
            for name, dist in overrides.items():
                if name not in signals:
                    raise ConfigError(f"unknown signal {path}.vitals.signals.{name}")
                merged = asdict(signals[name])
                merged.update(_strict_kwargs(SignalDistribution, dist, f"{path}.vitals.signals.{name}"))
                signals[name] = SignalDistribution(**{key: float(value) for key, value in merged.items()})
            vitals["signals"] = signals
        values["vitals"] = VitalsSynthConfig(**vitals)
    if "notes" in values:
        values["notes"] = NotesSynthConfig(**_strict_kwargs(NotesSynthConfig, values["notes"] or {}, f"{path}.notes"))
    config = SynthConfig(**values)
    validate_synth_config(config)
    return config


def validate_synth_config(config: SynthConfig) -> None:
    """Raise ConfigError when a generator setting is out of range."""
    if config.n_records < 2:
        raise ConfigError(f"n_records must be at least 2, got {config.n_records}")
    if not 0.0 < config.prevalence < 1.0:
        raise ConfigError(f"prevalence must be in (0, 1), got {config.prevalence}")
    n_positive = round_half_up(config.prevalence * config.n_records)
    if n_positive in (0, config.n_records):
        raise ConfigError(f"prevalence {config.prevalence} leaves a class empty for {config.n_records} records")
    if config.seed < 0:
        raise ConfigError(f"seed must be non-negative, got {config.seed}")

    vitals = config.vitals
    if vitals.min_samples < 1 or vitals.max_samples < vitals.min_samples:
        raise ConfigError(f"invalid series length range [{vitals.min_samples}, {vitals.max_samples}]")
    for name, dist in vitals.signals.items():
        if dist.negative_std <= 0 or dist.positive_std <= 0:
            raise ConfigError(f"signal {name}: class stds must be positive")
        if dist.within_std < 0:
            raise ConfigError(f"signal {name}: within_std must be non-negative")
        for mean in (dist.negative_mean, dist.positive_mean):
            if not VALUE_RANGE[0] <= mean <= VALUE_RANGE[1]:
                raise ConfigError(f"signal {name}: mean {mean} outside {VALUE_RANGE}")

    notes = config.notes
    if notes.vocabulary_size < 1 or notes.min_length < 1 or notes.mean_length <= 0:
        raise ConfigError("notes vocabulary_size, min_length and mean_length must be positive")
    if not 0 <= notes.marker_count <= len(MARKER_TOKENS):
        raise ConfigError(f"marker_count must be in [0, {len(MARKER_TOKENS)}]")
    if notes.marker_boost < 0:
        raise ConfigError("marker_boost must be non-negative")
    if notes.marker_rate < 0 or notes.marker_rate * notes.marker_count * (1 + notes.marker_boost) >= 1:
        raise ConfigError("marker probabilities must leave mass for the base vocabulary")
    if not 0 <= notes.stop_word_rate < 1 or not 0 <= notes.missing_rate < 1:
        raise ConfigError("stop_word_rate and missing_rate must be in [0, 1)")
    if notes.line_length < 1:
        raise ConfigError("line_length must be positive")


def draw_labels(n_records: int, prevalence: float, seed: int) -> np.ndarray:
    """Exactly round(prevalence * n) positives at random positions."""
    n_positive = round_half_up(prevalence * n_records)
    labels = np.zeros(n_records, dtype=int)
    labels[make_rng(seed, _LABEL_STREAM).permutation(n_records)[:n_positive]] = 1
    return labels


def truncated_normal(rng: np.random.Generator,
                     mean: float,
                     std: float,
                     size: int,
                     low: float = VALUE_RANGE[0],
                     high: float = VALUE_RANGE[1]) -> np.ndarray:
    """Gaussian draws restricted to [low, high] by resampling out-of-range values."""
    values = rng.normal(mean, std, size) if std > 0 else np.full(size, float(mean))
    for _ in range(MAX_RESAMPLE_ROUNDS):
        outside = (values < low) | (values > high)
        if not outside.any():
            return values
        values[outside] = rng.normal(mean, std, int(outside.sum()))
    raise ConfigError(f"N({mean}, {std}) rarely falls inside [{low}, {high}]")


def _vital_record(config: SynthConfig, index: int, label: int, seed: int) -> VitalRecord:
    rng = make_rng(seed, _RECORD_STREAM_OFFSET, index)
    series = {}
    for name in (HEART_RATE, SPO2, RESP_RATE):
        dist = config.vitals.signals[name]
        length = int(rng.integers(config.vitals.min_samples, config.vitals.max_samples + 1))
        mean, std = (dist.positive_mean, dist.positive_std) if label else (dist.negative_mean, dist.negative_std)
        baseline = float(truncated_normal(rng, mean, std, 1)[0])
        series[name] = tuple(float(value) for value in truncated_normal(rng, baseline, dist.within_std, length))
    return VitalRecord(
        record_id=f"v{index + 1:06d}",
        label=int(label),
        heart_rate=series[HEART_RATE],
        spo2=series[SPO2],
        resp_rate=series[RESP_RATE],
    )


def generate_vitals_cohort(config: SynthConfig, seed: Optional[int] = None) -> List[VitalRecord]:
    """Generate labeled vital-sign records.

    Args:
        config: Generator configuration
        seed: Overrides ``config.seed`` when given

    Returns:
        ``config.n_records`` records with exactly round(prevalence * n) positives
    """
    validate_synth_config(config)
    seed = config.seed if seed is None else seed
    labels = draw_labels(config.n_records, config.prevalence, seed)
    records = [_vital_record(config, index, label, seed) for index, label in enumerate(labels)]
    logger.info("Generated %d vital records (%d positive)", len(records), int(labels.sum()))
    return records


def _alpha_suffix(index: int) -> str:
    letters = []
    index += 26 * 26
    while index:
        index, remainder = divmod(index, 26)
        letters.append(chr(ord("a") + remainder))
    return "".join(reversed(letters))


def synthetic_vocabulary(size: int) -> List[str]:
    """Deterministic alphabetic filler terms (``tok`` plus a letter suffix)."""
    return [f"tok{_alpha_suffix(index)}" for index in range(size)]


def token_distributions(notes: NotesSynthConfig) -> Tuple[List[str], np.ndarray, np.ndarray]:
    """Vocabulary and the negative/positive token probabilities.

    Returns:
        Tuple of (terms, negative probabilities, positive probabilities)
    """
    filler = synthetic_vocabulary(notes.vocabulary_size)
    markers = list(MARKER_TOKENS[:notes.marker_count])
    zipf = 1.0 / np.arange(1, len(filler) + 1, dtype=float) ** notes.zipf_exponent

    def distribution(marker_rate: float) -> np.ndarray:
        filler_mass = 1.0 - marker_rate * len(markers)
        return np.concatenate([np.full(len(markers), marker_rate), filler_mass * zipf / zipf.sum()])

    negative = distribution(notes.marker_rate)
    positive = distribution(notes.marker_rate * (1.0 + notes.marker_boost))
    return markers + filler, negative, positive


def _note_text(rng: np.random.Generator, notes: NotesSynthConfig, terms: List[str],
               probabilities: np.ndarray, stop_words: List[str]) -> Optional[str]:
    if rng.random() < notes.missing_rate:
        return None
    length = max(notes.min_length, int(rng.poisson(notes.mean_length)))
    tokens = [terms[position] for position in rng.choice(len(terms), size=length, p=probabilities)]
    is_stop = rng.random(length) < notes.stop_word_rate
    stop_picks = rng.integers(0, len(stop_words), size=length)
    words = [stop_words[pick] if stop else token for token, stop, pick in zip(tokens, is_stop, stop_picks)]
    lines = [" ".join(words[start:start + notes.line_length]) for start in range(0, length, notes.line_length)]
    breaks = ["\r\n" if flag else "\n" for flag in rng.random(len(lines)) < 0.5]
    return "".join(line + (breaks[position] if position < len(lines) - 1 else "")
                   for position, line in enumerate(lines))


def generate_notes_corpus(config: SynthConfig, seed: Optional[int] = None) -> List[NoteRecord]:
    """Generate labeled clinical notes.

    Args:
        config: Generator configuration
        seed: Overrides ``config.seed`` when given

    Returns:
        ``config.n_records`` notes with exactly round(prevalence * n) positives
    """
    validate_synth_config(config)
    seed = config.seed if seed is None else seed
    labels = draw_labels(config.n_records, config.prevalence, seed)
    terms, negative, positive = token_distributions(config.notes)
    stop_words = sorted(DEFAULT_STOP_WORDS)

    records = []
    for index, label in enumerate(labels):
        rng = make_rng(seed, _RECORD_STREAM_OFFSET, index)
        text = _note_text(rng, config.notes, terms, positive if label else negative, stop_words)
        records.append(NoteRecord(admission_id=f"h{index + 1:06d}", text=text, label=int(label)))
    logger.info("Generated %d notes (%d positive)", len(records), int(labels.sum()))
    return records


def normal_cdf(z: float) -> float:
    """Standard normal CDF via the error function."""
    return 0.5 * (1.0 + float(erf(z / math.sqrt(2.0))))


def analytic_auc_target(config: SynthConfig) -> float:
    """Optimal AUC of the single shifted signal's record baseline.

    For class baselines N(mu0, s0) and N(mu1, s1) the AUC of the baseline
    is Phi(|mu1 - mu0| / sqrt(s0^2 + s1^2)), which is Phi(dmu / (s sqrt 2))
    for a common std. When that signal's ``within_std`` is 0 every summary
    statistic equals the baseline.

    Args:
        config: Configuration with at most one shifted signal

    Returns:
        Target AUC (0.5 when no signal is shifted)
    """
    validate_synth_config(config)
    shifted = [(name, dist) for name, dist in config.vitals.signals.items() if dist.shift != 0]
    if len(shifted) > 1:
        raise ConfigError(
            f"analytic target needs a single shifted signal, got {[name for name, _ in shifted]}"
        )
    if not shifted:
        return 0.5
    _, dist = shifted[0]
    return normal_cdf(abs(dist.shift) / math.sqrt(dist.negative_std ** 2 + dist.positive_std ** 2))
