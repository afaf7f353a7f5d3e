"""Pipeline configuration.

One JSON or YAML document describes a run. Unknown keys are rejected at
every level, and the defaults follow the published setup: 3000 note terms,
15 PLS components, a 50:50 split for notes and 70:30 for vitals.
"""

import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml

from cpml.classifiers import DEFAULT_C, DEFAULT_EIGEN_CUTOFF, DEFAULT_N_ROUNDS, DEFAULT_TOL, MODEL_TYPES
from cpml.errors import ConfigError
from cpml.pls import DEFAULT_N_COMPONENTS
from cpml.synthetic import SynthConfig, synth_config_from_dict
from cpml.text_features import DEFAULT_MAX_FEATURES
from cpml.utils import check_field_types, config_digest

NOTES = "notes"
VITALS = "vitals"
MODEL_KINDS = (NOTES, VITALS)
ALL_CLASSIFIERS = "all"
DEFAULT_TRAIN_FRACTIONS = {NOTES: 0.5, VITALS: 0.7}
DEFAULT_OUTPUT_DIR = "./cpml_output"


@dataclass(frozen=True)
class SvmConfig:
    C: float = DEFAULT_C
    gamma: Optional[float] = None
    tol: float = DEFAULT_TOL
    max_iter: Optional[int] = None


@dataclass(frozen=True)
class QdaConfig:
    eigen_cutoff: float = DEFAULT_EIGEN_CUTOFF


@dataclass(frozen=True)
class AdaBoostConfig:
    n_rounds: int = DEFAULT_N_ROUNDS


@dataclass(frozen=True)
class PipelineConfig:
    """Effective settings of one pipeline run."""

    model_kind: str
    input_path: str
    output_dir: str = DEFAULT_OUTPUT_DIR
    train_fraction: Optional[float] = None
    max_features: int = DEFAULT_MAX_FEATURES
    n_components: int = DEFAULT_N_COMPONENTS
    scale_features: bool = False
    stop_words: Tuple[str, ...] = ()
    classifier: str = ALL_CLASSIFIERS
    threshold: float = 0.0
    seeds: Tuple[int, ...] = (0,)
    svm: SvmConfig = field(default_factory=SvmConfig)
    qda: QdaConfig = field(default_factory=QdaConfig)
    adaboost: AdaBoostConfig = field(default_factory=AdaBoostConfig)
    synth: Optional[SynthConfig] = None

    @property
    def effective_train_fraction(self) -> float:
        if self.train_fraction is not None:
            return self.train_fraction
        return DEFAULT_TRAIN_FRACTIONS[self.model_kind]

    @property
    def classifiers(self) -> Tuple[str, ...]:
        if self.classifier == ALL_CLASSIFIERS:
            return MODEL_TYPES
        return (self.classifier,)

    def classifier_params(self, model_type: str) -> Dict[str, Any]:
        """Keyword arguments for ``classifiers.train_classifier``."""
        if model_type == "svm":
            return asdict(self.svm)
        if model_type == "qda":
            return asdict(self.qda)
        return asdict(self.adaboost)

    def to_dict(self) -> Dict[str, Any]:
        """Plain mapping of every setting, defaults resolved."""
        data = asdict(self)
        data["train_fraction"] = self.effective_train_fraction
        data["stop_words"] = list(self.stop_words)
        data["seeds"] = list(self.seeds)
        return data

    @property
    def digest(self) -> str:
        """Digest of the settings that influence results (output_dir excluded)."""
        data = self.to_dict()
        data.pop("output_dir")
        return config_digest(data)


def _check_keys(cls: type, data: Mapping[str, Any], path: str) -> None:
    allowed = {item.name for item in fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        where = f"{path}." if path else ""
        raise ConfigError(f"unknown configuration key(s): {', '.join(where + key for key in unknown)}")


def _section(cls: type, data: Optional[Mapping[str, Any]], path: str):
    if data is None:
        return cls()
    if not isinstance(data, Mapping):
        raise ConfigError(f"{path} must be a mapping")
    _check_keys(cls, data, path)
    return cls(**check_field_types(cls, data, path))


def config_from_dict(data: Mapping[str, Any]) -> PipelineConfig:
    """Build and validate a PipelineConfig.

    Args:
        data: Parsed configuration document

    Returns:
        The validated configuration
    """
    if not isinstance(data, Mapping):
        raise ConfigError("configuration must be a mapping")
    _check_keys(PipelineConfig, data, "")
    for required in ("model_kind", "input_path"):
        if required not in data:
            raise ConfigError(f"missing required configuration key: {required}")

    values = check_field_types(PipelineConfig, data)
    values["svm"] = _section(SvmConfig, data.get("svm"), "svm")
    values["qda"] = _section(QdaConfig, data.get("qda"), "qda")
    values["adaboost"] = _section(AdaBoostConfig, data.get("adaboost"), "adaboost")
    if data.get("synth") is not None:
        values["synth"] = synth_config_from_dict(data["synth"])
    if "seeds" in values:
        seeds = values["seeds"]
        seeds = list(seeds) if isinstance(seeds, (list, tuple)) else [seeds]
        if any(isinstance(seed, bool) or not isinstance(seed, int) for seed in seeds):
            raise ConfigError(f"seeds must be integers, got {values['seeds']!r}")
        values["seeds"] = tuple(seeds)
    if "stop_words" in values:
        words = values["stop_words"] or ()
        if not isinstance(words, (list, tuple)) or not all(isinstance(word, str) for word in words):
            raise ConfigError(f"stop_words must be a list of strings, got {values['stop_words']!r}")
        values["stop_words"] = tuple(words)
    try:
        config = PipelineConfig(**values)
    except TypeError as e:
        raise ConfigError(str(e)) from e
    validate_config(config)
    return config


def validate_config(config: PipelineConfig) -> None:
    """Raise ConfigError when a setting is out of range."""
    if config.model_kind not in MODEL_KINDS:
        raise ConfigError(f"model_kind must be one of {list(MODEL_KINDS)}, got {config.model_kind!r}")
    if config.classifier not in MODEL_TYPES + (ALL_CLASSIFIERS,):
        raise ConfigError(f"classifier must be one of {list(MODEL_TYPES) + [ALL_CLASSIFIERS]}, got {config.classifier!r}")
    if not 0.0 < config.effective_train_fraction < 1.0:
        raise ConfigError(f"train_fraction must be in (0, 1), got {config.train_fraction}")
    if config.max_features < 1:
        raise ConfigError("max_features must be at least 1")
    if config.n_components < 1:
        raise ConfigError("n_components must be at least 1")
    if not config.seeds or any(seed < 0 for seed in config.seeds):
        raise ConfigError("seeds must be a non-empty list of non-negative integers")
    if len(set(config.seeds)) != len(config.seeds):
        raise ConfigError("seeds must be distinct")
    if config.svm.C <= 0 or config.svm.tol <= 0:
        raise ConfigError("svm.C and svm.tol must be positive")
    if config.svm.gamma is not None and config.svm.gamma <= 0:
        raise ConfigError("svm.gamma must be positive or null")
    if config.adaboost.n_rounds < 1:
        raise ConfigError("adaboost.n_rounds must be at least 1")
    if not 0 < config.qda.eigen_cutoff < 1:
        raise ConfigError("qda.eigen_cutoff must be in (0, 1)")


def load_config(path: str) -> PipelineConfig:
    """Read a JSON or YAML configuration file.

    Relative ``input_path`` and ``output_dir`` values are resolved against
    the configuration file's directory.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError(f"cannot read configuration {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"configuration {path} is not valid JSON/YAML: {e}") from e

    if isinstance(data, dict):
        base = os.path.dirname(os.path.abspath(path))
        for key in ("input_path", "output_dir"):
            if isinstance(data.get(key), str) and not os.path.isabs(data[key]):
                data[key] = os.path.normpath(os.path.join(base, data[key]))
    return config_from_dict(data)


def apply_overrides(config: PipelineConfig,
                    seed: Optional[int] = None,
                    output_dir: Optional[str] = None,
                    classifier: Optional[str] = None) -> PipelineConfig:
    """Return a copy with command-line overrides applied."""
    changes: Dict[str, Any] = {}
    if seed is not None:
        changes["seeds"] = (seed,)
        if config.synth is not None:
            changes["synth"] = replace(config.synth, seed=seed)
    if output_dir is not None:
        changes["output_dir"] = output_dir
    if classifier is not None:
        changes["classifier"] = classifier
    updated = replace(config, **changes)
    validate_config(updated)
    return updated


def generate_yaml(config: PipelineConfig) -> str:
    """Render the effective configuration as YAML."""
    return yaml.safe_dump(config.to_dict(), sort_keys=False, default_flow_style=False)


def save_effective_config(config: PipelineConfig, output_dir: str) -> str:
    """Echo the effective configuration to effective_config.yaml."""
    os.makedirs(output_dir, exist_ok=True)
    full_path = os.path.join(output_dir, "effective_config.yaml")
    with open(full_path, "w", encoding="utf-8") as f:
        f.write(generate_yaml(config))
    return full_path
