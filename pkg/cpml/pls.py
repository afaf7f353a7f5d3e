"""Partial least-squares dimensionality reduction.

PLS1 (a single response) computed with the NIPALS deflation scheme. For one
response the weight of each component has a closed form, w = X'y / |X'y|,
so no inner iteration is needed:

    t = X w            scores
    p = X't / t't      x-loading
    q = y't / t't      y-loading
    X <- X - t p'      deflation
    y <- y - q t

The model is used purely to project feature matrices onto k score columns.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from cpml.errors import DimensionError, ModelFitError
from cpml.utils import as_float_list, as_matrix, read_json, write_json

logger = logging.getLogger(__name__)

DEFAULT_N_COMPONENTS = 15
WEIGHT_NORM_FLOOR = 1e-12
RELATIVE_NORM_FLOOR = 1e-10
SCHEMA_VERSION = 1


@dataclass
class PlsModel:
    """Fitted PLS1 projection."""

    n_components: int
    x_means: np.ndarray
    y_mean: float
    weights: np.ndarray
    x_loadings: np.ndarray
    y_loadings: np.ndarray
    x_scales: Optional[np.ndarray] = None
    residual_norms: List[float] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return int(self.x_means.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready representation with full float precision."""
        return {
            "model_type": "pls",
            "schema_version": SCHEMA_VERSION,
            "n_components": self.n_components,
            "x_means": as_float_list(self.x_means),
            "x_scales": None if self.x_scales is None else as_float_list(self.x_scales),
            "y_mean": float(self.y_mean),
            "weights": [as_float_list(row) for row in self.weights],
            "x_loadings": [as_float_list(row) for row in self.x_loadings],
            "y_loadings": as_float_list(self.y_loadings),
            "residual_norms": as_float_list(self.residual_norms),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PlsModel":
        if data.get("model_type") != "pls":
            raise ValueError(f"not a PLS model document: model_type={data.get('model_type')!r}")
        n_features = len(data["x_means"])
        return cls(
            n_components=int(data["n_components"]),
            x_means=np.asarray(data["x_means"], dtype=float),
            y_mean=float(data["y_mean"]),
            weights=np.asarray(data["weights"], dtype=float).reshape(-1, n_features),
            x_loadings=np.asarray(data["x_loadings"], dtype=float).reshape(-1, n_features),
            y_loadings=np.asarray(data["y_loadings"], dtype=float),
            x_scales=None if data.get("x_scales") is None else np.asarray(data["x_scales"], dtype=float),
            residual_norms=[float(value) for value in data.get("residual_norms", [])],
        )

    def save(self, path: str, extra: Optional[Dict[str, Any]] = None) -> str:
        """Write the model as JSON, with optional provenance fields."""
        document = self.to_dict()
        document.update(extra or {})
        return write_json(document, path)

    @classmethod
    def load(cls, path: str) -> "PlsModel":
        return cls.from_dict(read_json(path))


def max_components(n_rows: int, n_features: int) -> int:
    """Largest component count accepted for a matrix shape."""
    return max(min(n_rows - 1, n_features), 0)


def _column_scales(X: np.ndarray) -> np.ndarray:
    scales = X.std(axis=0, ddof=1)
    scales[scales == 0] = 1.0
    return scales


def fit_pls(X: Any, y: Any, n_components: int = DEFAULT_N_COMPONENTS, scale: bool = False) -> PlsModel:
    """Fit k PLS1 components on features and a scalar response.

    Args:
        X: Feature matrix, shape (n, p)
        y: Response vector (e.g. 0/1 labels), length n
        n_components: Number of components k
        scale: Divide centered columns by their standard deviation

    Returns:
        The fitted model
    """
    X = as_matrix(X)
    y = np.asarray(y, dtype=float).ravel()
    n_rows, n_features = X.shape
    if n_rows != y.shape[0]:
        raise DimensionError(f"X has {n_rows} rows but y has {y.shape[0]} values")
    if n_rows < 2:
        raise ModelFitError("PLS needs at least 2 rows")
    bound = max_components(n_rows, n_features)
    if n_components < 1 or n_components > bound:
        raise ModelFitError(
            f"n_components={n_components} outside [1, {bound}] for a {n_rows}x{n_features} matrix",
            achievable_components=bound,
        )
    if np.ptp(y) == 0:
        raise ModelFitError("response is constant; both classes must be present")

    x_means = X.mean(axis=0)
    x_scales = _column_scales(X) if scale else None
    residual = X - x_means
    if x_scales is not None:
        residual = residual / x_scales
    y_mean = float(y.mean())
    response = y - y_mean

    weights = np.zeros((n_components, n_features))
    x_loadings = np.zeros((n_components, n_features))
    y_loadings = np.zeros(n_components)
    residual_norms = [float(np.linalg.norm(residual))]

    first_norm = 0.0
    for component in range(n_components):
        direction = residual.T @ response
        norm = float(np.linalg.norm(direction))
        if component == 0:
            first_norm = norm
        # absolute floor, plus a floor relative to the first direction
        if norm < WEIGHT_NORM_FLOOR or norm <= RELATIVE_NORM_FLOOR * first_norm:
            raise ModelFitError(
                f"X is fully deflated after {component} component(s); "
                f"requested {n_components}",
                achievable_components=component,
            )
        w = direction / norm
        t = residual @ w
        tt = float(t @ t)
        p = residual.T @ t / tt
        q = float(response @ t) / tt

        residual = residual - np.outer(t, p)
        response = response - q * t

        weights[component] = w
        x_loadings[component] = p
        y_loadings[component] = q
        residual_norms.append(float(np.linalg.norm(residual)))

    logger.debug("PLS fitted %d components; residual norm %.3g -> %.3g",
                 n_components, residual_norms[0], residual_norms[-1])
    return PlsModel(
        n_components=n_components,
        x_means=x_means,
        y_mean=y_mean,
        weights=weights,
        x_loadings=x_loadings,
        y_loadings=y_loadings,
        x_scales=x_scales,
        residual_norms=residual_norms,
    )


def transform(model: PlsModel, X: Any) -> np.ndarray:
    """Project rows onto the fitted components.

    Uses the same centering and sequential deflation as fitting, so each
    row is projected independently of the others.

    Args:
        model: Fitted PLS model
        X: Feature matrix, shape (n, p)

    Returns:
        Score matrix, shape (n, k)
    """
    if np.ndim(X) == 1:
        X = np.asarray(X, dtype=float).reshape(1, -1)
    X = as_matrix(X)
    if X.shape[1] != model.n_features:
        raise DimensionError(f"X has {X.shape[1]} features, model expects {model.n_features}")
    residual = X - model.x_means
    if model.x_scales is not None:
        residual = residual / model.x_scales
    scores = np.zeros((X.shape[0], model.n_components))
    for component in range(model.n_components):
        t = residual @ model.weights[component]
        residual = residual - np.outer(t, model.x_loadings[component])
        scores[:, component] = t
    return scores


def fit_transform(X: Any, y: Any, n_components: int = DEFAULT_N_COMPONENTS, scale: bool = False):
    """Fit a model and return it with the training scores."""
    model = fit_pls(X, y, n_components=n_components, scale=scale)
    return model, transform(model, X)
