"""Binary classifiers trained on PLS scores.

Three models share one contract: train on a score matrix and labels, then
``score(x)`` returns a real value where larger favors COPD and
``predict(model, x, threshold)`` binarizes it (ties go to the positive
class). Labels may be given as {0,1} or {-1,+1}; they are mapped to
{-1,+1} internally.

- SVM: soft-margin dual with an RBF kernel, solved by sequential minimal
  optimization with first-order maximal-violating-pair selection.
- QDA: Gaussian class-conditional discriminant using a pseudo-inverse and
  pseudo-determinant of each class covariance, so rank-deficient classes
  still train.
- AdaBoost: discrete boosting over depth-1 decision stumps.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Type

import numpy as np

from cpml.errors import ConvergenceError, DimensionError, ModelFitError
from cpml.utils import as_float_list, as_matrix, read_json, write_json

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

SVM = "svm"
QDA = "qda"
ADABOOST = "adaboost"
MODEL_TYPES = (SVM, ADABOOST, QDA)

DEFAULT_C = 1.0
DEFAULT_TOL = 1e-3
DEFAULT_N_ROUNDS = 50
DEFAULT_EIGEN_CUTOFF = 1e-10
MAX_ITER_CAP = 1_000_000
ERROR_CLAMP = 1e-10
_TAU = 1e-12


def to_signed_labels(y: Any) -> np.ndarray:
    """Map {0,1} or {-1,+1} labels to {-1,+1}.

    Args:
        y: Label vector

    Returns:
        Float array of -1.0 and +1.0
    """
    labels = np.asarray(y).ravel()
    values = set(np.unique(labels).tolist())
    if values <= {0, 1}:
        return np.where(labels == 1, 1.0, -1.0)
    if values <= {-1, 1}:
        return labels.astype(float)
    raise ValueError(f"labels must be {{0,1}} or {{-1,+1}}, got {sorted(values)}")


def _training_data(X: Any, y: Any) -> Tuple[np.ndarray, np.ndarray]:
    X = as_matrix(X)
    signed = to_signed_labels(y)
    if X.shape[0] != signed.shape[0]:
        raise DimensionError(f"X has {X.shape[0]} rows but y has {signed.shape[0]} labels")
    if not (np.any(signed > 0) and np.any(signed < 0)):
        raise ModelFitError("training data must contain both classes")
    return X, signed


def _row(x: Any, n_features: int) -> np.ndarray:
    row = np.asarray(x, dtype=float).ravel()
    if row.shape[0] != n_features:
        raise DimensionError(f"row has {row.shape[0]} features, model expects {n_features}")
    return row


class Classifier(ABC):
    """Common contract of the trained models."""

    model_type: str = ""

    @property
    @abstractmethod
    def n_features(self) -> int:
        """Dimensionality the model was trained on."""

    @abstractmethod
    def score(self, x: Any) -> float:
        """Real-valued score of one row; positive favors COPD."""

    def decision_function(self, X: Any) -> np.ndarray:
        """Scores of every row of a matrix."""
        X = as_matrix(X)
        if X.shape[1] != self.n_features:
            raise DimensionError(f"X has {X.shape[1]} features, model expects {self.n_features}")
        return np.asarray([self.score(row) for row in X], dtype=float)

    def predict(self, x: Any, threshold: float = 0.0) -> int:
        """1 when the score reaches the threshold, else 0."""
        return predict(self, x, threshold)

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready representation including the model_type field."""

    @classmethod
    @abstractmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Classifier":
        """Rebuild a model from ``to_dict`` output."""


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """K(u, v) = exp(-gamma |u - v|^2) for every row pair of A and B."""
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


def default_gamma(X: Any) -> float:
    """RBF width 1 / (k * median column variance).

    Falls back to 1/k when the median variance is zero.
    """
    X = as_matrix(X)
    variances = X.var(axis=0, ddof=1) if X.shape[0] > 1 else np.zeros(X.shape[1])
    median = float(np.median(variances))
    k = X.shape[1]
    return 1.0 / (k * median) if median > 0 else 1.0 / k


class _KernelRows:
    """Lazily computed, memoized rows of the training Gram matrix."""

    def __init__(self, X: np.ndarray, gamma: float):
        self._X = X
        self._gamma = gamma
        self._rows: Dict[int, np.ndarray] = {}

    def __getitem__(self, index: int) -> np.ndarray:
        row = self._rows.get(index)
        if row is None:
            row = rbf_kernel(self._X[index:index + 1], self._X, self._gamma)[0]
            self._rows[index] = row
        return row


@dataclass
class SvmModel(Classifier):
    """RBF support vector machine; ``alphas`` are signed by label."""

    support_vectors: np.ndarray
    alphas: np.ndarray
    bias: float
    gamma: float
    C: float
    support_indices: List[int] = field(default_factory=list)
    n_iter: int = 0
    kkt_gap: float = 0.0

    model_type = SVM

    @property
    def n_features(self) -> int:
        return int(self.support_vectors.shape[1])

    def score(self, x: Any) -> float:
        return svm_score(self, x)

    def decision_function(self, X: Any) -> np.ndarray:
        X = as_matrix(X)
        if X.shape[1] != self.n_features:
            raise DimensionError(f"X has {X.shape[1]} features, model expects {self.n_features}")
        if self.support_vectors.shape[0] == 0:
            return np.full(X.shape[0], self.bias)
        return rbf_kernel(X, self.support_vectors, self.gamma) @ self.alphas + self.bias

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model_type": SVM,
            "schema_version": SCHEMA_VERSION,
            "support_vectors": [as_float_list(row) for row in self.support_vectors],
            "alphas": as_float_list(self.alphas),
            "bias": float(self.bias),
            "gamma": float(self.gamma),
            "C": float(self.C),
            "n_features": self.n_features,
            "support_indices": [int(index) for index in self.support_indices],
            "n_iter": int(self.n_iter),
            "kkt_gap": float(self.kkt_gap),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SvmModel":
        return cls(
            support_vectors=np.asarray(data["support_vectors"], dtype=float).reshape(-1, int(data["n_features"])),
            alphas=np.asarray(data["alphas"], dtype=float),
            bias=float(data["bias"]),
            gamma=float(data["gamma"]),
            C=float(data["C"]),
            support_indices=[int(index) for index in data.get("support_indices", [])],
            n_iter=int(data.get("n_iter", 0)),
            kkt_gap=float(data.get("kkt_gap", 0.0)),
        )


def _violating_pair(y: np.ndarray, alpha: np.ndarray, grad: np.ndarray, C: float) -> Tuple[int, int, float]:
    """First-order maximal violating pair (i, j) and its gap m - M."""
    at_upper = alpha >= C
    at_lower = alpha <= 0
    in_up = ((y > 0) & ~at_upper) | ((y < 0) & ~at_lower)
    in_low = ((y > 0) & ~at_lower) | ((y < 0) & ~at_upper)
    violation = -y * grad
    up_values = np.where(in_up, violation, -np.inf)
    low_values = np.where(in_low, violation, np.inf)
    i = int(np.argmax(up_values))
    j = int(np.argmin(low_values))
    return i, j, float(up_values[i] - low_values[j])


def _svm_bias(y: np.ndarray, alpha: np.ndarray, grad: np.ndarray, C: float) -> float:
    """Bias b of f(x) = sum(alpha_i y_i K(x_i, x)) + b from the final gradient."""
    y_grad = y * grad
    upper = alpha >= C
    lower = alpha <= 0
    free = ~upper & ~lower
    if np.any(free):
        return -float(np.mean(y_grad[free]))
    ub_mask = (upper & (y < 0)) | (lower & (y > 0))
    lb_mask = (upper & (y > 0)) | (lower & (y < 0))
    ub = float(np.min(y_grad[ub_mask])) if np.any(ub_mask) else math.inf
    lb = float(np.max(y_grad[lb_mask])) if np.any(lb_mask) else -math.inf
    return -(ub + lb) / 2.0


def svm_dual_objective(X: Any, y: Any, alphas: Any, gamma: float) -> float:
    """Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.

    Args:
        X: Training rows
        y: Training labels
        alphas: Unsigned dual variables, one per training row
        gamma: RBF width

    Returns:
        Objective value (to be maximized)
    """
    X = as_matrix(X)
    signed = to_signed_labels(y)
    coefficients = np.asarray(alphas, dtype=float) * signed
    return float(np.sum(alphas) - 0.5 * coefficients @ rbf_kernel(X, X, gamma) @ coefficients)


def train_svm(X: Any,
              y: Any,
              C: float = DEFAULT_C,
              gamma: Optional[float] = None,
              tol: float = DEFAULT_TOL,
              max_iter: Optional[int] = None) -> SvmModel:
    """Train a soft-margin RBF SVM with sequential minimal optimization.

    Each iteration updates the maximal violating pair analytically. Training
    stops when the gap between the largest and smallest -y_t grad_t over the
    up/low index sets drops below ``tol``, which bounds every sample's KKT
    violation by ``tol``.

    Args:
        X: Training rows, shape (n, k)
        y: Labels in {0,1} or {-1,+1}
        C: Box constraint
        gamma: RBF width (``default_gamma(X)`` when None)
        tol: KKT tolerance
        max_iter: Pair-update budget (max(10000, 100 n), capped at 1e6, when None)

    Returns:
        The trained model holding only rows with non-zero alpha
    """
    X, signed = _training_data(X, y)
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")
    gamma = default_gamma(X) if gamma is None else float(gamma)
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    n = X.shape[0]
    if max_iter is None:
        max_iter = min(MAX_ITER_CAP, max(10_000, 100 * n))

    kernel = _KernelRows(X, gamma)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    gap = math.inf
    n_iter = 0

    while True:
        i, j, gap = _violating_pair(signed, alpha, grad, C)
        if gap < tol:
            break
        if n_iter >= max_iter:
            raise ConvergenceError(
                "SMO did not reach the KKT tolerance",
                {"iterations": n_iter, "kkt_gap": gap, "tol": tol, "n_samples": n},
            )
        n_iter += 1

        k_i = kernel[i]
        k_j = kernel[j]
        q_ij = signed[i] * signed[j] * k_i[j]
        old_i, old_j = alpha[i], alpha[j]

        if signed[i] != signed[j]:
            quad = k_i[i] + k_j[j] + 2.0 * q_ij
            quad = quad if quad > 0 else _TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            elif alpha[j] > C:
                alpha[j] = C
                alpha[i] = C + diff
        else:
            quad = k_i[i] + k_j[j] - 2.0 * q_ij
            quad = quad if quad > 0 else _TAU
            delta = (grad[i] - grad[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            elif alpha[j] < 0:
                alpha[j] = 0.0
                alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = total

        delta_i = alpha[i] - old_i
        delta_j = alpha[j] - old_j
        grad += signed * (signed[i] * k_i * delta_i + signed[j] * k_j * delta_j)

    bias = _svm_bias(signed, alpha, grad, C)
    support = np.flatnonzero(alpha > 0)
    logger.debug("SMO converged after %d iterations (gap %.3g, %d support vectors)", n_iter, gap, support.size)
    return SvmModel(
        support_vectors=X[support].copy(),
        alphas=alpha[support] * signed[support],
        bias=bias,
        gamma=gamma,
        C=C,
        support_indices=[int(index) for index in support],
        n_iter=n_iter,
        kkt_gap=gap,
    )


def svm_score(model: SvmModel, x: Any) -> float:
    """sum_i alpha_i K(sv_i, x) + b with signed alphas."""
    row = _row(x, model.n_features)
    if model.support_vectors.shape[0] == 0:
        return float(model.bias)
    return float(rbf_kernel(row[None, :], model.support_vectors, model.gamma)[0] @ model.alphas + model.bias)


def svm_kkt_violations(model: SvmModel, X: Any, y: Any) -> np.ndarray:
    """Per-sample KKT violation of a trained SVM on its training data.

    For alpha = 0 the condition is y f(x) >= 1, for alpha = C it is
    y f(x) <= 1, and for 0 < alpha < C it is y f(x) = 1.

    Returns:
        Non-negative violation amount per training row
    """
    X, signed = _training_data(X, y)
    alpha = np.zeros(X.shape[0])
    alpha[model.support_indices] = np.abs(model.alphas)
    margins = signed * model.decision_function(X) - 1.0
    violations = np.where(alpha <= 0, np.maximum(-margins, 0.0), 0.0)
    violations = np.where(alpha >= model.C, np.maximum(margins, 0.0), violations)
    free = (alpha > 0) & (alpha < model.C)
    return np.where(free, np.abs(margins), violations)


@dataclass
class QdaModel(Classifier):
    """Pseudo-quadratic discriminant; index 0 is the negative class, 1 the positive."""

    means: np.ndarray
    inverse_covariances: np.ndarray
    covariances: np.ndarray
    log_determinants: np.ndarray
    log_priors: np.ndarray
    eigen_cutoff: float = DEFAULT_EIGEN_CUTOFF

    model_type = QDA

    @property
    def n_features(self) -> int:
        return int(self.means.shape[1])

    def class_log_likelihood(self, x: Any, class_index: int) -> float:
        """-1/2 Mahalanobis term - 1/2 log pseudo-determinant + log prior."""
        row = _row(x, self.n_features)
        centered = row - self.means[class_index]
        quadratic = float(centered @ self.inverse_covariances[class_index] @ centered)
        return -0.5 * quadratic - 0.5 * float(self.log_determinants[class_index]) + float(self.log_priors[class_index])

    def score(self, x: Any) -> float:
        return qda_score(self, x)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model_type": QDA,
            "schema_version": SCHEMA_VERSION,
            "means": self.means.tolist(),
            "covariances": self.covariances.tolist(),
            "inverse_covariances": self.inverse_covariances.tolist(),
            "log_determinants": as_float_list(self.log_determinants),
            "log_priors": as_float_list(self.log_priors),
            "eigen_cutoff": float(self.eigen_cutoff),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "QdaModel":
        return cls(
            means=np.asarray(data["means"], dtype=float),
            inverse_covariances=np.asarray(data["inverse_covariances"], dtype=float),
            covariances=np.asarray(data["covariances"], dtype=float),
            log_determinants=np.asarray(data["log_determinants"], dtype=float),
            log_priors=np.asarray(data["log_priors"], dtype=float),
            eigen_cutoff=float(data.get("eigen_cutoff", DEFAULT_EIGEN_CUTOFF)),
        )


def pseudo_inverse(covariance: np.ndarray, cutoff: float = DEFAULT_EIGEN_CUTOFF) -> Tuple[np.ndarray, float]:
    """Moore-Penrose inverse and log pseudo-determinant of a symmetric PSD matrix.

    Eigenvalues at or below ``cutoff * lambda_max`` are discarded.

    Returns:
        Tuple of (pseudo-inverse, sum of log retained eigenvalues)
    """
    symmetric = (covariance + covariance.T) / 2.0
    eigenvalues, eigenvectors = np.linalg.eigh(symmetric)
    largest = float(eigenvalues.max()) if eigenvalues.size else 0.0
    if largest <= 0:
        return np.zeros_like(symmetric), 0.0
    kept = eigenvalues > cutoff * largest
    basis = eigenvectors[:, kept]
    inverse = (basis / eigenvalues[kept]) @ basis.T
    return inverse, float(np.sum(np.log(eigenvalues[kept])))


def train_qda(X: Any, y: Any, eigen_cutoff: float = DEFAULT_EIGEN_CUTOFF) -> QdaModel:
    """Fit class means, sample covariances and priors.

    Args:
        X: Training rows, shape (n, k)
        y: Labels in {0,1} or {-1,+1}
        eigen_cutoff: Relative eigenvalue cutoff of the pseudo-inverse

    Returns:
        The trained model
    """
    X, signed = _training_data(X, y)
    means, covariances, inverses, log_dets, log_priors = [], [], [], [], []
    for sign in (-1.0, 1.0):
        rows = X[signed == sign]
        if rows.shape[0] < 2:
            raise ModelFitError(f"class {int(sign):+d} has {rows.shape[0]} sample(s); QDA needs at least 2")
        covariance = np.atleast_2d(np.cov(rows, rowvar=False, ddof=1))
        inverse, log_det = pseudo_inverse(covariance, eigen_cutoff)
        means.append(rows.mean(axis=0))
        covariances.append(covariance)
        inverses.append(inverse)
        log_dets.append(log_det)
        log_priors.append(math.log(rows.shape[0] / X.shape[0]))
    return QdaModel(
        means=np.asarray(means),
        inverse_covariances=np.asarray(inverses),
        covariances=np.asarray(covariances),
        log_determinants=np.asarray(log_dets),
        log_priors=np.asarray(log_priors),
        eigen_cutoff=eigen_cutoff,
    )


def qda_score(model: QdaModel, x: Any) -> float:
    """Log-likelihood ratio of the positive over the negative class."""
    return model.class_log_likelihood(x, 1) - model.class_log_likelihood(x, 0)


@dataclass(frozen=True)
class Stump:
    """Depth-1 tree: ``polarity`` when x[feature] > threshold, else ``-polarity``."""

    feature: int
    threshold: float
    polarity: int

    def predict_all(self, X: np.ndarray) -> np.ndarray:
        return np.where(X[:, self.feature] > self.threshold, float(self.polarity), float(-self.polarity))

    def predict_one(self, row: np.ndarray) -> int:
        return self.polarity if row[self.feature] > self.threshold else -self.polarity


@dataclass
class AdaBoostModel(Classifier):
    """Weighted vote of decision stumps."""

    rounds: List[Tuple[Stump, float]]
    n_rounds: int
    n_features_in: int
    round_errors: List[float] = field(default_factory=list)

    model_type = ADABOOST

    @property
    def n_features(self) -> int:
        return self.n_features_in

    def score(self, x: Any) -> float:
        return ada_score(self, x)

    def training_error_bound(self) -> float:
        """prod_t 2 sqrt(eps_t (1 - eps_t)) over the recorded rounds."""
        return float(np.prod([2.0 * math.sqrt(eps * (1.0 - eps)) for eps in self.round_errors]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model_type": ADABOOST,
            "schema_version": SCHEMA_VERSION,
            "n_rounds": self.n_rounds,
            "n_features": self.n_features_in,
            "rounds": [
                {"feature": stump.feature, "threshold": float(stump.threshold),
                 "polarity": stump.polarity, "alpha": float(alpha)}
                for stump, alpha in self.rounds
            ],
            "round_errors": as_float_list(self.round_errors),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AdaBoostModel":
        return cls(
            rounds=[
                (Stump(int(entry["feature"]), float(entry["threshold"]), int(entry["polarity"])), float(entry["alpha"]))
                for entry in data["rounds"]
            ],
            n_rounds=int(data["n_rounds"]),
            n_features_in=int(data["n_features"]),
            round_errors=[float(value) for value in data.get("round_errors", [])],
        )


def best_stump(X: np.ndarray, signed: np.ndarray, weights: np.ndarray) -> Tuple[Optional[Stump], float]:
    """Stump with the lowest weighted error.

    Thresholds are midpoints between sorted unique feature values. Ties go to
    the lowest feature index, then the lowest threshold, then polarity +1.

    Returns:
        Tuple of (stump or None when no feature has two distinct values, error)
    """
    best: Optional[Stump] = None
    best_error = math.inf
    total_negative = float(weights[signed < 0].sum())
    total = float(weights.sum())

    for feature in range(X.shape[1]):
        values = X[:, feature]
        unique, inverse = np.unique(values, return_inverse=True)
        if unique.size < 2:
            continue
        positive_mass = np.bincount(inverse, weights=np.where(signed > 0, weights, 0.0), minlength=unique.size)
        negative_mass = np.bincount(inverse, weights=np.where(signed < 0, weights, 0.0), minlength=unique.size)
        # cut k sits between unique[k] and unique[k + 1]
        positives_below = np.cumsum(positive_mass)[:-1]
        negatives_below = np.cumsum(negative_mass)[:-1]
        error_plus = positives_below + (total_negative - negatives_below)
        error_minus = total - error_plus
        errors = np.minimum(error_plus, error_minus)
        cut = int(np.argmin(errors))
        if errors[cut] < best_error:
            best_error = float(errors[cut])
            polarity = 1 if error_plus[cut] <= error_minus[cut] else -1
            best = Stump(feature, float((unique[cut] + unique[cut + 1]) / 2.0), polarity)
    return best, best_error


def train_adaboost(X: Any, y: Any, n_rounds: int = DEFAULT_N_ROUNDS) -> AdaBoostModel:
    """Discrete AdaBoost over decision stumps.

    Each round picks the stump with the lowest weighted error eps, weights it
    by alpha = 1/2 ln((1 - eps) / eps) with eps clamped to [1e-10, 1 - 1e-10],
    and reweights samples by exp(-alpha y h(x)) before renormalizing.
    Boosting stops early when no stump beats eps = 0.5 or a stump is
    perfect.

    Args:
        X: Training rows, shape (n, k)
        y: Labels in {0,1} or {-1,+1}
        n_rounds: Maximum number of rounds T

    Returns:
        The trained model
    """
    X, signed = _training_data(X, y)
    if n_rounds < 1:
        raise ValueError(f"n_rounds must be at least 1, got {n_rounds}")
    weights = np.full(X.shape[0], 1.0 / X.shape[0])
    rounds: List[Tuple[Stump, float]] = []
    round_errors: List[float] = []

    for round_index in range(n_rounds):
        stump, _ = best_stump(X, signed, weights)
        if stump is None:
            raise ModelFitError("unlearnable under stumps: no feature has two distinct values")
        predictions = stump.predict_all(X)
        error = float(weights[predictions != signed].sum())
        if error >= 0.5:
            if not rounds:
                raise ModelFitError("unlearnable under stumps: no stump has weighted error below 0.5")
            logger.debug("AdaBoost stopped after %d rounds: no stump beats chance", round_index)
            break

        clamped = min(max(error, ERROR_CLAMP), 1.0 - ERROR_CLAMP)
        alpha = 0.5 * math.log((1.0 - clamped) / clamped)
        rounds.append((stump, alpha))
        round_errors.append(clamped)
        if error == 0.0:
            logger.debug("AdaBoost stopped after %d rounds: perfect stump", round_index + 1)
            break

        weights = weights * np.exp(-alpha * signed * predictions)
        weights = weights / weights.sum()

    return AdaBoostModel(rounds=rounds, n_rounds=n_rounds, n_features_in=X.shape[1], round_errors=round_errors)


def ada_score(model: AdaBoostModel, x: Any) -> float:
    """sum_t alpha_t h_t(x)."""
    row = _row(x, model.n_features)
    return float(sum(alpha * stump.predict_one(row) for stump, alpha in model.rounds))


def predict(model: Classifier, x: Any, threshold: float = 0.0) -> int:
    """1 iff score(x) >= threshold."""
    return int(model.score(x) >= threshold)


_MODEL_CLASSES: Dict[str, Type[Classifier]] = {
    SVM: SvmModel,
    QDA: QdaModel,
    ADABOOST: AdaBoostModel,
}


def model_from_dict(data: Dict[str, Any]) -> Classifier:
    """Rebuild any classifier from its ``to_dict`` output."""
    model_type = data.get("model_type")
    if model_type not in _MODEL_CLASSES:
        raise ValueError(f"unknown model_type {model_type!r}")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    return _MODEL_CLASSES[model_type].from_dict(data)


def save_model(model: Classifier, path: str, extra: Optional[Dict[str, Any]] = None) -> str:
    """Write a classifier as JSON, with optional provenance fields."""
    document = model.to_dict()
    document.update(extra or {})
    return write_json(document, path)


def load_model(path: str) -> Classifier:
    """Read a classifier written by ``save_model``."""
    return model_from_dict(read_json(path))


def train_classifier(model_type: str, X: Any, y: Any, **params: Any) -> Classifier:
    """Dispatch training by model type name."""
    if model_type == SVM:
        return train_svm(X, y, **params)
    if model_type == QDA:
        return train_qda(X, y, **params)
    if model_type == ADABOOST:
        return train_adaboost(X, y, **params)
    raise ValueError(f"unknown model_type {model_type!r}; expected one of {list(MODEL_TYPES)}")
