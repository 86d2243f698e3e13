"""Z-scoring, closed-form ridge classification and ridge-driven feature selection."""

from dataclasses import dataclass

import numpy as np

from .errors import IllPosedError, ShapeError

# relative precision used when ranking |weights|, so exact duplicates tie
_RANK_DECIMALS = 12


@dataclass(frozen=True)
class FeatureScaler:
    means: np.ndarray
    stds: np.ndarray


def fit_scaler(X_train):
    X_train = np.asarray(X_train, dtype=np.float64)
    means = X_train.mean(axis=0)
    stds = X_train.std(axis=0)
    stds = np.where(stds > 0, stds, 1.0)
    return FeatureScaler(means, stds)


def apply_scaler(scaler, X):
    return (np.asarray(X, dtype=np.float64) - scaler.means) / scaler.stds


@dataclass(frozen=True)
class RidgeModel:
    weights: np.ndarray
    bias: float
    alpha: float


def _solve(A, b, alpha):
    if alpha == 0:
        if np.linalg.matrix_rank(A) < A.shape[0]:
            raise IllPosedError("ill-posed, increase alpha")
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise IllPosedError("ill-posed, increase alpha") from exc


def ridge_fit(X, y, alpha=1.0, fit_intercept=True):
    """Minimize ``||X w + b - y||^2 + alpha ||w||^2`` with ``b`` unpenalized.

    ``y`` holds +/-1 targets. Uses the primal normal equations when there are
    at least as many rows as columns and the dual (kernel) form otherwise.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] < 1:
        raise ShapeError("X must be (n, C) with n matching y")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValueError("ridge targets must be -1 or +1")
    if fit_intercept:
        x_mean = X.mean(axis=0)
        y_mean = y.mean()
    else:
        x_mean = np.zeros(X.shape[1])
        y_mean = 0.0
    Xc = X - x_mean
    yc = y - y_mean
    n, c = Xc.shape
    if c <= n:
        w = _solve(Xc.T @ Xc + alpha * np.eye(c), Xc.T @ yc, alpha)
    else:
        w = Xc.T @ _solve(Xc @ Xc.T + alpha * np.eye(n), yc, alpha)
    b = float(y_mean - x_mean @ w)
    return RidgeModel(w, b, float(alpha))


def ridge_predict(model, X):
    """Return ``(scores, classes)``; class 1 where the score is non-negative."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != model.weights.shape[0]:
        raise ShapeError(f"expected {model.weights.shape[0]} columns, got {X.shape[-1]}")
    scores = X @ model.weights + model.bias
    return scores, (scores >= 0).astype(np.int64)


def to_pm1(labels):
    return np.where(np.asarray(labels) > 0, 1.0, -1.0)


@dataclass(frozen=True)
class FeatureSelection:
    kept_indices: np.ndarray

    def apply(self, X):
        return np.asarray(X)[:, self.kept_indices]


def _rank(weights, order_of):
    mag = np.abs(weights)
    top = mag.max()
    if top > 0:
        mag = np.round(mag / top, _RANK_DECIMALS)
    # descending magnitude, then ascending column index
    return np.lexsort((order_of, -mag))


def select_features(X_train, y_train, alpha=1.0, C_out=None, method="oneshot", step=0.1):
    """Keep the ``C_out`` columns with the largest ridge weights.

    Ridge is fitted on z-scored training data. ``method="rfe"`` refits after
    discarding the weakest ``step`` fraction of the remaining columns until
    ``C_out`` are left; the default ranks once.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    c = X_train.shape[1]
    if C_out is None:
        C_out = c
    if C_out > c:
        raise ValueError("cannot select more features than exist")
    if C_out < 1:
        raise ValueError("C_out must be positive")
    if C_out == c:
        return FeatureSelection(np.arange(c))
    Z = apply_scaler(fit_scaler(X_train), X_train)
    y = to_pm1(y_train)
    if method == "oneshot":
        w = ridge_fit(Z, y, alpha).weights
        return FeatureSelection(np.sort(_rank(w, np.arange(c))[:C_out]))
    if method != "rfe":
        raise ValueError(f"unknown selection method {method!r}")
    remaining = np.arange(c)
    while remaining.size > C_out:
        w = ridge_fit(Z[:, remaining], y, alpha).weights
        n_drop = min(max(1, int(step * remaining.size)), remaining.size - C_out)
        order = _rank(w, remaining)
        remaining = np.sort(remaining[order[: remaining.size - n_drop]])
    return FeatureSelection(remaining)
