"""One-vs-rest ridge classifier with leave-one-out alpha selection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SpecError, ValidationError

ALPHAS_NARROW = tuple(np.logspace(-3, 3, 100))
ALPHAS_WIDE = tuple(np.logspace(-1, 10, 100))
# standard deviations below this (relative to the column scale) mark a constant column
_CONSTANT_STD = 1e-12


@dataclass(frozen=True)
class RidgeCVSpec:
    alphas: tuple = ALPHAS_NARROW
    fit_intercept: bool = True
    class_weight: str = "balanced"

    def __post_init__(self):
        alphas = tuple(float(a) for a in np.atleast_1d(self.alphas))
        if not alphas or any(not a > 0 for a in alphas):
            raise SpecError("alphas must be a non-empty list of positive numbers")
        if self.class_weight not in ("none", "balanced"):
            raise SpecError(f"class_weight must be 'none' or 'balanced', got {self.class_weight!r}")
        object.__setattr__(self, "alphas", alphas)


@dataclass
class RidgeParams:
    coef: np.ndarray  # (n_features, n_classes) in raw feature units
    intercept: np.ndarray  # (n_classes,)
    alpha: float
    mean: np.ndarray
    scale: np.ndarray  # 0 marks a column that carries no weight
    loo_errors: np.ndarray = field(default_factory=lambda: np.zeros(0))
    alphas: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef + self.intercept


def balanced_weights(y_idx: np.ndarray, n_classes: int) -> np.ndarray:
    """Per-sample weights N / (K * N_c) for the sample's class c."""
    counts = np.bincount(y_idx, minlength=n_classes).astype(float)
    present = counts > 0
    k = present.sum()
    per_class = np.zeros(n_classes)
    per_class[present] = len(y_idx) / (k * counts[present])
    return per_class[y_idx]


def standardize_stats(X):
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    ref = np.maximum(np.abs(mean), 1.0)
    scale = np.where(std > _CONSTANT_STD * ref, std, 0.0)
    return mean, scale


def _standardize(X, mean, scale):
    safe = np.where(scale > 0, scale, 1.0)
    Z = (X - mean) / safe
    Z[:, scale == 0] = 0.0
    return Z


class _LooSolver:
    """Spectral factorization shared by every alpha.

    With ``Z = sqrt(W) Xc`` the weighted smoother is ``R diag(1/(s + a)) R^T``,
    where ``R, s`` come from the Gram matrix ``Z Z^T`` when there are fewer
    rows than columns and from ``Z^T Z`` otherwise.
    """

    def __init__(self, Xs, Y, w, fit_intercept=True):
        n, p = Xs.shape
        self.w = w
        self.sw = np.sqrt(w)
        wsum = w.sum()
        if fit_intercept:
            self.x_bar = w @ Xs / wsum
            self.y_bar = w @ Y / wsum
            self.h0 = w / wsum
        else:
            self.x_bar = np.zeros(p)
            self.y_bar = np.zeros(Y.shape[1])
            self.h0 = np.zeros(n)
        Z = self.sw[:, None] * (Xs - self.x_bar)
        self.Z = Z
        self.Y = Y
        self.Yw = self.sw[:, None] * (Y - self.y_bar)
        if n <= p:
            s, U = np.linalg.eigh(Z @ Z.T)
            s = np.clip(s, 0.0, None)
            self.gram = True
            self.U = U
            self.R = U * np.sqrt(s)
        else:
            s, V = np.linalg.eigh(Z.T @ Z)
            s = np.clip(s, 0.0, None)
            self.gram = False
            self.V = V
            self.R = Z @ V
        self.s = s
        self.R2 = self.R * self.R
        self.RtYw = self.R.T @ self.Yw

    def loo_residuals(self, alpha):
        d = 1.0 / (self.s + alpha)
        h = self.h0 + self.R2 @ d
        fitted_w = self.R @ (d[:, None] * self.RtYw)
        fitted = self.y_bar + fitted_w / self.sw[:, None]
        return (self.Y - fitted) / (1.0 - h)[:, None]

    def coef(self, alpha):
        """Coefficients in standardized units."""
        d = 1.0 / (self.s + alpha)
        if self.gram:
            return self.Z.T @ (self.U @ (d[:, None] * (self.U.T @ self.Yw)))
        return self.V @ (d[:, None] * (self.V.T @ (self.Z.T @ self.Yw)))


def encode_targets(y_idx, n_classes):
    Y = -np.ones((len(y_idx), n_classes))
    Y[np.arange(len(y_idx)), y_idx] = 1.0
    return Y


def ridge_loo_residuals(X, y_idx, n_classes, alphas, weights=None, fit_intercept=True):
    """LOO residuals for every alpha, shape (n_alphas, n_samples, n_classes).

    Standardization uses statistics of the full ``X`` and is held fixed.
    """
    X = np.asarray(X, dtype=float)
    mean, scale = standardize_stats(X)
    Xs = _standardize(X, mean, scale)
    w = np.ones(len(X)) if weights is None else np.asarray(weights, dtype=float)
    solver = _LooSolver(Xs, encode_targets(np.asarray(y_idx), n_classes), w, fit_intercept)
    return np.stack([solver.loo_residuals(a) for a in alphas])


def ridge_fit_arrays(X, y_idx, n_classes, spec: RidgeCVSpec = RidgeCVSpec()) -> RidgeParams:
    X = np.asarray(X, dtype=float)
    y_idx = np.asarray(y_idx, dtype=np.int64)
    if not np.all(np.isfinite(X)):
        raise ValidationError("feature matrix contains NaN or infinite values")
    if len(np.unique(y_idx)) < 2:
        raise ValidationError("ridge needs at least two classes in the training data")
    mean, scale = standardize_stats(X)
    Xs = _standardize(X, mean, scale)
    if spec.class_weight == "balanced":
        w = balanced_weights(y_idx, n_classes)
    else:
        w = np.ones(len(y_idx))
    Y = encode_targets(y_idx, n_classes)
    solver = _LooSolver(Xs, Y, w, spec.fit_intercept)
    alphas = np.array(sorted(spec.alphas))
    errors = np.empty(len(alphas))
    wsum = w.sum()
    for i, a in enumerate(alphas):
        r = solver.loo_residuals(a)
        errors[i] = float(w @ (r * r).mean(axis=1)) / wsum
    best = 0
    for i in range(1, len(alphas)):
        # strict improvement keeps the smallest alpha on ties
        if errors[i] < errors[best]:
            best = i
    alpha = float(alphas[best])
    beta = solver.coef(alpha)
    intercept = solver.y_bar - solver.x_bar @ beta
    safe = np.where(scale > 0, scale, 1.0)
    coef_raw = np.where((scale > 0)[:, None], beta / safe[:, None], 0.0)
    intercept_raw = intercept - mean @ coef_raw
    return RidgeParams(coef_raw, intercept_raw, alpha, mean, scale, errors, alphas)


def ridge_predict_idx(params: RidgeParams, X) -> np.ndarray:
    scores = params.decision_function(X)
    return np.argmax(scores, axis=1) if len(scores) else np.zeros(0, dtype=np.int64)
