"""scikit-learn style wrappers over the functional core.

Inputs are arrays of shape (n_samples, 2) holding ``(mu, t)`` per row. The
estimators are stateless apart from their hyperparameters, so ``fit`` only
validates input and records ``n_features_in_``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .entropy import EntropyConfig, entropy_batch
from .preimages import DEFAULT_MAX_POINTS, DEFAULT_N_MAX
from .qmap import project
from .regions import REGION_CODES, classify_codes


def _check_params(X) -> np.ndarray:
    X = check_array(X, dtype=float, ensure_min_features=2)
    if X.shape[1] != 2:
        raise ValueError(f"expected two columns (mu, t), got {X.shape[1]}")
    return X


class _Stateless(BaseEstimator):
    def fit(self, X, y=None):
        X = _check_params(X)
        self.n_features_in_ = X.shape[1]
        return self

    def _validate(self, X) -> np.ndarray:
        check_is_fitted(self, "n_features_in_")
        return _check_params(X)


class EntropyEstimator(TransformerMixin, _Stateless):
    """``transform`` returns columns ``(entropy, error_bound, converged)``; ``predict`` the entropy alone."""

    def __init__(self, method="auto", tol=2e-3, n_max=DEFAULT_N_MAX, max_points=DEFAULT_MAX_POINTS, seq_len=64, bisect_steps=40):
        self.method = method
        self.tol = tol
        self.n_max = n_max
        self.max_points = max_points
        self.seq_len = seq_len
        self.bisect_steps = bisect_steps

    def _config(self) -> EntropyConfig:
        return EntropyConfig(
            method=self.method, tol=self.tol, n_max=self.n_max, max_points=self.max_points,
            seq_len=self.seq_len, bisect_steps=self.bisect_steps,
        )

    def transform(self, X) -> np.ndarray:
        X = self._validate(X)
        res = entropy_batch(X[:, 0], X[:, 1], self._config())
        return np.column_stack([res.value, res.error, (res.status == 0).astype(float)])

    def predict(self, X) -> np.ndarray:
        return self.transform(X)[:, 0]


class ModuliProjector(TransformerMixin, _Stateless):
    """Maps ``(mu, t)`` rows to ``(sigma1, sigma2)``."""

    def transform(self, X) -> np.ndarray:
        X = self._validate(X)
        s1, s2 = project(X[:, 0], X[:, 1])
        return np.column_stack([s1, s2])


class RegionClassifier(_Stateless):
    """``predict`` returns region tokens such as ``"unimodal"``."""

    def __init__(self, tol=1e-9):
        self.tol = tol

    def predict(self, X) -> np.ndarray:
        X = self._validate(X)
        codes = classify_codes(X[:, 0], X[:, 1], self.tol)
        return np.array([REGION_CODES[c].value for c in codes], dtype=object)
