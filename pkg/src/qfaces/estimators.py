"""Scikit-learn compatible wrappers around the functional core.

These adapters let the quotient feature extraction, eigenface projection
and MLP classification stages compose with ``sklearn.pipeline.Pipeline``,
grid search and ``clone``. The functional modules remain the source of
truth; the estimators only marshal matrices in and out.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .eigenspace import EigenModel, fit_pca_matrix
from .image import normalize_minmax
from .mlp import TrainConfig, _forward_all, init_mlp, train_mlp
from .quotient import FUSION_VARIANTS, QuotientConfig, quotient_image


class QuotientFeatureExtractor(BaseEstimator, TransformerMixin):
    """Turn paired visual/thermal images into quotient feature vectors.

    Parameters
    ----------
    method : int, 1 or 2
        Per-subband (1) or approximation-based (2) quotient construction.
    epsilon_rel : float
        Relative denominator floor for the regularized division.
    fusion : str, one of "none", "select", "sum"
        Optional fusion of the thermal denominator with the visual operand.
    normalize : bool
        Min-max normalize each feature image before flattening.

    The transformer is stateless; ``fit`` only validates parameters. ``X``
    is an (n, 2, h, w) array or a sequence of (visual, thermal) pairs, and
    ``transform`` returns an (n, d) float64 matrix.
    """

    def __init__(self, method: int = 2, epsilon_rel: float = 1e-3,
                 fusion: str = "none", normalize: bool = True):
        self.method = method
        self.epsilon_rel = epsilon_rel
        self.fusion = fusion
        self.normalize = normalize

    def _config(self) -> QuotientConfig:
        if self.fusion not in FUSION_VARIANTS:
            raise ValueError(f"fusion must be one of {FUSION_VARIANTS}, got {self.fusion!r}")
        return QuotientConfig(method=self.method, epsilon_rel=self.epsilon_rel)

    def fit(self, X, y=None):
        self._config()
        return self

    def transform(self, X) -> np.ndarray:
        cfg = self._config()
        rows = []
        for pair in X:
            visual, thermal = pair[0], pair[1]
            q = quotient_image(visual, thermal, cfg, fusion=self.fusion)
            if self.normalize:
                q = normalize_minmax(q)
            rows.append(q.ravel())
        if not rows:
            raise ValueError("X contains no image pairs")
        return np.stack(rows)


class EigenfaceProjector(BaseEstimator, TransformerMixin):
    """PCA projection onto the leading eigenfaces of the training matrix.

    Attributes after fit: ``model_`` (the underlying EigenModel),
    ``mean_`` (d,), ``components_`` (k, d) and ``explained_variance_`` (k,).
    """

    def __init__(self, n_components: int = 40):
        self.n_components = n_components

    def fit(self, X, y=None):
        model = fit_pca_matrix(np.asarray(X, dtype=np.float64), self.n_components)
        self.model_: EigenModel = model
        self.mean_ = model.mean
        self.components_ = model.basis.T
        self.explained_variance_ = model.eigenvalues
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("EigenfaceProjector is not fitted")

    def transform(self, X) -> np.ndarray:
        self._check_fitted()
        X = np.asarray(X, dtype=np.float64)
        return (X - self.mean_) @ self.components_.T

    def inverse_transform(self, F) -> np.ndarray:
        self._check_fitted()
        F = np.asarray(F, dtype=np.float64)
        return self.mean_ + F @ self.components_


class MomentumMlpClassifier(BaseEstimator, ClassifierMixin):
    """Sigmoid MLP trained by online backpropagation with momentum.

    Attributes after fit: ``classes_``, ``model_`` (the underlying
    MlpModel), ``n_epochs_`` and ``final_mse_``.
    """

    def __init__(self, hidden_sizes=(100,), learning_rate: float = 0.1,
                 momentum: float = 0.9, max_epochs: int = 2000,
                 target_mse: float = 1e-3, seed: int = 0, shuffle: bool = False):
        self.hidden_sizes = hidden_sizes
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.max_epochs = max_epochs
        self.target_mse = target_mse
        self.seed = seed
        self.shuffle = shuffle

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            max_epochs=self.max_epochs,
            target_mse=self.target_mse,
            seed=self.seed,
            shuffle=self.shuffle,
        )

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-D (n, d), got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
        self.classes_, indices = np.unique(y, return_inverse=True)
        if self.classes_.shape[0] < 2:
            raise ValueError("need at least 2 classes")
        n_classes = self.classes_.shape[0]
        targets = np.eye(n_classes)[indices]
        sizes = [X.shape[1], *self.hidden_sizes, n_classes]
        model = init_mlp(sizes, seed=self.seed)
        samples = list(zip(X, targets))
        self.n_epochs_, self.final_mse_ = train_mlp(model, samples, self._train_config())
        self.model_ = model
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("MomentumMlpClassifier is not fitted")

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        X = np.asarray(X, dtype=np.float64)
        return np.stack([_forward_all(self.model_, x)[-1] for x in X])

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]
