"""Eigenface construction and projection for quotient feature images.

Training images are vectorized row-major and centered; the covariance is
normalized by n. When n <= d the eigenproblem is solved on the n x n Gram
matrix of the centered samples and eigenvectors are mapped back through
the data matrix (the snapshot method), otherwise the d x d covariance is
decomposed directly. Retained components are capped by the configured
maximum, the numerical rank (eigenvalues above 1e-10 of the largest) and
n - 1. Eigenvector signs are fixed by making each column's
largest-magnitude entry positive so serialized models are deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .validation import as_image, as_vector

logger = logging.getLogger(__name__)

RANK_CUTOFF = 1e-10


@dataclass(frozen=True)
class EigenModel:
    """Mean vector plus an orthonormal eigenvector basis, immutable after fit."""

    mean: np.ndarray         # (d,)
    basis: np.ndarray        # (d, k), columns ordered by descending eigenvalue
    eigenvalues: np.ndarray  # (k,), descending, nonnegative
    image_shape: tuple[int, int] | None = None

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]


def _fix_signs(basis: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive."""
    idx = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[idx, np.arange(basis.shape[1])])
    signs[signs == 0] = 1.0
    return basis * signs


def fit_pca_matrix(samples: np.ndarray, k_max: int,
                   image_shape: tuple[int, int] | None = None) -> EigenModel:
    """Fit an EigenModel from an (n, d) sample matrix."""
    X = np.asarray(samples, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"samples must be 2-D (n, d), got shape {X.shape}")
    n, d = X.shape
    if n < 2:
        raise ValueError(f"need at least 2 training samples, got {n}")
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")

    mean = X.mean(axis=0)
    Xc = X - mean

    if n <= d:
        gram = (Xc @ Xc.T) / n
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals)[::-1]
        eigvals = eigvals[order]
        eigvecs = eigvecs[:, order]
        basis = Xc.T @ eigvecs
        norms = np.linalg.norm(basis, axis=0)
        keep = norms > 0
        basis = np.divide(basis, norms, out=np.zeros_like(basis), where=keep)
    else:
        cov = (Xc.T @ Xc) / n
        eigvals, basis = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1]
        eigvals = eigvals[order]
        basis = basis[:, order]

    eigvals = np.clip(eigvals, 0.0, None)
    if eigvals[0] <= 0.0:
        raise ValueError("degenerate training set: covariance has no positive eigenvalue")
    rank = int(np.count_nonzero(eigvals > RANK_CUTOFF * eigvals[0]))

    k = min(k_max, rank, n - 1)
    if k < k_max:
        logger.warning(
            "retaining k=%d components (requested %d, rank %d, n-1 = %d)",
            k, k_max, rank, n - 1,
        )
    return EigenModel(
        mean=mean,
        basis=_fix_signs(basis[:, :k]),
        eigenvalues=eigvals[:k].copy(),
        image_shape=image_shape,
    )


def fit_pca(training, k_max: int = 40) -> EigenModel:
    """Fit the eigenspace from a list of same-size training images."""
    images = [as_image(img, name=f"training[{i}]") for i, img in enumerate(training)]
    if len(images) < 2:
        raise ValueError(f"need at least 2 training images, got {len(images)}")
    shape = images[0].shape
    for i, img in enumerate(images):
        if img.shape != shape:
            raise ValueError(
                f"training[{i}] has shape {img.shape}, expected {shape}"
            )
    X = np.stack([img.ravel() for img in images])
    return fit_pca_matrix(X, k_max, image_shape=shape)


def project(model: EigenModel, image) -> np.ndarray:
    """Coordinates of an image in the eigenspace: basis^T (vec(image) - mean)."""
    img = as_image(image)
    if model.image_shape is not None and img.shape != model.image_shape:
        raise ValueError(
            f"image shape {img.shape} does not match model shape {model.image_shape}"
        )
    vec = img.ravel()
    if vec.shape[0] != model.d:
        raise ValueError(f"image has {vec.shape[0]} pixels, model expects {model.d}")
    return model.basis.T @ (vec - model.mean)


def reconstruct_from_features(model: EigenModel, features) -> np.ndarray:
    """Back-project eigenspace coordinates to an image."""
    f = as_vector(features, name="features")
    if f.shape[0] != model.k:
        raise ValueError(f"expected {model.k} features, got {f.shape[0]}")
    vec = model.mean + model.basis @ f
    if model.image_shape is None:
        raise ValueError("model carries no image shape; cannot reshape")
    return vec.reshape(model.image_shape)
