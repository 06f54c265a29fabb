"""labels/pca.py

Principal component analysis of raw crop features.
"""

from typing import NamedTuple

import numpy as np
from sklearn.decomposition import PCA

from mutdet.exceptions import InsufficientDataError, InvalidArgumentsError, DegenerateInputError


class PcaModel(NamedTuple):
    #: Feature mean, length D_in
    mean: np.ndarray
    #: Orthonormal rows ordered by descending explained variance, r x D_in with r <= output_dim
    components: np.ndarray
    #: Sample variance along each component
    explained_variance: np.ndarray
    #: Width of projected vectors; missing components are zero-padded
    output_dim: int

    @property
    def input_dim(self) -> int:
        return self.mean.shape[0]


def l2_normalize(v: np.ndarray) -> np.ndarray:
    """Scale a vector (or every row of a matrix) to unit Euclidean norm"""
    v = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norm == 0) or not np.all(np.isfinite(norm)):
        raise DegenerateInputError('Cannot normalize a zero or non-finite vector')
    return v / norm


def pca_fit(features: np.ndarray, target_dim: int) -> PcaModel:
    """Fit the top-``target_dim`` principal subspace.

    Keeps ``min(rank, target_dim)`` components, so small samples still produce
    a valid model whose projections are zero-padded to ``target_dim``.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise InvalidArgumentsError(f'Expected a 2D feature matrix, got shape {features.shape}')

    num_samples, input_dim = features.shape
    if num_samples < 2:
        raise InsufficientDataError(f'PCA needs at least 2 samples, got {num_samples}')
    if target_dim < 1:
        raise InvalidArgumentsError('Target dimension must be positive')

    with np.errstate(divide='ignore', invalid='ignore'):
        # constant features have no variance to explain
        pca = PCA(n_components=min(num_samples, input_dim), svd_solver='full').fit(features)
    singular_values = pca.singular_values_

    rank_tol = max(num_samples, input_dim) * np.finfo(np.float64).eps
    threshold = rank_tol * (singular_values[0] if singular_values.size else 0.0)
    rank = int(np.sum(singular_values > threshold))
    keep = min(rank, target_dim)

    components = np.array(pca.components_[:keep], dtype=np.float64)
    # deterministic signs: largest-magnitude entry of every row is positive
    pivots = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(keep), pivots])
    components *= signs[:, np.newaxis]

    explained_variance = np.array(pca.explained_variance_[:keep], dtype=np.float64)
    return PcaModel(np.array(pca.mean_, dtype=np.float64), components, explained_variance,
                    target_dim)


def pca_project(model: PcaModel, v: np.ndarray) -> np.ndarray:
    """``components · (v − mean)``, zero-padded to the model's output width.

    Accepts a single vector or a matrix of row vectors.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != model.input_dim or v.ndim not in (1, 2):
        raise InvalidArgumentsError(
            f'Expected vectors of length {model.input_dim}, got shape {v.shape}'
        )
    projected = (v - model.mean) @ model.components.T
    padding = model.output_dim - projected.shape[-1]
    if padding:
        pad_width = [(0, 0)] * (projected.ndim - 1) + [(0, padding)]
        projected = np.pad(projected, pad_width)
    return projected


def pca_reconstruct(model: PcaModel, projected: np.ndarray) -> np.ndarray:
    keep = model.components.shape[0]
    return model.mean + np.asarray(projected)[..., :keep] @ model.components
