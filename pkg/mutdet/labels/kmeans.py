"""labels/kmeans.py

Seeded k-means clustering of normalized object embeddings.
"""

from typing import NamedTuple
import logging
import warnings

import numpy as np
from sklearn.cluster import KMeans

from mutdet.exceptions import InsufficientDataError, InvalidArgumentsError

logger = logging.getLogger(__name__)


class KMeansModel(NamedTuple):
    centroids: np.ndarray
    inertia: float
    #: Lloyd iterations run until convergence
    iterations: int = 0

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, np.newaxis, :] - centroids[np.newaxis, :, :]
    return np.einsum('nkd,nkd->nk', diff, diff)


def kmeans_fit(points: np.ndarray, k: int, max_iters: int = 100, seed: int = 0) -> KMeansModel:
    """Lloyd's algorithm with k-means++ seeding; deterministic given ``seed``.

    Empty clusters are relocated to the points farthest from their centroids.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise InvalidArgumentsError(f'Expected a 2D point matrix, got shape {points.shape}')
    if k < 1:
        raise InvalidArgumentsError('Number of clusters must be positive')
    if len(points) < k:
        raise InsufficientDataError(f'Cannot form {k} clusters from {len(points)} points')

    estimator = KMeans(n_clusters=k, init='k-means++', n_init=1, max_iter=max_iters,
                       random_state=seed)

    with warnings.catch_warnings(record=True) as caught:
        # fewer distinct points than clusters is legal here
        warnings.simplefilter('always')
        estimator.fit(points)

    for warning in caught:
        logger.warning('k-means: %s', warning.message)

    centroids = np.asarray(estimator.cluster_centers_, dtype=np.float64)
    inertia = float(squared_distances(points, centroids).min(axis=1).sum())
    return KMeansModel(centroids, inertia, int(estimator.n_iter_))


def assign_cluster(model: KMeansModel, v: np.ndarray) -> int:
    """Index of the nearest centroid; ties go to the lowest index"""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (model.centroids.shape[1],):
        raise InvalidArgumentsError(
            f'Expected a vector of length {model.centroids.shape[1]}, got shape {v.shape}'
        )
    distances = squared_distances(v[np.newaxis], model.centroids)[0]
    return int(np.argmin(distances))
