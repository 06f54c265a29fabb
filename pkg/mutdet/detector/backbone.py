"""detector/backbone.py

Frozen multi-scale patch extractor standing in for a pre-trained backbone.
"""

from typing import List, Optional, Tuple

import numpy as np

from mutdet import get_settings
from mutdet.cache import FeatureCache
from mutdet.config import DetectorConfig
from mutdet.exceptions import InvalidArgumentsError

#: Side of a token anchor in patches
ANCHOR_SCALE = 2.
MAX_ANCHOR_SIDE = 0.9


class FrozenBackbone:
    """Strided patch embedding at several scales followed by ``tanh``.

    Weights are drawn once from ``backbone_seed`` and never registered as
    trainable parameters, so no gradient can reach them. Token matrices of
    whole images are cached by image id.
    """

    def __init__(self, config: DetectorConfig, use_cache: bool = True) -> None:
        self.image_size = config.image_size
        self.patch_sizes: Tuple[int, ...] = tuple(config.patch_sizes)
        self.dim = config.dim

        rng = np.random.default_rng(config.backbone_seed)
        self.weights: List[np.ndarray] = []
        self.biases: List[np.ndarray] = []
        for patch_size in self.patch_sizes:
            fan_in = patch_size * patch_size * 3
            self.weights.append(rng.normal(0, 2 / np.sqrt(fan_in), size=(fan_in, self.dim)))
            self.biases.append(rng.normal(0, 0.1, size=self.dim))

        for array in self.weights + self.biases:
            array.flags.writeable = False

        settings = get_settings()
        self._cache: Optional[FeatureCache] = None
        if use_cache and settings.FEATURE_CACHE_SIZE > 0:
            self._cache = FeatureCache(
                settings.FEATURE_CACHE_SIZE, settings.FEATURE_CACHE_COMPRESS_LEVEL
            )

    @property
    def grid_sizes(self) -> Tuple[int, ...]:
        return tuple(self.image_size // p for p in self.patch_sizes)

    @property
    def num_tokens(self) -> int:
        return sum(g * g for g in self.grid_sizes)

    @property
    def pooled_dim(self) -> int:
        return len(self.patch_sizes) * self.dim

    def _check_image(self, image: np.ndarray) -> np.ndarray:
        image = np.asarray(image, dtype=np.float64)
        expected = (self.image_size, self.image_size, 3)
        if image.shape != expected:
            raise InvalidArgumentsError(f'Expected an image of shape {expected}, got {image.shape}')
        return image

    def _scale_tokens(self, image: np.ndarray, scale: int) -> np.ndarray:
        patch_size = self.patch_sizes[scale]
        grid = self.image_size // patch_size
        patches = (
            image.reshape(grid, patch_size, grid, patch_size, 3)
            .transpose(0, 2, 1, 3, 4)
            .reshape(grid * grid, -1)
        )
        return np.tanh((patches - 0.5) @ self.weights[scale] + self.biases[scale])

    def tokens(self, image: np.ndarray, image_id: Optional[str] = None) -> np.ndarray:
        """K x C token matrix with scales in configured patch-size order and
        the rows of each scale in row-major grid order"""
        if image_id is not None and self._cache is not None:
            try:
                return self._cache[image_id]
            except KeyError:
                pass

        image = self._check_image(image)
        out = np.concatenate(
            [self._scale_tokens(image, scale) for scale in range(len(self.patch_sizes))], axis=0
        )

        if image_id is not None and self._cache is not None:
            try:
                self._cache[image_id] = out
            except ValueError:
                # larger than the whole cache
                pass

        return out

    def pooled(self, crop: np.ndarray) -> np.ndarray:
        """Global average of every scale's tokens, concatenated into one raw feature"""
        crop = self._check_image(crop)
        return np.concatenate([
            self._scale_tokens(crop, scale).mean(axis=0) for scale in range(len(self.patch_sizes))
        ])

    def token_positions(self) -> List[np.ndarray]:
        """Normalized (x, y) patch centers per scale, in token order"""
        positions = []
        for grid in self.grid_sizes:
            centers = (np.arange(grid) + 0.5) / grid
            ys, xs = np.meshgrid(centers, centers, indexing='ij')
            positions.append(np.stack([xs.ravel(), ys.ravel()], axis=1))
        return positions

    def token_anchors(self, scale: float = ANCHOR_SCALE) -> np.ndarray:
        """K x 4 normalized (cx, cy, w, h) box of every token, in token order.

        Each anchor is centered on its patch and ``scale`` patches wide and high.
        """
        anchors = []
        for positions, patch_size in zip(self.token_positions(), self.patch_sizes):
            side = min(scale * patch_size / self.image_size, MAX_ANCHOR_SIDE)
            sides = np.full((len(positions), 2), side)
            anchors.append(np.concatenate([positions, sides], axis=1))
        return np.concatenate(anchors, axis=0)
