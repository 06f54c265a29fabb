"""cache.py

Cache for token matrices of the frozen feature extractor.
"""

from typing import Tuple, Hashable

import sys
import zlib

import numpy as np
from cachetools import LFUCache

CompressionTuple = Tuple[bytes, str, Tuple[int, ...]]


class FeatureCache(LFUCache):
    """Least-frequently-used cache of float arrays with ZLIB compression.

    Values come back bit-identical to what was stored. Only valid for features
    that never change, such as the output of the frozen extractor.
    """

    def __init__(self, maxsize: int, compression_level: int):
        super().__init__(maxsize, self._get_size)
        self.compression_level = compression_level

    def __getitem__(self, key: Hashable) -> np.ndarray:
        compressed_item = super().__getitem__(key)
        return self._decompress_tuple(compressed_item)

    def __setitem__(self, key: Hashable, value: np.ndarray) -> None:
        val_compressed = self._compress_array(value, self.compression_level)
        super().__setitem__(key, val_compressed)

    @staticmethod
    def _compress_array(arr: np.ndarray, compression_level: int) -> CompressionTuple:
        arr = np.ascontiguousarray(arr)
        return (
            zlib.compress(arr.tobytes(), compression_level),
            arr.dtype.str,
            arr.shape
        )

    @staticmethod
    def _decompress_tuple(compressed_data: CompressionTuple) -> np.ndarray:
        data_b, dt, shape = compressed_data
        # copy so callers may write to the result
        return np.frombuffer(zlib.decompress(data_b), dtype=dt).reshape(shape).copy()

    @staticmethod
    def _get_size(x: CompressionTuple) -> int:
        return sum(map(sys.getsizeof, x))
