import sys
import zlib

import numpy as np


def test_get_size():
    from mutdet.cache import FeatureCache

    shape = (256, 256)
    data = zlib.compress(np.ones(shape).tobytes(), 9)
    size = FeatureCache._get_size((data, '<f8', shape))
    assert size == sys.getsizeof(data) + sys.getsizeof('<f8') + sys.getsizeof(shape)
    assert len(data) < size < 8 * 256 * 256


def test_roundtrip_bit_exact():
    from mutdet.cache import FeatureCache

    cache = FeatureCache(1024 * 1024, compression_level=1)
    value = np.random.default_rng(0).normal(size=(20, 16))
    cache['scene'] = value

    restored = cache['scene']
    np.testing.assert_array_equal(restored, value)
    assert restored.dtype == value.dtype

    # a copy is returned
    restored[0, 0] = 100
    assert cache['scene'][0, 0] == value[0, 0]


def test_eviction():
    from mutdet.cache import FeatureCache

    item = np.random.default_rng(1).normal(size=(64, 64))
    item_size = FeatureCache._get_size(FeatureCache._compress_array(item, 1))
    cache = FeatureCache(int(2.5 * item_size), compression_level=1)

    for i in range(4):
        cache[i] = item + i

    assert len(cache) == 2
