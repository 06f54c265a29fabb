"""detector/checkpoint.py

Reader and writer of the ``mutdet-ckpt-v1`` container.

The file starts with one line of JSON (sorted keys) holding the format
version, both configs, the model seed and a table of tensors with name, shape
and byte offset. Raw little-endian float64 data of all tensors follows in
table order. Identical models produce identical bytes.
"""

from typing import Any, Dict, NamedTuple, Optional, Union
import json
import logging
import pathlib

import numpy as np
from marshmallow import ValidationError

from mutdet.config import (
    DetectorConfigSchema, TrainConfig, TrainConfigSchema, check_detector_config
)
from mutdet.detector.model import MutDet
from mutdet.exceptions import CheckpointError, ConfigurationError, InvalidArgumentsError

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 'mutdet-ckpt-v1'
DTYPE = '<f8'

PathLike = Union[str, pathlib.Path]


class Checkpoint(NamedTuple):
    model: MutDet
    train_config: Optional[TrainConfig]


def _jsonable(config: Any) -> Dict[str, Any]:
    return {key: list(value) if isinstance(value, tuple) else value
            for key, value in config._asdict().items()}


def save_checkpoint(path: PathLike, model: MutDet,
                    train_config: Optional[TrainConfig] = None) -> None:
    tensors = []
    chunks = []
    offset = 0
    for name, param in sorted(model.store.items()):
        data = np.ascontiguousarray(param.data, dtype=DTYPE).tobytes()
        tensors.append({'name': name, 'shape': list(param.shape), 'offset': offset})
        chunks.append(data)
        offset += len(data)

    header = {
        'version': CHECKPOINT_VERSION,
        'detector_config': _jsonable(model.config),
        'train_config': _jsonable(train_config) if train_config is not None else None,
        'seed': model.seed,
        'tensors': tensors,
    }

    with open(path, 'wb') as f:
        f.write(json.dumps(header, sort_keys=True, allow_nan=False).encode('utf-8'))
        f.write(b'\n')
        for chunk in chunks:
            f.write(chunk)

    logger.info('Wrote checkpoint with %d tensors to %s', len(tensors), path)


def read_header(path: PathLike) -> Dict[str, Any]:
    path = pathlib.Path(path)
    if not path.is_file():
        raise CheckpointError(f'Checkpoint {path} does not exist')

    with open(path, 'rb') as f:
        first_line = f.readline()

    try:
        header = json.loads(first_line.decode('utf-8'))
    except ValueError as exc:
        raise CheckpointError(f'{path} is not a MutDet checkpoint') from exc

    if not isinstance(header, dict) or header.get('version') != CHECKPOINT_VERSION:
        version = header.get('version') if isinstance(header, dict) else None
        raise CheckpointError(f'Unsupported checkpoint version {version!r} in {path}')

    return header


def load_checkpoint(path: PathLike) -> Checkpoint:
    """Rebuild the model stored at ``path``, bit-exact"""
    header = read_header(path)
    with open(path, 'rb') as f:
        f.readline()
        payload = f.read()

    try:
        detector_config = check_detector_config(
            DetectorConfigSchema().load(header['detector_config'])
        )
        train_config = None
        if header.get('train_config') is not None:
            train_config = TrainConfigSchema().load(header['train_config'])
    except (KeyError, ValidationError, ConfigurationError) as exc:
        raise CheckpointError(f'Invalid configuration in checkpoint {path}: {exc!s}') from exc

    state = {}
    for entry in header.get('tensors', []):
        shape = tuple(entry['shape'])
        count = int(np.prod(shape, dtype=np.int64))
        start = entry['offset']
        stop = start + count * np.dtype(DTYPE).itemsize
        if stop > len(payload):
            raise CheckpointError(f'Checkpoint {path} is truncated at tensor {entry["name"]}')
        state[entry['name']] = np.frombuffer(payload[start:stop], dtype=DTYPE).reshape(shape)

    model = MutDet(detector_config, seed=int(header.get('seed', 0)))
    try:
        model.store.load_state(state)
    except InvalidArgumentsError as exc:
        msg = f'Checkpoint {path} does not match its configuration: {exc!s}'
        raise CheckpointError(msg) from exc

    return Checkpoint(model, train_config)
