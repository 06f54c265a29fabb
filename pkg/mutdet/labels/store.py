"""labels/store.py

Pseudo-label sets and their line-delimited JSON store (``.plabels.jsonl``).
"""

from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple, Union
from dataclasses import dataclass
import json
import math
import pathlib

import numpy as np

from mutdet.exceptions import DegenerateInputError, InvalidArgumentsError, LabelStoreError
from mutdet.geometry import OrientedBox

LABEL_STORE_SUFFIX = '.plabels.jsonl'

PathLike = Union[str, pathlib.Path]


class PseudoLabel(NamedTuple):
    box: OrientedBox
    cls: int
    angle: float
    embedding: Tuple[float, ...]


@dataclass(frozen=True)
class PseudoLabelSet:
    """All pseudo-labels of one image, in instance order"""
    image_id: str
    entries: Tuple[PseudoLabel, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def boxes(self) -> np.ndarray:
        return np.array([e.box.to_array() for e in self.entries]).reshape(-1, 5)

    @property
    def classes(self) -> np.ndarray:
        return np.array([e.cls for e in self.entries], dtype=np.int64)

    def embeddings(self, dim: Optional[int] = None) -> np.ndarray:
        if not self.entries:
            return np.zeros((0, dim or 0))
        return np.array([e.embedding for e in self.entries], dtype=np.float64)

    @property
    def embedding_dim(self) -> int:
        return len(self.entries[0].embedding) if self.entries else 0


def to_record(labels: PseudoLabelSet) -> Dict:
    return {
        'image_id': labels.image_id,
        'boxes': [list(e.box.to_array().tolist()) for e in labels.entries],
        'cls': [int(e.cls) for e in labels.entries],
        'embeddings': [list(e.embedding) for e in labels.entries],
    }


def from_record(record: Dict) -> PseudoLabelSet:
    boxes, classes, embeddings = record['boxes'], record['cls'], record['embeddings']
    if not (len(boxes) == len(classes) == len(embeddings)):
        raise ValueError('boxes, cls and embeddings must have equal length')

    entries = []
    for box_values, cls, embedding in zip(boxes, classes, embeddings):
        box = OrientedBox.from_array(box_values)
        if isinstance(cls, bool) or not isinstance(cls, int) or cls < 0:
            raise ValueError(f'invalid class id {cls!r}')
        embedding = tuple(float(x) for x in embedding)
        if not all(math.isfinite(x) for x in embedding):
            raise ValueError('embeddings must be finite')
        entries.append(PseudoLabel(box, cls, box.angle, embedding))

    dims = {len(e.embedding) for e in entries}
    if len(dims) > 1:
        raise ValueError(f'inconsistent embedding lengths {sorted(dims)}')

    return PseudoLabelSet(str(record['image_id']), tuple(entries))


def write_label_store(path: PathLike, label_sets: Iterable[PseudoLabelSet]) -> None:
    """Write one JSON record per image; floats keep their shortest round-trip repr"""
    with open(path, 'w', encoding='utf-8') as f:
        for labels in label_sets:
            f.write(json.dumps(to_record(labels), allow_nan=False))
            f.write('\n')


def read_label_store(path: PathLike) -> List[PseudoLabelSet]:
    path = pathlib.Path(path)
    if not path.is_file():
        raise LabelStoreError(f'Label store {path} does not exist')

    label_sets = []
    seen = set()
    with open(path, encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                labels = from_record(json.loads(line))
            except (ValueError, KeyError, TypeError, DegenerateInputError,
                    InvalidArgumentsError) as exc:
                raise LabelStoreError(f'{path}, line {lineno}: {exc!s}') from exc
            if labels.image_id in seen:
                raise LabelStoreError(f'{path}, line {lineno}: duplicate image {labels.image_id}')
            seen.add(labels.image_id)
            label_sets.append(labels)

    return label_sets
