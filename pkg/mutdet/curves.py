"""curves.py

Reading the per-iteration metrics file and turning it into loss curves.
"""

from typing import Dict, List, Sequence, Tuple, Union
import csv
import json
import math
import pathlib

from mutdet.exceptions import MetricsParseError
from mutdet.losses.compose import BRANCH_COMPONENTS

PathLike = Union[str, pathlib.Path]

#: Written by the distillation calibration modes only
OPTIONAL_COMPONENTS = ('distill',)

CSV_COLUMNS = ('iteration',) + BRANCH_COMPONENTS + ('total',)
REQUIRED_KEYS = ('iteration', 'epoch') + BRANCH_COMPONENTS + ('total',)


def _check_number(record: Dict, key: str, lineno: int) -> None:
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MetricsParseError(f'{key} is not a number: {value!r}', lineno)
    if not math.isfinite(value):
        raise MetricsParseError(f'{key} is not finite', lineno)


def read_metrics(path: PathLike) -> List[Dict[str, float]]:
    """Parse a metrics file; blank lines are skipped, anything else malformed raises"""
    path = pathlib.Path(path)
    if not path.is_file():
        raise MetricsParseError(f'Metrics file {path} does not exist', 0)

    records = []
    with open(path, encoding='utf-8') as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue

            try:
                record = json.loads(line)
            except ValueError as exc:
                raise MetricsParseError(f'invalid JSON ({exc.msg})', lineno) from exc

            if not isinstance(record, dict):
                raise MetricsParseError('expected a JSON object', lineno)

            missing = [key for key in REQUIRED_KEYS if key not in record]
            if missing:
                raise MetricsParseError(f'missing keys {", ".join(missing)}', lineno)

            for key in REQUIRED_KEYS + OPTIONAL_COMPONENTS:
                if key in record:
                    _check_number(record, key, lineno)

            records.append(record)

    return records


def loss_columns(records: Sequence[Dict[str, float]]) -> Tuple[str, ...]:
    """Loss columns of a run: the branch components, ``distill`` if any record
    carries it, then the total"""
    optional = tuple(key for key in OPTIONAL_COMPONENTS if any(key in r for r in records))
    return BRANCH_COMPONENTS + optional + ('total',)


def write_loss_curves(records: List[Dict[str, float]], path: PathLike) -> None:
    """One CSV row per logged iteration; a header only for an empty run"""
    columns = loss_columns(records)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(('iteration',) + columns)
        for record in records:
            writer.writerow([int(record['iteration'])] + [
                repr(float(record.get(key, 0.0))) for key in columns
            ])


def epoch_means(records: List[Dict[str, float]]) -> Dict[int, Dict[str, float]]:
    """Mean of every loss column per epoch"""
    columns = loss_columns(records)
    grouped: Dict[int, List[Dict[str, float]]] = {}
    for record in records:
        grouped.setdefault(int(record['epoch']), []).append(record)

    return {
        epoch: {key: math.fsum(r.get(key, 0.0) for r in rows) / len(rows) for key in columns}
        for epoch, rows in sorted(grouped.items())
    }
