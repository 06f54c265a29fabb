"""dataset.py

Synthetic scenes of rotated shapes and their on-disk layout.

A dataset directory holds ``<image_id>.png`` next to ``<image_id>.masks.json``;
the mask file lists every instance as an array of ``[x, y]`` points.
"""

from typing import Dict, List, Optional, Tuple, Union
from dataclasses import dataclass, field
import json
import logging
import math
import pathlib

import numpy as np
import tqdm

from mutdet import image
from mutdet.exceptions import DatasetError
from mutdet.geometry import OrientedBox, box_corners

logger = logging.getLogger(__name__)

SHAPE_KINDS = ('rectangle', 'ellipse', 'triangle')

# two base colors per kind, so appearance carries the shape class
PALETTE: Dict[str, Tuple[Tuple[int, int, int], ...]] = {
    'rectangle': ((205, 60, 50), (235, 150, 40)),
    'ellipse': ((50, 175, 70), (40, 205, 185)),
    'triangle': ((60, 80, 215), (165, 60, 205)),
}

COLOR_JITTER = 12
ELLIPSE_VERTICES = 24
MASK_SUFFIX = '.masks.json'


@dataclass
class Instance:
    points: np.ndarray
    kind: str
    color_id: int


@dataclass
class SyntheticScene:
    image_id: str
    image: np.ndarray
    instances: List[Instance] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.image.shape[0]


def _shape_polygon(kind: str, center: np.ndarray, major: float, minor: float, angle: float,
                   rng: np.random.Generator) -> np.ndarray:
    if kind == 'rectangle':
        return box_corners(OrientedBox(center[0], center[1], 2 * major, 2 * minor, angle))

    if kind == 'ellipse':
        t = np.linspace(0, 2 * np.pi, ELLIPSE_VERTICES, endpoint=False)
        local = np.stack([major * np.cos(t), minor * np.sin(t)], axis=1)
    else:
        corner_angles = np.arange(3) * 2 * np.pi / 3 + rng.uniform(-0.25, 0.25, size=3)
        radii = major * rng.uniform(0.8, 1.0, size=3)
        local = np.stack([radii * np.cos(corner_angles), radii * np.sin(corner_angles)], axis=1)

    cos_a, sin_a = math.cos(angle), math.sin(angle)
    rotation = np.array([[cos_a, -sin_a], [sin_a, cos_a]])
    return local @ rotation.T + center


def generate_scene(seed: int, n_objects: int, size: int = 64,
                   image_id: Optional[str] = None) -> SyntheticScene:
    """Render ``n_objects`` random rotated rectangles, ellipses and triangles.

    Deterministic given ``seed``; every mask lies inside the image.
    """
    if n_objects < 0:
        raise ValueError('Number of objects must be non-negative')

    rng = np.random.default_rng(seed)
    background = rng.integers(20, 60, size=(size, size, 3)).astype(np.uint8)

    instances: List[Instance] = []
    colors = []
    for _ in range(n_objects):
        kind = SHAPE_KINDS[int(rng.integers(len(SHAPE_KINDS)))]
        color_id = int(rng.integers(len(PALETTE[kind])))

        major = max(2.0, rng.uniform(0.08, 0.19) * size)
        minor = major * rng.uniform(0.4, 1.0)
        angle = rng.uniform(-np.pi / 2, np.pi / 2)
        reach = math.hypot(major, minor) + 1
        center = rng.uniform(reach, size - reach, size=2)

        points = _shape_polygon(kind, center, major, minor, angle, rng)
        base = np.array(PALETTE[kind][color_id])
        color = np.clip(base + rng.integers(-COLOR_JITTER, COLOR_JITTER + 1, size=3), 0, 255)

        instances.append(Instance(points, kind, color_id))
        colors.append(tuple(int(c) for c in color))

    pixels = image.draw_polygons(size, background, [i.points for i in instances], colors)
    return SyntheticScene(
        image_id=image_id or f'scene_{seed}',
        image=image.to_float(pixels),
        instances=instances
    )


def save_scene(directory: Union[str, pathlib.Path], scene: SyntheticScene) -> None:
    directory = pathlib.Path(directory)
    image.save_png(directory / f'{scene.image_id}.png', scene.image)

    masks = {
        'image_id': scene.image_id,
        'instances': [
            {'points': inst.points.tolist(), 'kind': inst.kind, 'color': inst.color_id}
            for inst in scene.instances
        ]
    }
    with open(directory / f'{scene.image_id}{MASK_SUFFIX}', 'w', encoding='utf-8') as f:
        json.dump(masks, f)


def load_scene(png_path: pathlib.Path) -> SyntheticScene:
    image_id = png_path.name[:-len('.png')]
    mask_path = png_path.with_name(f'{image_id}{MASK_SUFFIX}')
    if not mask_path.is_file():
        raise DatasetError(f'Image {png_path} has no mask file {mask_path.name}')

    try:
        with open(mask_path, encoding='utf-8') as f:
            masks = json.load(f)
        instances = [
            Instance(np.asarray(inst['points'], dtype=np.float64).reshape(-1, 2),
                     str(inst.get('kind', 'unknown')), int(inst.get('color', 0)))
            for inst in masks['instances']
        ]
    except (ValueError, KeyError, TypeError) as exc:
        raise DatasetError(f'Could not parse mask file {mask_path}: {exc!s}') from exc

    pixels = image.load_png(png_path)
    if pixels.shape[0] != pixels.shape[1]:
        raise DatasetError(f'Image {png_path} is not square')

    return SyntheticScene(image_id, pixels, instances)


def load_dataset(directory: Union[str, pathlib.Path]) -> List[SyntheticScene]:
    """All scenes of a dataset directory, ordered by image id"""
    directory = pathlib.Path(directory)
    if not directory.is_dir():
        raise DatasetError(f'Dataset directory {directory} does not exist')

    png_files = sorted(directory.glob('*.png'))
    if not png_files:
        raise DatasetError(f'Dataset directory {directory} contains no images')

    return [load_scene(path) for path in png_files]


def generate_dataset(directory: Union[str, pathlib.Path], seed: int, count: int,
                     max_objects: int, size: int = 64, quiet: bool = True) -> List[str]:
    """Write ``count`` scenes with 1 to ``max_objects`` objects each; returns the image ids"""
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    scene_seeds = rng.integers(0, 2**31 - 1, size=count)
    object_counts = rng.integers(min(1, max_objects), max_objects + 1, size=count)

    image_ids = []
    for i in tqdm.trange(count, desc='Generating scenes', disable=quiet):
        scene = generate_scene(int(scene_seeds[i]), int(object_counts[i]), size=size,
                               image_id=f'scene_{i:05d}')
        save_scene(directory, scene)
        image_ids.append(scene.image_id)

    logger.info('Wrote %d scenes to %s', count, directory)
    return image_ids
