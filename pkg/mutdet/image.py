"""image.py

Utilities to create, store and crop scene images.
"""

from typing import Sequence, Tuple, Union
import pathlib

import numpy as np
from PIL import Image, ImageDraw

from mutdet import exceptions, get_settings
from mutdet.profile import trace

RGB = Tuple[int, int, int]
Bounds = Tuple[int, int, int, int]


def to_uint8(image: np.ndarray) -> np.ndarray:
    """Quantize a float image in [0, 1] to 8 bit"""
    image = np.asarray(image, dtype=np.float64)
    if not np.all(np.isfinite(image)):
        raise exceptions.InvalidArgumentsError('Image contains non-finite values')
    return np.round(np.clip(image, 0, 1) * 255).astype(np.uint8)


def to_float(image: np.ndarray) -> np.ndarray:
    return np.asarray(image, dtype=np.float64) / 255.


@trace('save_png')
def save_png(path: Union[str, pathlib.Path], image: np.ndarray) -> None:
    """Encode an H x W x 3 float image as 8-bit RGB PNG"""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[-1] != 3:
        raise exceptions.InvalidArgumentsError('Images must have shape (H, W, 3)')

    settings = get_settings()
    Image.fromarray(to_uint8(image)).save(
        str(path), format='png', compress_level=settings.PNG_COMPRESS_LEVEL
    )


def load_png(path: Union[str, pathlib.Path]) -> np.ndarray:
    with Image.open(str(path)) as img:
        return to_float(np.asarray(img.convert('RGB')))


def draw_polygons(size: int, background: np.ndarray, polygons: Sequence[np.ndarray],
                  colors: Sequence[RGB]) -> np.ndarray:
    """Paint filled polygons (x, y vertex arrays) in order onto an 8-bit background"""
    canvas = Image.fromarray(np.asarray(background, dtype=np.uint8))
    if canvas.size != (size, size):
        raise exceptions.InvalidArgumentsError('Background does not match the canvas size')

    draw = ImageDraw.Draw(canvas)
    for polygon, color in zip(polygons, colors):
        draw.polygon([(float(x), float(y)) for x, y in polygon], fill=tuple(color))

    return np.asarray(canvas)


def enclosing_bounds(points: np.ndarray, width: int, height: int) -> Bounds:
    """Integer pixel window (x0, y0, x1, y1) covering all points, clipped to the image"""
    points = np.asarray(points, dtype=np.float64)
    x0 = int(np.clip(np.floor(points[:, 0].min()), 0, width - 1))
    y0 = int(np.clip(np.floor(points[:, 1].min()), 0, height - 1))
    x1 = int(np.clip(np.ceil(points[:, 0].max()), x0 + 1, width))
    y1 = int(np.clip(np.ceil(points[:, 1].max()), y0 + 1, height))
    return x0, y0, x1, y1


def crop_and_resize(image: np.ndarray, bounds: Bounds, size: int) -> np.ndarray:
    """Cut out a pixel window and resample it bilinearly to size x size"""
    x0, y0, x1, y1 = bounds
    if not (x1 > x0 and y1 > y0):
        raise exceptions.InvalidArgumentsError(f'Empty crop window {bounds}')

    crop = Image.fromarray(to_uint8(image[y0:y1, x0:x1]))
    return to_float(np.asarray(crop.resize((size, size), Image.BILINEAR)))
