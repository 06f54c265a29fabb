"""geometry.py

Rotated-box primitives: angle canonicalization, corners, minimum-area
rectangles, rotated IoU and axis-aligned GIoU.

Boxes are parameterized by their center, so ``(cx, cy)`` is the rectangle
center in every module.
"""

from typing import Sequence, Tuple, Union
from dataclasses import dataclass
import math

import numpy as np
from shapely.geometry import MultiPoint, Polygon as ShapelyPolygon

from mutdet.exceptions import DegenerateInputError, InvalidArgumentsError

#: Ordered (N, 2) array of vertices, counter-clockwise
Polygon = np.ndarray

HALF_PI = math.pi / 2

VERTEX_DEDUP_TOLERANCE = 1e-12
AREA_TIE_TOLERANCE = 1e-9


def normalize_angle(angle: float) -> float:
    """Map an angle to its representative modulo π in [-π/2, π/2)

    Example:

        >>> normalize_angle(math.pi / 2) == -math.pi / 2
        True

    """
    if not math.isfinite(angle):
        raise InvalidArgumentsError(f'Angle must be finite, got {angle}')

    angle = float(angle)
    if -HALF_PI <= angle < HALF_PI:
        return angle

    result = (angle + HALF_PI) % math.pi - HALF_PI
    if result >= HALF_PI:
        result -= math.pi
    return result


@dataclass(frozen=True)
class OrientedBox:
    """Rotated rectangle with center (cx, cy), extents w and h and angle in [-π/2, π/2)"""
    cx: float
    cy: float
    w: float
    h: float
    angle: float = 0.0

    def __post_init__(self) -> None:
        values = (self.cx, self.cy, self.w, self.h, self.angle)
        if not all(math.isfinite(v) for v in values):
            raise DegenerateInputError(f'Box fields must be finite, got {values}')
        if not (self.w > 0 and self.h > 0):
            raise DegenerateInputError(f'Box extents must be positive, got w={self.w}, h={self.h}')
        for field, value in zip(('cx', 'cy', 'w', 'h'), values):
            object.__setattr__(self, field, float(value))
        object.__setattr__(self, 'angle', normalize_angle(self.angle))

    @property
    def area(self) -> float:
        return self.w * self.h

    def to_array(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.w, self.h, self.angle])

    @classmethod
    def from_array(cls, values: Sequence[float]) -> 'OrientedBox':
        if len(values) != 5:
            raise InvalidArgumentsError('Oriented boxes need exactly 5 values')
        return cls(*(float(v) for v in values))


def box_corners(box: OrientedBox) -> Polygon:
    """Corners of the rotated rectangle in counter-clockwise order"""
    half_w, half_h = box.w / 2, box.h / 2
    local = np.array([
        [-half_w, -half_h],
        [half_w, -half_h],
        [half_w, half_h],
        [-half_w, half_h],
    ])
    cos_a, sin_a = math.cos(box.angle), math.sin(box.angle)
    rotation = np.array([[cos_a, -sin_a], [sin_a, cos_a]])
    return local @ rotation.T + np.array([box.cx, box.cy])


def polygon_area(polygon: Polygon) -> float:
    """Signed shoelace area, positive for counter-clockwise vertex order"""
    if len(polygon) < 3:
        return 0.0
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def convex_hull(points: np.ndarray) -> Polygon:
    """Counter-clockwise convex hull vertices of a point set.

    Raises DegenerateInputError for fewer than 3 points or collinear input.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 2:
        raise InvalidArgumentsError(f'Expected an (n, 2) point array, got shape {points.shape}')
    if len(points) < 3:
        raise DegenerateInputError(f'Need at least 3 points, got {len(points)}')
    if not np.all(np.isfinite(points)):
        raise DegenerateInputError('Point coordinates must be finite')

    hull = MultiPoint([tuple(p) for p in points]).convex_hull
    if not isinstance(hull, ShapelyPolygon) or hull.area <= 0:
        raise DegenerateInputError('Points are collinear')

    vertices = np.asarray(hull.exterior.coords)[:-1]
    if polygon_area(vertices) < 0:
        vertices = vertices[::-1]
    return vertices


def _caliper_box(hull: Polygon, edge_angle: float) -> Tuple[float, OrientedBox]:
    u = np.array([math.cos(edge_angle), math.sin(edge_angle)])
    v = np.array([-u[1], u[0]])
    proj_u, proj_v = hull @ u, hull @ v
    extent_u = float(proj_u.max() - proj_u.min())
    extent_v = float(proj_v.max() - proj_v.min())
    mid_u = float(proj_u.max() + proj_u.min()) / 2
    mid_v = float(proj_v.max() + proj_v.min()) / 2
    cx, cy = mid_u * u + mid_v * v
    area = extent_u * extent_v
    return area, OrientedBox(cx, cy, extent_u, extent_v, normalize_angle(edge_angle))


def _flip(box: OrientedBox) -> OrientedBox:
    """Same rectangle described with swapped extents"""
    return OrientedBox(box.cx, box.cy, box.h, box.w, normalize_angle(box.angle + HALF_PI))


def min_area_rect(points: np.ndarray) -> OrientedBox:
    """Minimum-area enclosing rectangle via rotating calipers over convex hull edges.

    Among symmetric optima, the representative with ``w >= h`` is returned; if
    ``w == h``, the one with the smallest absolute canonical angle (ties go to
    the negative angle).
    """
    hull = convex_hull(points)
    edges = np.roll(hull, -1, axis=0) - hull
    edge_angles = np.arctan2(edges[:, 1], edges[:, 0])

    candidates = [_caliper_box(hull, float(a)) for a in edge_angles]
    best_area = min(area for area, _ in candidates)
    if best_area <= 0:
        raise DegenerateInputError('Points span no area')

    representatives = []
    for area, box in candidates:
        if area > best_area * (1 + AREA_TIE_TOLERANCE):
            continue
        flipped = _flip(box)
        if abs(box.w - box.h) <= AREA_TIE_TOLERANCE * max(box.w, box.h):
            representatives.extend((box, flipped))
        elif box.w > box.h:
            representatives.append(box)
        else:
            representatives.append(flipped)

    return min(representatives, key=lambda b: (abs(b.angle), b.angle))


def _clip(subject: Polygon, edge_start: np.ndarray, edge_end: np.ndarray) -> Polygon:
    """Keep the part of ``subject`` left of the directed edge (one Sutherland–Hodgman pass)"""
    direction = edge_end - edge_start

    def side(p: np.ndarray) -> float:
        return float(direction[0] * (p[1] - edge_start[1]) - direction[1] * (p[0] - edge_start[0]))

    output = []
    count = len(subject)
    for i in range(count):
        current, following = subject[i], subject[(i + 1) % count]
        s_cur, s_next = side(current), side(following)
        if s_cur >= 0:
            output.append(current)
        if (s_cur >= 0) != (s_next >= 0):
            t = s_cur / (s_cur - s_next)
            output.append(current + t * (following - current))

    return _dedup(np.array(output).reshape(-1, 2))


def _dedup(polygon: Polygon) -> Polygon:
    if len(polygon) == 0:
        return polygon
    keep = [polygon[0]]
    for vertex in polygon[1:]:
        if np.max(np.abs(vertex - keep[-1])) > VERTEX_DEDUP_TOLERANCE:
            keep.append(vertex)
    if len(keep) > 1 and np.max(np.abs(keep[0] - keep[-1])) <= VERTEX_DEDUP_TOLERANCE:
        keep.pop()
    return np.array(keep)


def clip_convex(subject: Polygon, clipper: Polygon) -> Polygon:
    """Intersection of two convex counter-clockwise polygons"""
    result = subject
    count = len(clipper)
    for i in range(count):
        if len(result) < 3:
            return np.zeros((0, 2))
        result = _clip(result, clipper[i], clipper[(i + 1) % count])
    return result if len(result) >= 3 else np.zeros((0, 2))


def _box_key(box: OrientedBox) -> Tuple[float, ...]:
    return (box.cx, box.cy, box.w, box.h, box.angle)


def rotated_iou(a: OrientedBox, b: OrientedBox) -> float:
    """Intersection over union of two oriented boxes by exact polygon clipping"""
    if a == b:
        return 1.0

    # fixed argument order makes the result exactly symmetric
    if _box_key(b) < _box_key(a):
        a, b = b, a

    intersection = clip_convex(box_corners(a), box_corners(b))
    inter_area = max(polygon_area(intersection), 0.0)
    union = a.area + b.area - inter_area
    if union <= 0:
        return 0.0
    return min(max(inter_area / union, 0.0), 1.0)


AxisAlignedBox = Union[OrientedBox, Sequence[float], np.ndarray]


def _as_xywh(boxes: AxisAlignedBox) -> np.ndarray:
    if isinstance(boxes, OrientedBox):
        return np.array([boxes.cx, boxes.cy, boxes.w, boxes.h])
    arr = np.asarray(boxes, dtype=np.float64)
    # angle column is ignored by contract
    return arr[..., :4]


def _corners_xyxy(boxes: np.ndarray) -> Tuple[np.ndarray, ...]:
    cx, cy, w, h = (boxes[..., i] for i in range(4))
    return cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2


def pairwise_iou_giou(a: AxisAlignedBox, b: AxisAlignedBox) -> Tuple[np.ndarray, np.ndarray]:
    """Axis-aligned IoU and GIoU of (cx, cy, w, h) boxes, broadcast over leading axes"""
    a_arr, b_arr = _as_xywh(a), _as_xywh(b)
    if np.any(a_arr[..., 2:] <= 0) or np.any(b_arr[..., 2:] <= 0):
        raise DegenerateInputError('Box extents must be positive')

    ax0, ay0, ax1, ay1 = _corners_xyxy(a_arr)
    bx0, by0, bx1, by1 = _corners_xyxy(b_arr)

    inter_w = np.clip(np.minimum(ax1, bx1) - np.maximum(ax0, bx0), 0, None)
    inter_h = np.clip(np.minimum(ay1, by1) - np.maximum(ay0, by0), 0, None)
    inter = inter_w * inter_h
    union = a_arr[..., 2] * a_arr[..., 3] + b_arr[..., 2] * b_arr[..., 3] - inter

    enclosure = (
        (np.maximum(ax1, bx1) - np.minimum(ax0, bx0))
        * (np.maximum(ay1, by1) - np.minimum(ay0, by0))
    )

    iou = inter / union
    giou = iou - (enclosure - union) / enclosure
    return iou, giou


def iou_axis_aligned(a: AxisAlignedBox, b: AxisAlignedBox) -> float:
    return float(pairwise_iou_giou(a, b)[0])


def aa_giou(a: AxisAlignedBox, b: AxisAlignedBox) -> float:
    """Generalized IoU of the axis-aligned (cx, cy, w, h) parts; angles are ignored"""
    return float(pairwise_iou_giou(a, b)[1])
