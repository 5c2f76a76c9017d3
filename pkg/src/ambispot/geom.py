"""Exact planar geometry for character boxes and text-line polygons.

Everything here is a pure function over immutable values. Tight line
footprints are convex polygons (rotated rectangles, convex quads); character
footprints are axis-aligned boxes. Intersections are computed by clipping one
convex polygon against the half-planes of the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Union

EPS = 1e-9


class GeometryError(ValueError):
    """Raised for invalid or degenerate geometry."""


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class AxisAlignedBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        vals = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise GeometryError(f"non-finite box coordinates {vals}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise GeometryError(f"box extents inverted: {vals}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]

    def to_polygon(self) -> "ConvexPolygon":
        return ConvexPolygon.rect(self.x_min, self.y_min, self.x_max, self.y_max)


def _signed_area(pts: Sequence[tuple[float, float]]) -> float:
    s = 0.0
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with counter-clockwise vertices.

    Clockwise input is reversed on construction. Collinear vertices are
    tolerated; reflex vertices, repeated consecutive vertices and zero area
    are rejected.
    """

    vertices: tuple[Point, ...]

    def __post_init__(self):
        pts = tuple(Point(float(x), float(y)) for x, y in self.vertices)
        if len(pts) < 3:
            raise GeometryError(f"polygon needs >= 3 vertices, got {len(pts)}")
        for p in pts:
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise GeometryError(f"non-finite vertex {p}")
        n = len(pts)
        for i in range(n):
            a, b = pts[i], pts[(i + 1) % n]
            if abs(a.x - b.x) <= EPS and abs(a.y - b.y) <= EPS:
                raise GeometryError(f"repeated consecutive vertex {a}")
        signed = _signed_area(pts)
        if signed < 0:
            pts = pts[::-1]
            signed = -signed
        if signed <= EPS:
            raise GeometryError("degenerate polygon (zero area)")
        for i in range(n):
            if _cross(pts[i - 1], pts[i], pts[(i + 1) % n]) < -EPS:
                raise GeometryError(f"polygon is not convex at vertex {pts[i]}")
        object.__setattr__(self, "vertices", pts)

    @classmethod
    def rect(cls, x_min: float, y_min: float, x_max: float, y_max: float) -> "ConvexPolygon":
        return cls(((x_min, y_min), (x_max, y_min), (x_max, y_max), (x_min, y_max)))

    def as_lists(self) -> list[list[float]]:
        return [[p.x, p.y] for p in self.vertices]

    def translated(self, dx: float, dy: float) -> "ConvexPolygon":
        return ConvexPolygon(tuple((p.x + dx, p.y + dy) for p in self.vertices))

    def scaled(self, k: float, origin: tuple[float, float] = (0.0, 0.0)) -> "ConvexPolygon":
        ox, oy = origin
        return ConvexPolygon(tuple((ox + k * (p.x - ox), oy + k * (p.y - oy)) for p in self.vertices))


Shape = Union[ConvexPolygon, AxisAlignedBox]


def as_polygon(x: Shape) -> ConvexPolygon:
    if isinstance(x, AxisAlignedBox):
        return x.to_polygon()
    return x


def area(x: Shape) -> float:
    if isinstance(x, AxisAlignedBox):
        return x.area
    a = _signed_area(x.vertices)
    if a <= 0:
        raise GeometryError("degenerate polygon (zero area)")
    return a


def external_rect(x: Shape) -> AxisAlignedBox:
    if isinstance(x, AxisAlignedBox):
        return x
    xs = [p.x for p in x.vertices]
    ys = [p.y for p in x.vertices]
    return AxisAlignedBox(min(xs), min(ys), max(xs), max(ys))


def center(x: Shape) -> Point:
    """Midpoint of the axis-aligned extents (not the area centroid)."""
    r = external_rect(x)
    return Point(0.5 * (r.x_min + r.x_max), 0.5 * (r.y_min + r.y_max))


def scale(x: Shape) -> float:
    return math.sqrt(area(x))


def clip_convex(subject: Sequence[tuple[float, float]], clip: ConvexPolygon) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clipping of ``subject`` by the CCW polygon ``clip``."""
    out = list(subject)
    cv = clip.vertices
    n = len(cv)
    for i in range(n):
        if not out:
            break
        p, q = cv[i], cv[(i + 1) % n]
        ex, ey = q[0] - p[0], q[1] - p[1]
        src = out
        out = []
        s = src[-1]
        ds = ex * (s[1] - p[1]) - ey * (s[0] - p[0])
        for e in src:
            de = ex * (e[1] - p[1]) - ey * (e[0] - p[0])
            if de >= 0:
                if ds < 0:
                    out.append(_lerp(s, e, ds / (ds - de)))
                out.append(e)
            elif ds >= 0:
                out.append(_lerp(s, e, ds / (ds - de)))
            s, ds = e, de
        out = _dedupe(out)
    return out


def _lerp(a, b, t):
    return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))


def _dedupe(pts: list) -> list:
    res = []
    for p in pts:
        if res and abs(p[0] - res[-1][0]) <= EPS and abs(p[1] - res[-1][1]) <= EPS:
            continue
        res.append(p)
    while len(res) > 1 and abs(res[0][0] - res[-1][0]) <= EPS and abs(res[0][1] - res[-1][1]) <= EPS:
        res.pop()
    return res


def _extents_disjoint(a: ConvexPolygon, b: ConvexPolygon) -> bool:
    ra, rb = external_rect(a), external_rect(b)
    return ra.x_max <= rb.x_min or rb.x_max <= ra.x_min or ra.y_max <= rb.y_min or rb.y_max <= ra.y_min


def intersection_area(a: Shape, b: Shape) -> float:
    pa, pb = as_polygon(a), as_polygon(b)
    if pa.vertices == pb.vertices:
        return area(pa)
    if _extents_disjoint(pa, pb):
        return 0.0
    clipped = clip_convex(pa.vertices, pb)
    if len(clipped) < 3:
        return 0.0
    return abs(_signed_area(clipped))


def iou(a: Shape, b: Shape) -> float:
    inter = intersection_area(a, b)
    union = area(a) + area(b) - inter
    if union <= 0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


def nms(items: Sequence[tuple[Shape, float]], iou_threshold: float) -> list[int]:
    """Greedy non-maximum suppression.

    Items are visited by score descending (ties: lower index first). An item
    is kept iff its IoU with every already-kept item is <= ``iou_threshold``.
    Returns kept indices in ascending input order.
    """
    if not 0.0 <= iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must be in [0, 1], got {iou_threshold}")
    polys = [as_polygon(p) for p, _ in items]
    order = sorted(range(len(items)), key=lambda i: (-items[i][1], i))
    kept: list[int] = []
    for i in order:
        if all(iou(polys[i], polys[k]) <= iou_threshold for k in kept):
            kept.append(i)
    return sorted(kept)


def bounding_polygon(shapes: Iterable[Shape], pad: float = 0.0) -> ConvexPolygon:
    """Axis-aligned rectangle enclosing ``shapes``, grown by ``pad`` on each side."""
    rects = [external_rect(s) for s in shapes]
    if not rects:
        raise GeometryError("no shapes to bound")
    return ConvexPolygon.rect(
        min(r.x_min for r in rects) - pad,
        min(r.y_min for r in rects) - pad,
        max(r.x_max for r in rects) + pad,
        max(r.y_max for r in rects) + pad,
    )
