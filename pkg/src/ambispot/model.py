"""Record types shared across the package, plus bundle validation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .geom import AxisAlignedBox, ConvexPolygon, GeometryError, external_rect

log = logging.getLogger(__name__)

SCORE_TOL = 1e-9


class ValidationError(ValueError):
    """Input document violates a record invariant.

    ``kind`` is one of ``invalid-geometry``, ``invalid-score``,
    ``duplicate-id``, ``schema``; ``path`` locates the offending field.
    """

    def __init__(self, kind: str, message: str, image_id: str | None = None, path: str = ""):
        self.kind = kind
        self.image_id = image_id
        self.path = path
        super().__init__(message)

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": str(self), "image_id": self.image_id, "path": self.path}


@dataclass(frozen=True)
class CharDetection:
    box: AxisAlignedBox
    label: str
    score: float = 1.0


@dataclass(frozen=True)
class LineCandidate:
    id: int
    polygon: ConvexPolygon
    visual_score: float


@dataclass(frozen=True)
class SpottedLine:
    polygon: ConvexPolygon
    transcript: str
    visual_score: float
    linguistic_score: float
    final_score: float


@dataclass(frozen=True)
class GroundTruthLine:
    polygon: ConvexPolygon
    transcript: str
    ignore: bool = False


@dataclass(frozen=True)
class GroundTruthChar:
    box: AxisAlignedBox
    label: str
    line_index: int


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    width: float
    height: float
    gt_lines: tuple[GroundTruthLine, ...] = ()
    gt_chars: tuple[GroundTruthChar, ...] = ()

    def line_chars(self, index: int) -> list[GroundTruthChar]:
        return [c for c in self.gt_chars if c.line_index == index]


@dataclass(frozen=True)
class DetectionBundle:
    image_id: str
    chars: tuple[CharDetection, ...] = ()
    lines: tuple[LineCandidate, ...] = ()


def check_score(value, image_id: str | None = None, path: str = "") -> float:
    """Return ``value`` as a float in [0, 1], clamping drift up to 1e-9."""
    try:
        s = float(value)
    except (TypeError, ValueError):
        raise ValidationError("invalid-score", f"score {value!r} is not a number", image_id, path) from None
    if not math.isfinite(s) or s < -SCORE_TOL or s > 1.0 + SCORE_TOL:
        raise ValidationError("invalid-score", f"score {s!r} outside [0, 1]", image_id, path)
    return min(1.0, max(0.0, s))


def check_label(label, image_id: str | None = None, path: str = "") -> str:
    if not isinstance(label, str) or len(label) != 1:
        raise ValidationError("schema", f"label must be exactly one character, got {label!r}", image_id, path)
    return label


def validate_bundle(b: DetectionBundle) -> DetectionBundle:
    chars = []
    for i, c in enumerate(b.chars):
        p = f"chars[{i}]"
        if not isinstance(c.box, AxisAlignedBox):
            raise ValidationError("invalid-geometry", "character box must be axis-aligned", b.image_id, p + ".box")
        check_label(c.label, b.image_id, p + ".label")
        chars.append(CharDetection(c.box, c.label, check_score(c.score, b.image_id, p + ".score")))
    lines = []
    seen: set[int] = set()
    for i, ln in enumerate(b.lines):
        p = f"lines[{i}]"
        if not isinstance(ln.polygon, ConvexPolygon):
            raise ValidationError("invalid-geometry", "line polygon must be convex", b.image_id, p + ".polygon")
        if ln.id in seen:
            raise ValidationError("duplicate-id", f"line id {ln.id} repeated", b.image_id, p + ".id")
        seen.add(ln.id)
        lines.append(LineCandidate(ln.id, ln.polygon, check_score(ln.visual_score, b.image_id, p + ".score")))
    return DetectionBundle(b.image_id, tuple(chars), tuple(lines))


def validate_record(rec: ImageRecord) -> ImageRecord:
    for i, ln in enumerate(rec.gt_lines):
        if not ln.transcript and not ln.ignore:
            raise ValidationError("schema", "empty transcript on a non-ignored line", rec.image_id, f"lines[{i}].transcript")
    for i, c in enumerate(rec.gt_chars):
        check_label(c.label, rec.image_id, f"chars[{i}].label")
        if not 0 <= c.line_index < len(rec.gt_lines):
            raise ValidationError(
                "schema", f"line_index {c.line_index} out of range", rec.image_id, f"chars[{i}].line_index"
            )
    shapes = [ln.polygon for ln in rec.gt_lines] + [c.box for c in rec.gt_chars]
    for s in shapes:
        r = external_rect(s)
        if r.x_min < 0 or r.y_min < 0 or r.x_max > rec.width or r.y_max > rec.height:
            log.warning("image %s: geometry extends outside %gx%g canvas", rec.image_id, rec.width, rec.height)
            break
    return rec


__all__ = [
    "CharDetection",
    "DetectionBundle",
    "GeometryError",
    "GroundTruthChar",
    "GroundTruthLine",
    "ImageRecord",
    "LineCandidate",
    "SpottedLine",
    "ValidationError",
    "check_score",
    "validate_bundle",
    "validate_record",
]
