"""JSON file formats: detections, ground truth and spotted output.

Floats are written with Python's shortest round-trip ``repr``; keys keep the
documented order and images are sorted by ``image_id`` so that identical
inputs always produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

from .geom import AxisAlignedBox, ConvexPolygon, GeometryError
from .model import (
    CharDetection,
    DetectionBundle,
    GroundTruthChar,
    GroundTruthLine,
    ImageRecord,
    LineCandidate,
    SpottedLine,
    ValidationError,
    check_label,
    check_score,
    validate_bundle,
    validate_record,
)


def _num(v, image_id, path) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError("schema", f"expected a number, got {v!r}", image_id, path)
    return float(v)


def _box(v, image_id, path) -> AxisAlignedBox:
    if not isinstance(v, list) or len(v) != 4:
        raise ValidationError("schema", "box must be [x_min, y_min, x_max, y_max]", image_id, path)
    try:
        return AxisAlignedBox(*(_num(x, image_id, f"{path}[{i}]") for i, x in enumerate(v)))
    except GeometryError as e:
        raise ValidationError("invalid-geometry", str(e), image_id, path) from None


def _polygon(v, image_id, path) -> ConvexPolygon:
    if not isinstance(v, list) or not all(isinstance(p, list) and len(p) == 2 for p in v):
        raise ValidationError("schema", "polygon must be a list of [x, y] pairs", image_id, path)
    pts = [(_num(p[0], image_id, f"{path}[{i}][0]"), _num(p[1], image_id, f"{path}[{i}][1]")) for i, p in enumerate(v)]
    try:
        return ConvexPolygon(tuple(pts))
    except GeometryError as e:
        raise ValidationError("invalid-geometry", str(e), image_id, path) from None


def _field(obj: dict, key: str, image_id, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ValidationError("schema", f"missing field {key!r}", image_id, f"{path}.{key}" if path else key)
    v = obj[key]
    if kind is not None and (not isinstance(v, kind) or (kind is int and isinstance(v, bool))):
        raise ValidationError("schema", f"field {key!r} has wrong type", image_id, f"{path}.{key}" if path else key)
    return v


def _images(doc: Any) -> list:
    if not isinstance(doc, dict) or not isinstance(doc.get("images"), list):
        raise ValidationError("schema", "document must be an object with an 'images' array", None, "images")
    return doc["images"]


# detections


def parse_detections(doc: Any) -> list[DetectionBundle]:
    bundles = []
    seen = set()
    for n, img in enumerate(_images(doc)):
        image_id = _field(img, "image_id", None, f"images[{n}]", str)
        if image_id in seen:
            raise ValidationError("duplicate-id", f"image_id {image_id!r} repeated", image_id, f"images[{n}].image_id")
        seen.add(image_id)
        chars = []
        for i, c in enumerate(_field(img, "chars", image_id, "", list)):
            p = f"chars[{i}]"
            chars.append(
                CharDetection(
                    _box(_field(c, "box", image_id, p), image_id, p + ".box"),
                    check_label(_field(c, "label", image_id, p), image_id, p + ".label"),
                    check_score(_field(c, "score", image_id, p), image_id, p + ".score"),
                )
            )
        lines = []
        for i, ln in enumerate(_field(img, "lines", image_id, "", list)):
            p = f"lines[{i}]"
            lines.append(
                LineCandidate(
                    _field(ln, "id", image_id, p, int),
                    _polygon(_field(ln, "polygon", image_id, p), image_id, p + ".polygon"),
                    check_score(_field(ln, "score", image_id, p), image_id, p + ".score"),
                )
            )
        bundles.append(validate_bundle(DetectionBundle(image_id, tuple(chars), tuple(lines))))
    return bundles


def detections_doc(bundles: Iterable[DetectionBundle]) -> dict:
    return {
        "images": [
            {
                "image_id": b.image_id,
                "chars": [{"box": c.box.as_list(), "label": c.label, "score": c.score} for c in b.chars],
                "lines": [{"id": ln.id, "polygon": ln.polygon.as_lists(), "score": ln.visual_score} for ln in b.lines],
            }
            for b in sorted(bundles, key=lambda b: b.image_id)
        ]
    }


# ground truth


def parse_ground_truth(doc: Any) -> list[ImageRecord]:
    records = []
    seen = set()
    for n, img in enumerate(_images(doc)):
        image_id = _field(img, "image_id", None, f"images[{n}]", str)
        if image_id in seen:
            raise ValidationError("duplicate-id", f"image_id {image_id!r} repeated", image_id, f"images[{n}].image_id")
        seen.add(image_id)
        lines = []
        for i, ln in enumerate(_field(img, "lines", image_id, "", list)):
            p = f"lines[{i}]"
            lines.append(
                GroundTruthLine(
                    _polygon(_field(ln, "polygon", image_id, p), image_id, p + ".polygon"),
                    _field(ln, "transcript", image_id, p, str),
                    _field(ln, "ignore", image_id, p, bool),
                )
            )
        chars = []
        for i, c in enumerate(img.get("chars", [])):
            p = f"chars[{i}]"
            chars.append(
                GroundTruthChar(
                    _box(_field(c, "box", image_id, p), image_id, p + ".box"),
                    _field(c, "label", image_id, p, str),
                    _field(c, "line_index", image_id, p, int),
                )
            )
        rec = ImageRecord(
            image_id,
            _num(_field(img, "width", image_id, ""), image_id, "width"),
            _num(_field(img, "height", image_id, ""), image_id, "height"),
            tuple(lines),
            tuple(chars),
        )
        records.append(validate_record(rec))
    return records


def ground_truth_doc(records: Iterable[ImageRecord]) -> dict:
    return {
        "images": [
            {
                "image_id": r.image_id,
                "width": r.width,
                "height": r.height,
                "lines": [
                    {"polygon": ln.polygon.as_lists(), "transcript": ln.transcript, "ignore": ln.ignore}
                    for ln in r.gt_lines
                ],
                "chars": [{"box": c.box.as_list(), "label": c.label, "line_index": c.line_index} for c in r.gt_chars],
            }
            for r in sorted(records, key=lambda r: r.image_id)
        ]
    }


# spotted output


def parse_spotted(doc: Any) -> dict[str, list[SpottedLine]]:
    out: dict[str, list[SpottedLine]] = {}
    for n, img in enumerate(_images(doc)):
        image_id = _field(img, "image_id", None, f"images[{n}]", str)
        if image_id in out:
            raise ValidationError("duplicate-id", f"image_id {image_id!r} repeated", image_id, f"images[{n}].image_id")
        lines = []
        for i, ln in enumerate(_field(img, "lines", image_id, "", list)):
            p = f"lines[{i}]"
            lines.append(
                SpottedLine(
                    _polygon(_field(ln, "polygon", image_id, p), image_id, p + ".polygon"),
                    _field(ln, "transcript", image_id, p, str),
                    check_score(_field(ln, "s_vis", image_id, p), image_id, p + ".s_vis"),
                    check_score(_field(ln, "s_lin", image_id, p), image_id, p + ".s_lin"),
                    check_score(_field(ln, "s", image_id, p), image_id, p + ".s"),
                )
            )
        out[image_id] = lines
    return out


def spotted_doc(results: dict[str, list[SpottedLine]]) -> dict:
    return {
        "images": [
            {
                "image_id": image_id,
                "lines": [
                    {
                        "polygon": s.polygon.as_lists(),
                        "transcript": s.transcript,
                        "s_vis": s.visual_score,
                        "s_lin": s.linguistic_score,
                        "s": s.final_score,
                    }
                    for s in results[image_id]
                ],
            }
            for image_id in sorted(results)
        ]
    }


def dumps(doc: Any) -> str:
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":")) + "\n"


def read_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def write_json(path: str | Path, doc: Any) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")
