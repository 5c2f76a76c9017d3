"""Rule-based detection of ambiguous text layouts in ground-truth annotations.

Two layouts confuse line grouping: lines whose characters sit far apart
relative to their size, and pairs of lines that share an edge alignment and
a character scale (so rows and columns are equally plausible groupings).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .geom import AxisAlignedBox, ConvexPolygon, center, external_rect, scale
from .model import ImageRecord
from .rng import SplitMix64


@dataclass(frozen=True)
class AmbiguityConfig:
    spacing_ratio_thr: float = 2.0
    alignment_ratio_thr: float = 0.1
    scale_band: tuple[float, float] = (0.9, 10 / 9)

    def __post_init__(self):
        lo, hi = self.scale_band
        if self.spacing_ratio_thr <= 0 or self.alignment_ratio_thr <= 0:
            raise ValueError("ratio thresholds must be positive")
        if not lo < 1 < hi:
            raise ValueError(f"scale_band must straddle 1, got {self.scale_band}")


@dataclass(frozen=True)
class ImageAmbiguityFlags:
    image_id: str
    lines_large_spacing: tuple[int, ...] = ()
    juxtaposed_pairs: tuple[tuple[int, int], ...] = ()

    @property
    def is_ambiguous(self) -> bool:
        return bool(self.lines_large_spacing or self.juxtaposed_pairs)


def spacing_ratio(boxes: Sequence[AxisAlignedBox]) -> float:
    """Sum of nearest-neighbour center distances over sum of character scales."""
    centers = [center(b) for b in boxes]
    nearest = 0.0
    for j, cj in enumerate(centers):
        nearest += min(math.dist(cj, ck) for k, ck in enumerate(centers) if k != j)
    total_scale = sum(scale(b) for b in boxes)
    return nearest / total_scale if total_scale > 0 else math.inf


def has_large_spacing(boxes: Sequence[AxisAlignedBox], cfg: AmbiguityConfig = AmbiguityConfig()) -> bool:
    if len(boxes) < 2:
        return False
    return spacing_ratio(boxes) > cfg.spacing_ratio_thr


def edge_offsets(a: ConvexPolygon | AxisAlignedBox, b: ConvexPolygon | AxisAlignedBox) -> tuple[float, float, float, float]:
    """Absolute top, bottom, left, right differences of the external rectangles."""
    ra, rb = external_rect(a), external_rect(b)
    return (
        abs(ra.y_min - rb.y_min),
        abs(ra.y_max - rb.y_max),
        abs(ra.x_min - rb.x_min),
        abs(ra.x_max - rb.x_max),
    )


def _aligned_and_similar(ref, other, cfg: AmbiguityConfig) -> bool:
    poly_i, chars_i = ref
    poly_j, chars_j = other
    sum_i = sum(scale(c) for c in chars_i)
    sum_j = sum(scale(c) for c in chars_j)
    if sum_i <= 0 or sum_j <= 0:
        return False
    aligned = len(chars_i) * min(edge_offsets(poly_i, poly_j)) / sum_i < cfg.alignment_ratio_thr
    ratio = (len(chars_j) * sum_i) / (len(chars_i) * sum_j)
    lo, hi = cfg.scale_band
    return aligned and lo <= ratio <= hi


def are_juxtaposed(line_i, line_j, cfg: AmbiguityConfig = AmbiguityConfig()) -> bool:
    """``line_i`` and ``line_j`` are ``(polygon, character boxes)`` pairs.

    The alignment test is normalized by one line's characters, so the pair is
    flagged when either line, taken as reference, passes both tests.
    """
    if not line_i[1] or not line_j[1]:
        return False
    return _aligned_and_similar(line_i, line_j, cfg) or _aligned_and_similar(line_j, line_i, cfg)


def classify_image(rec: ImageRecord, cfg: AmbiguityConfig = AmbiguityConfig()) -> ImageAmbiguityFlags:
    boxes: dict[int, list[AxisAlignedBox]] = {i: [] for i in range(len(rec.gt_lines))}
    for c in rec.gt_chars:
        boxes[c.line_index].append(c.box)
    active = [i for i, ln in enumerate(rec.gt_lines) if not ln.ignore]
    spaced = tuple(i for i in active if has_large_spacing(boxes[i], cfg))
    pairs = []
    for a, i in enumerate(active):
        for j in active[a + 1 :]:
            li = (rec.gt_lines[i].polygon, boxes[i])
            lj = (rec.gt_lines[j].polygon, boxes[j])
            if are_juxtaposed(li, lj, cfg):
                pairs.append((i, j))
    return ImageAmbiguityFlags(rec.image_id, spaced, tuple(pairs))


@dataclass
class AmbiguityStats:
    total_lines: int = 0
    large_spacing: int = 0
    juxtaposed: int = 0
    union: int = 0
    ambiguous_images: list[str] = field(default_factory=list)

    @staticmethod
    def _pct(k: int, n: int) -> float:
        return 100.0 * k / n if n else 0.0

    def rows(self) -> list[dict]:
        return [
            {"type": "Large Character Spacing", "count": self.large_spacing, "proportion": self._pct(self.large_spacing, self.total_lines)},
            {"type": "Juxtaposed Text Lines", "count": self.juxtaposed, "proportion": self._pct(self.juxtaposed, self.total_lines)},
            {"type": "Union of two Categories", "count": self.union, "proportion": self._pct(self.union, self.total_lines)},
        ]

    def to_dict(self) -> dict:
        return {"total_lines": self.total_lines, "rows": self.rows()}


def dataset_stats(dataset: Sequence[ImageRecord], cfg: AmbiguityConfig = AmbiguityConfig()) -> AmbiguityStats:
    """Line counts per ambiguity type; proportions are percentages of non-ignored lines."""
    st = AmbiguityStats()
    for rec in dataset:
        flags = classify_image(rec, cfg)
        spaced = set(flags.lines_large_spacing)
        jux = {i for pair in flags.juxtaposed_pairs for i in pair}
        st.total_lines += sum(1 for ln in rec.gt_lines if not ln.ignore)
        st.large_spacing += len(spaced)
        st.juxtaposed += len(jux)
        st.union += len(spaced | jux)
        if flags.is_ambiguous:
            st.ambiguous_images.append(rec.image_id)
    return st


class InsufficientAmbiguousImages(ValueError):
    def __init__(self, available: int, requested: int):
        self.available = available
        self.requested = requested
        super().__init__(f"requested {requested} ambiguous images but only {available} available")


def curate(
    dataset: Sequence[ImageRecord], n: int, seed: int, cfg: AmbiguityConfig = AmbiguityConfig()
) -> list[str]:
    """Seeded uniform sample of ``n`` ambiguous image ids, returned sorted."""
    if n < 0:
        raise ValueError("n must be non-negative")
    pool = sorted(r.image_id for r in dataset if classify_image(r, cfg).is_ambiguous)
    if n > len(pool):
        raise InsufficientAmbiguousImages(len(pool), n)
    return sorted(SplitMix64(seed).sample(pool, n))
