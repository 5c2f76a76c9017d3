"""Match-assemble recognition: bind character detections to a line and read them out."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from .geom import ConvexPolygon, center, external_rect, intersection_area
from .model import CharDetection

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchConfig:
    thr_match: float = 0.3

    def __post_init__(self):
        if not 0.0 <= self.thr_match <= 1.0:
            raise ValueError(f"thr_match must be in [0, 1], got {self.thr_match}")


def match_chars(line: ConvexPolygon, chars: Sequence[CharDetection], cfg: MatchConfig = MatchConfig()) -> list[int]:
    """Indices of characters whose box lies inside ``line`` by more than ``thr_match``
    of the box's own area. Output keeps input order."""
    out = []
    for i, c in enumerate(chars):
        a = c.box.area
        if a <= 0:
            log.warning("skipping degenerate character box %s (%r)", c.box.as_list(), c.label)
            continue
        if intersection_area(c.box, line) / a > cfg.thr_match:
            out.append(i)
    return out


def is_horizontal(line: ConvexPolygon) -> bool:
    r = external_rect(line)
    return r.width > r.height


def assemble(line: ConvexPolygon, matched: Sequence[CharDetection]) -> str:
    """Order characters left-to-right for wide lines, top-down otherwise, and concatenate."""
    axis = 0 if is_horizontal(line) else 1
    order = sorted(range(len(matched)), key=lambda i: (center(matched[i].box)[axis], i))
    return "".join(matched[i].label for i in order)


def recognize_line(line: ConvexPolygon, chars: Sequence[CharDetection], cfg: MatchConfig = MatchConfig()) -> str:
    return assemble(line, [chars[i] for i in match_chars(line, chars, cfg)])
