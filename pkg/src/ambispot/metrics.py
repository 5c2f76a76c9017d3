"""Detection (P/R/F at IoU 0.5) and recognition (1-NED) evaluation."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .geom import iou
from .model import GroundTruthLine, SpottedLine


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance over code points (unit-cost insert/delete/substitute)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def normalized_edit_distance(a: str, b: str) -> float:
    m = max(len(a), len(b))
    return edit_distance(a, b) / m if m else 0.0


@dataclass
class Matching:
    pairs: list[tuple[int, int]] = field(default_factory=list)
    false_positives: list[int] = field(default_factory=list)
    ignored: list[int] = field(default_factory=list)
    missed: list[int] = field(default_factory=list)


def match_lines(dets: Sequence[SpottedLine], gts: Sequence[GroundTruthLine], iou_thr: float = 0.5) -> Matching:
    """Greedy one-to-one matching in final-score order.

    A detection takes the free cared-for GT with the highest IoU above
    ``iou_thr``. Failing that, a detection overlapping a DO-NOT-CARE region
    above ``iou_thr`` is ignored; otherwise it is a false positive.
    """
    res = Matching()
    free = {g for g, gt in enumerate(gts) if not gt.ignore}
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].final_score, i))
    for d in order:
        best_g, best = None, iou_thr
        ignored_hit = False
        for g, gt in enumerate(gts):
            v = iou(dets[d].polygon, gt.polygon)
            if gt.ignore:
                ignored_hit = ignored_hit or v > iou_thr
            elif g in free and v > best:
                best_g, best = g, v
        if best_g is not None:
            free.discard(best_g)
            res.pairs.append((d, best_g))
        elif ignored_hit:
            res.ignored.append(d)
        else:
            res.false_positives.append(d)
    res.missed = sorted(free)
    return res


@dataclass
class EvalReport:
    precision: float = 0.0
    recall: float = 0.0
    f_measure: float = 0.0
    one_minus_ned: float = 1.0
    matched: int = 0
    false_positives: int = 0
    missed: int = 0
    ned_sum: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_counts(cls, matched: int, false_positives: int, missed: int, ned_sum: float) -> "EvalReport":
        p, r, f = prf(matched, false_positives, missed)
        n = matched + false_positives + missed
        return cls(p, r, f, 1.0 - ned_sum / n if n else 1.0, matched, false_positives, missed, ned_sum)


def prf(matched: int, false_positives: int, missed: int) -> tuple[float, float, float]:
    p = matched / (matched + false_positives) if matched + false_positives else 0.0
    r = matched / (matched + missed) if matched + missed else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def det_eval(m: Matching) -> tuple[float, float, float]:
    return prf(len(m.pairs), len(m.false_positives), len(m.missed))


def ned_sum(m: Matching, dets: Sequence[SpottedLine], gts: Sequence[GroundTruthLine]) -> float:
    s = sum(normalized_edit_distance(dets[d].transcript, gts[g].transcript) for d, g in m.pairs)
    return s + len(m.false_positives) + len(m.missed)


def one_minus_ned(m: Matching, dets: Sequence[SpottedLine], gts: Sequence[GroundTruthLine]) -> float:
    n = len(m.pairs) + len(m.false_positives) + len(m.missed)
    if n == 0:
        return 1.0
    return 1.0 - ned_sum(m, dets, gts) / n


def evaluate_image(dets: Sequence[SpottedLine], gts: Sequence[GroundTruthLine], iou_thr: float = 0.5) -> EvalReport:
    m = match_lines(dets, gts, iou_thr)
    return EvalReport.from_counts(len(m.pairs), len(m.false_positives), len(m.missed), ned_sum(m, dets, gts))


def aggregate(reports: Iterable[EvalReport]) -> EvalReport:
    """Micro-average: sum the counts first, then form the ratios."""
    reports = list(reports)
    return EvalReport.from_counts(
        sum(r.matched for r in reports),
        sum(r.false_positives for r in reports),
        sum(r.missed for r in reports),
        sum(r.ned_sum for r in reports),
    )


def best_gt_iou(det: SpottedLine, gts: Sequence[GroundTruthLine]) -> float:
    return max((iou(det.polygon, g.polygon) for g in gts if not g.ignore), default=0.0)


def format_table(global_report: EvalReport, per_image: dict[str, EvalReport] | None = None) -> str:
    header = ("image", "P", "R", "F", "1-NED", "matched", "FP", "missed")
    rows = []
    for name, r in list((per_image or {}).items()) + [("ALL", global_report)]:
        rows.append(
            (
                name,
                f"{100 * r.precision:.2f}",
                f"{100 * r.recall:.2f}",
                f"{100 * r.f_measure:.2f}",
                f"{100 * r.one_minus_ned:.2f}",
                str(r.matched),
                str(r.false_positives),
                str(r.missed),
            )
        )
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) if i == 0 else h.rjust(w) for i, (h, w) in enumerate(zip(header, widths)))]
    for row in rows:
        lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths))))
    return "\n".join(lines)
