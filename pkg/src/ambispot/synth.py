"""Synthetic ambiguous scenes with ground truth and simulated detector output.

Scene kinds:

* ``grid``: ``rows`` x ``cols`` characters; each row reads a corpus line of
  length ``cols``. With ``ambiguous_candidates`` the simulated detector also
  proposes every column and the full grid, with visual scores drawn from the
  same distribution as the rows, so geometry alone cannot pick the rows.
* ``spaced_line``: one line whose gap is widened so the nearest-neighbour
  spacing exceeds twice the character size; fragment candidates cover each
  character and each adjacent pair.
* ``plain_line``: one tightly set line, optionally with per-character
  fragments.

Random draws come from :class:`ambispot.rng.SplitMix64` in a fixed order:
one row-text index per row; then per character (row-major) ``dx``, ``dy``,
the flip test, the replacement index and the character score; then one
visual score per distinct candidate in emission order. Every draw is taken whether
or not the corresponding noise is enabled.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, replace

from .geom import AxisAlignedBox, ConvexPolygon, bounding_polygon
from .model import (
    CharDetection,
    DetectionBundle,
    GroundTruthChar,
    GroundTruthLine,
    ImageRecord,
    LineCandidate,
)
from .rng import SplitMix64, derive_seed

KINDS = ("grid", "spaced_line", "plain_line")
BASE_VISUAL_SCORE = 0.85
BASE_CHAR_SCORE = 0.9

# 48 frequent CJK characters used by the built-in pseudo-language
ALPHABET = "的一是在不了有人这中大为上个国我以要他时来用们生到作地于出就分对成会可主发年动同工也能下过子说产种面而方后多定"


def synthetic_corpus(n_lines: int = 12000, seed: int = 2020, n_words: int = 160, fanout: int = 4) -> list[str]:
    """Lines of a small pseudo-language with strong local structure.

    Words of 1-3 characters are chained through a sparse successor table,
    so character order is highly predictable within a line and a shuffled
    line looks foreign to a model trained on the corpus.
    """
    rng = SplitMix64(seed)
    words = []
    for _ in range(n_words):
        u = rng.uniform()
        length = 1 if u < 0.2 else (2 if u < 0.8 else 3)
        words.append("".join(rng.choice(ALPHABET) for _ in range(length)))
    successors = [[rng.below(n_words) for _ in range(fanout)] for _ in range(n_words)]
    lines = []
    for _ in range(n_lines):
        target = 3 + rng.below(8)
        w = rng.below(n_words)
        text = words[w]
        while len(text) < target:
            w = successors[w][rng.below(fanout)]
            text += words[w]
        lines.append(text)
    return lines


@functools.lru_cache(maxsize=8)
def load_corpus(source: str) -> tuple[str, ...]:
    """``"synthetic"`` (or ``"synthetic:<n_lines>:<seed>"``) or a UTF-8 file path."""
    if source == "synthetic":
        return tuple(synthetic_corpus())
    if source.startswith("synthetic:"):
        _, n, seed = source.split(":")
        return tuple(synthetic_corpus(int(n), int(seed)))
    with open(source, encoding="utf-8") as f:
        return tuple(line.rstrip("\r\n") for line in f if line.strip())


@dataclass(frozen=True)
class SceneConfig:
    kind: str = "grid"
    rows: int = 2
    cols: int = 3
    char_size: float = 32.0
    h_gap: float = 8.0
    v_gap: float = 8.0
    jitter_sigma: float = 0.0
    label_noise_rate: float = 0.0
    score_noise_sigma: float = 0.0
    ambiguous_candidates: bool = True
    corpus_source: str = "synthetic"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if self.kind == "spaced_line" and self.cols < 2:
            raise ValueError("spaced_line needs cols >= 2")
        if self.char_size <= 0:
            raise ValueError("char_size must be positive")
        if self.h_gap < 0 or self.v_gap < 0:
            raise ValueError("gaps must be non-negative")
        if not 0.0 <= self.label_noise_rate <= 1.0:
            raise ValueError("label_noise_rate must be in [0, 1]")
        if self.jitter_sigma < 0 or self.score_noise_sigma < 0:
            raise ValueError("noise sigmas must be non-negative")


@functools.lru_cache(maxsize=8)
def _corpus_index(source: str) -> tuple[tuple[str, ...], int, dict[int, list[str]]]:
    corpus = load_corpus(source)
    by_len: dict[int, list[str]] = {}
    for t in corpus:
        by_len.setdefault(len(t), []).append(t)
    return tuple(sorted(set("".join(corpus)))), max(by_len, default=0), by_len


def _row_texts(source: str, rows: int, cols: int, rng: SplitMix64) -> list[str]:
    _, longest, by_len = _corpus_index(source)
    if cols > longest:
        raise ValueError(f"cols={cols} exceeds the longest corpus line ({longest})")
    pool = by_len.get(cols)
    if not pool:
        pool = [t[:cols] for t in load_corpus(source) if len(t) >= cols]
    return [pool[rng.below(len(pool))] for _ in range(rows)]


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def gen_scene(cfg: SceneConfig, image_id: str | None = None) -> tuple[ImageRecord, DetectionBundle]:
    vocab = _corpus_index(cfg.corpus_source)[0]
    rng = SplitMix64(cfg.seed)
    image_id = image_id or f"scene_{cfg.seed & ((1 << 64) - 1):016x}"

    rows = cfg.rows if cfg.kind == "grid" else 1
    cols = cfg.cols
    cs = cfg.char_size
    h_gap = max(cfg.h_gap, 1.5 * cs) if cfg.kind == "spaced_line" else cfg.h_gap
    margin = cs
    texts = _row_texts(cfg.corpus_source, rows, cols, rng)

    gt_chars: list[GroundTruthChar] = []
    det_chars: list[CharDetection] = []
    cells: list[list[AxisAlignedBox]] = []
    for r in range(rows):
        row_boxes = []
        for c in range(cols):
            x0 = margin + c * (cs + h_gap)
            y0 = margin + r * (cs + cfg.v_gap)
            box = AxisAlignedBox(x0, y0, x0 + cs, y0 + cs)
            row_boxes.append(box)
            label = texts[r][c]
            gt_chars.append(GroundTruthChar(box, label, r))

            dx = rng.normal(0.0, cfg.jitter_sigma)
            dy = rng.normal(0.0, cfg.jitter_sigma)
            flip = rng.uniform() < cfg.label_noise_rate
            others = [v for v in vocab if v != label]
            alt = others[rng.below(len(others))] if others else label
            cscore = _clamp01(BASE_CHAR_SCORE + rng.normal(0.0, cfg.score_noise_sigma))
            det_box = AxisAlignedBox(box.x_min + dx, box.y_min + dy, box.x_max + dx, box.y_max + dy)
            det_chars.append(CharDetection(det_box, alt if flip else label, cscore))
        cells.append(row_boxes)

    row_polys = [bounding_polygon(rb) for rb in cells]
    gt_lines = tuple(GroundTruthLine(p, texts[r]) for r, p in enumerate(row_polys))

    cand_polys: list[ConvexPolygon] = list(row_polys)
    if cfg.ambiguous_candidates:
        if cfg.kind == "grid":
            cand_polys += [bounding_polygon([cells[r][c] for r in range(rows)]) for c in range(cols)]
            cand_polys.append(bounding_polygon([b for rb in cells for b in rb]))
        else:
            cand_polys += [b.to_polygon() for b in cells[0]]
            if cfg.kind == "spaced_line":
                cand_polys += [bounding_polygon(cells[0][c : c + 2]) for c in range(cols - 1)]
    # degenerate grids (one row or one column) repeat the same region
    cand_polys = list(dict.fromkeys(cand_polys))
    lines = tuple(
        LineCandidate(i, p, _clamp01(BASE_VISUAL_SCORE + rng.normal(0.0, cfg.score_noise_sigma)))
        for i, p in enumerate(cand_polys)
    )

    width = 2 * margin + cols * cs + (cols - 1) * h_gap
    height = 2 * margin + rows * cs + (rows - 1) * cfg.v_gap
    rec = ImageRecord(image_id, width, height, gt_lines, tuple(gt_chars))
    return rec, DetectionBundle(image_id, tuple(det_chars), lines)


def gen_dataset(n_scenes: int, template: SceneConfig, seed: int) -> list[tuple[ImageRecord, DetectionBundle]]:
    """Scene ``i`` uses seed ``derive_seed(seed, i)`` and id ``scene_{i:05d}``."""
    if n_scenes < 1:
        raise ValueError("n_scenes must be >= 1")
    return [
        gen_scene(replace(template, seed=derive_seed(seed, i)), image_id=f"scene_{i:05d}") for i in range(n_scenes)
    ]
