"""Linguistic scoring of transcripts.

A character n-gram model with additive smoothing gives the mean per-symbol
log-probability of a transcript; a two-parameter logistic maps that onto a
naturalness score in [0, 1]. Candidates are labelled for calibration by
their IoU with ground-truth lines.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .geom import iou
from .model import GroundTruthLine, LineCandidate
from .rng import SplitMix64

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
MARKERS = (BOS, EOS, UNK)
FORMAT_VERSION = 1

POSITIVE = "positive"
NEGATIVE = "negative"

# fixed seed for the shuffled-corpus pass that sets the default midpoint
_SHUFFLE_SEED = 0


@dataclass
class NgramModel:
    n: int = 3
    smoothing_k: float = 0.1
    max_len: int = 16
    counts: dict[tuple[str, ...], dict[str, int]] = field(default_factory=dict)
    vocab: tuple[str, ...] = ()
    a: float = 4.0
    b: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.smoothing_k > 0:
            raise ValueError("smoothing_k must be > 0")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        self._totals = {ctx: sum(nxt.values()) for ctx, nxt in self.counts.items()}
        self._vocab_set = frozenset(self.vocab)

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    @property
    def calibration(self) -> tuple[float, float]:
        return self.a, self.b

    def with_calibration(self, a: float, b: float) -> "NgramModel":
        return NgramModel(self.n, self.smoothing_k, self.max_len, self.counts, self.vocab, a, b)

    def prob(self, ctx: tuple[str, ...], nxt: str) -> float:
        c = self.counts.get(ctx)
        count = c.get(nxt, 0) if c else 0
        total = self._totals.get(ctx, 0)
        return (count + self.smoothing_k) / (total + self.smoothing_k * self.vocab_size)

    def symbols(self, t: str) -> list[str]:
        return [ch if ch in self._vocab_set else UNK for ch in t[: self.max_len]]

    # persistence

    def to_dict(self) -> dict:
        rows = [
            {"ctx": list(ctx), "next": nxt, "count": cnt}
            for ctx in sorted(self.counts)
            for nxt, cnt in sorted(self.counts[ctx].items())
        ]
        return {
            "version": FORMAT_VERSION,
            "n": self.n,
            "smoothing_k": self.smoothing_k,
            "max_len": self.max_len,
            "calibration": {"a": self.a, "b": self.b},
            "vocab": list(self.vocab),
            "counts": rows,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NgramModel":
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model version {d.get('version')!r}")
        counts: dict[tuple[str, ...], dict[str, int]] = defaultdict(dict)
        for row in d["counts"]:
            counts[tuple(row["ctx"])][row["next"]] = int(row["count"])
        return cls(
            n=int(d["n"]),
            smoothing_k=float(d["smoothing_k"]),
            max_len=int(d["max_len"]),
            counts=dict(counts),
            vocab=tuple(d["vocab"]),
            a=float(d["calibration"]["a"]),
            b=float(d["calibration"]["b"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":")) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NgramModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fit(corpus: Sequence[str], n: int = 3, smoothing_k: float = 0.1, max_len: int = 16) -> NgramModel:
    """Count n-grams over ``corpus`` and set default calibration.

    The default logistic midpoint sits halfway between the mean score of the
    corpus lines and the mean score of the same lines with characters shuffled.
    """
    corpus = [t for t in corpus]
    if not corpus:
        raise ValueError("corpus is empty")
    if n < 1:
        raise ValueError("n must be >= 1")
    counts: dict[tuple[str, ...], Counter] = defaultdict(Counter)
    seen: set[str] = set()
    for t in corpus:
        seen.update(t)
        seq = [BOS] * (n - 1) + list(t) + [EOS]
        for i in range(n - 1, len(seq)):
            counts[tuple(seq[i - n + 1 : i])][seq[i]] += 1
    vocab = tuple(sorted(seen)) + MARKERS
    m = NgramModel(n, smoothing_k, max_len, {ctx: dict(c) for ctx, c in counts.items()}, vocab)

    rng = SplitMix64(_SHUFFLE_SEED)
    natural, shuffled = [], []
    for t in corpus:
        lp = avg_logprob(m, t)
        if lp is None:
            continue
        chars = list(t)
        rng.shuffle(chars)
        natural.append(lp)
        shuffled.append(avg_logprob(m, "".join(chars)))
    if natural:
        m.b = 0.5 * (math.fsum(natural) / len(natural) + math.fsum(shuffled) / len(shuffled))
    return m


def avg_logprob(m: NgramModel, t: str) -> float | None:
    """Mean natural-log probability per event, end marker included.

    Returns ``None`` for an empty transcript. Only the first ``max_len``
    characters are scored.
    """
    syms = m.symbols(t)
    if not syms:
        return None
    seq = [BOS] * (m.n - 1) + syms + [EOS]
    n = m.n
    total = 0.0
    for i in range(n - 1, len(seq)):
        total += math.log(m.prob(tuple(seq[i - n + 1 : i]), seq[i]))
    return total / (len(seq) - n + 1)


def _logistic(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def score(m: NgramModel, t: str) -> float:
    lp = avg_logprob(m, t)
    if lp is None:
        return 0.0
    return _logistic(m.a * (lp - m.b))


@dataclass(frozen=True)
class CandidateLabel:
    candidate_id: int
    label: str

    @property
    def positive(self) -> bool:
        return self.label == POSITIVE


def label_candidates(
    cands: Iterable[LineCandidate], gts: Sequence[GroundTruthLine], iou_pos: float = 0.8
) -> list[CandidateLabel]:
    if not 0.0 < iou_pos <= 1.0:
        raise ValueError(f"iou_pos must be in (0, 1], got {iou_pos}")
    cared = [g.polygon for g in gts if not g.ignore]
    out = []
    for c in cands:
        best = max((iou(c.polygon, g) for g in cared), default=0.0)
        out.append(CandidateLabel(c.id, POSITIVE if best > iou_pos else NEGATIVE))
    return out


def _cross_entropy(lp: np.ndarray, y: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # a, b broadcast against each other; result has their broadcast shape
    z = a[..., None] * (lp - b[..., None])
    loss = y * np.logaddexp(0.0, -z) + (1.0 - y) * np.logaddexp(0.0, z)
    return loss.mean(axis=-1)


A_RANGE = (0.1, 20.0)


def fit_calibration(
    m: NgramModel, scored: Sequence[tuple[str, CandidateLabel | bool]], grid: int = 41, refine: int = 2
) -> tuple[float, float]:
    """Logistic (a, b) minimizing cross-entropy of ``score`` against labels.

    Coarse grid over a in [0.1, 20] and b over the observed log-prob range,
    then ``refine`` zoomed grids around the incumbent. Empty transcripts are
    skipped since their score does not depend on (a, b).
    """
    lps, ys = [], []
    for t, lab in scored:
        lp = avg_logprob(m, t)
        if lp is None:
            continue
        lps.append(lp)
        ys.append(float(lab.positive if isinstance(lab, CandidateLabel) else bool(lab)))
    y = np.asarray(ys)
    if len(y) == 0 or y.min() == y.max():
        raise ValueError("calibration needs both positive and negative examples")
    lp = np.asarray(lps)

    a_lo, a_hi = A_RANGE
    b_lo, b_hi = float(lp.min()), float(lp.max())
    best = (math.inf, a_lo, b_lo)
    for _ in range(refine + 1):
        a_vals = np.linspace(a_lo, a_hi, grid)
        b_vals = np.linspace(b_lo, b_hi, grid)
        aa, bb = np.meshgrid(a_vals, b_vals, indexing="ij")
        ce = _cross_entropy(lp, y, aa, bb)
        i, j = np.unravel_index(int(np.argmin(ce)), ce.shape)
        if ce[i, j] < best[0]:
            best = (float(ce[i, j]), float(a_vals[i]), float(b_vals[j]))
        da = (a_hi - a_lo) / (grid - 1)
        db = (b_hi - b_lo) / (grid - 1)
        a_lo, a_hi = max(A_RANGE[0], best[1] - da), min(A_RANGE[1], best[1] + da)
        b_lo, b_hi = best[2] - db, best[2] + db
    return best[1], best[2]


def calibration_loss(m: NgramModel, scored: Sequence[tuple[str, CandidateLabel | bool]]) -> float:
    """Mean cross-entropy of ``score(m, t)`` against the labels."""
    eps = 1e-12
    total = 0.0
    for t, lab in scored:
        s = min(1 - eps, max(eps, score(m, t)))
        pos = lab.positive if isinstance(lab, CandidateLabel) else bool(lab)
        total -= math.log(s) if pos else math.log(1 - s)
    return total / len(scored)


def read_corpus(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\r\n") for line in f if line.strip()]
