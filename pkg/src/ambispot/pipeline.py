"""Per-image spotting: filter candidates, recognize, re-score, select."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Sequence

from . import lm
from .geom import nms
from .ma import MatchConfig, recognize_line
from .model import DetectionBundle, LineCandidate, SpottedLine


@dataclass(frozen=True)
class PipelineConfig:
    thr_score: float = 0.01
    thr_nms: float = 0.9
    lam: float = 0.7
    final_nms: float = 0.1
    final_score_thr: float = 0.6
    thr_match: float = 0.3
    use_lm: bool = True

    def __post_init__(self):
        for f in fields(self):
            if f.name == "use_lm":
                continue
            v = getattr(self, f.name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{f.name} must be in [0, 1], got {v}")

    @property
    def effective_lambda(self) -> float:
        return self.lam if self.use_lm else 1.0


def filter_candidates(lines: Sequence[LineCandidate], cfg: PipelineConfig = PipelineConfig()) -> list[LineCandidate]:
    survivors = [ln for ln in lines if ln.visual_score >= cfg.thr_score]
    keep = nms([(ln.polygon, ln.visual_score) for ln in survivors], cfg.thr_nms)
    return [survivors[i] for i in keep]


def fuse_scores(s_vis: float, s_lin: float, lam: float) -> float:
    return lam * s_vis + (1.0 - lam) * s_lin


def spot_image(
    bundle: DetectionBundle, model: lm.NgramModel | None, cfg: PipelineConfig = PipelineConfig()
) -> list[SpottedLine]:
    if cfg.use_lm and model is None:
        raise ValueError("a language model is required when use_lm is set")
    lam = cfg.effective_lambda
    mcfg = MatchConfig(cfg.thr_match)
    scored = []
    for cand in filter_candidates(bundle.lines, cfg):
        text = recognize_line(cand.polygon, bundle.chars, mcfg)
        s_lin = lm.score(model, text) if cfg.use_lm else 0.0
        scored.append(SpottedLine(cand.polygon, text, cand.visual_score, s_lin, fuse_scores(cand.visual_score, s_lin, lam)))
    keep = nms([(s.polygon, s.final_score) for s in scored], cfg.final_nms)
    kept = [i for i in keep if scored[i].final_score >= cfg.final_score_thr]
    kept.sort(key=lambda i: (-scored[i].final_score, i))
    return [scored[i] for i in kept]
