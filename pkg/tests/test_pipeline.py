from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ambispot import lm, synth
from ambispot.geom import AxisAlignedBox, ConvexPolygon, nms
from ambispot.model import CharDetection, DetectionBundle, LineCandidate
from ambispot.pipeline import PipelineConfig, filter_candidates, fuse_scores, spot_image
from oracles import nms_reference

UNIT = ConvexPolygon.rect(0, 0, 1, 1)


def test_filter_drops_low_scores():
    lines = [LineCandidate(i, ConvexPolygon.rect(10 * i, 0, 10 * i + 5, 1), 0.0) for i in range(3)]
    assert filter_candidates(lines) == []


def test_filter_exact_duplicate_suppressed_by_loose_nms():
    lines = [LineCandidate(0, UNIT, 0.8), LineCandidate(1, UNIT, 0.9)]
    assert [c.id for c in filter_candidates(lines, PipelineConfig(thr_nms=0.9))] == [1]


def test_filter_matches_reference_200():
    rng = np.random.default_rng(21)
    xy = rng.uniform(0, 200, (200, 2))
    bx = np.c_[xy, xy + rng.uniform(3, 40, (200, 2))]
    scores = rng.uniform(0, 1, 200)
    scores[:20] = 0.005
    lines = [LineCandidate(i, ConvexPolygon.rect(*b), float(s)) for i, (b, s) in enumerate(zip(bx, scores))]
    cfg = PipelineConfig(thr_nms=0.5)
    keep = [i for i in range(200) if scores[i] >= cfg.thr_score]
    ref = [keep[j] for j in nms_reference(bx[keep], scores[keep].tolist(), cfg.thr_nms)]
    assert [c.id for c in filter_candidates(lines, cfg)] == ref


def test_fuse_examples():
    assert fuse_scores(1.0, 1.0, 0.3) == 1.0
    assert fuse_scores(0.8, 0.5, 0.7) == pytest.approx(0.71, abs=1e-12)
    for s_vis in (0.0, 0.123456789, 0.85, 1.0):
        assert fuse_scores(s_vis, 0.37, 1.0) == s_vis


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_fuse_linear_in_visual_score(v1, v2, s_lin, lam):
    lo, hi = sorted((v1, v2))
    assert fuse_scores(lo, s_lin, lam) <= fuse_scores(hi, s_lin, lam)


def test_config_validated():
    with pytest.raises(ValueError):
        PipelineConfig(lam=1.5)


def test_lm_required():
    with pytest.raises(ValueError):
        spot_image(DetectionBundle("x"), None, PipelineConfig())


def test_empty_bundle(model):
    assert spot_image(DetectionBundle("x"), model) == []


def test_single_line(model, corpus):
    word = next(t for t in corpus if len(t) == 4)
    chars = tuple(CharDetection(AxisAlignedBox(10 * i, 0, 10 * i + 8, 8), ch, 0.9) for i, ch in enumerate(word))
    bundle = DetectionBundle("x", chars, (LineCandidate(0, ConvexPolygon.rect(0, 0, 38, 8), 0.95),))
    out = spot_image(bundle, model)
    assert len(out) == 1
    assert out[0].transcript == word
    assert out[0].final_score == pytest.approx(0.7 * 0.95 + 0.3 * out[0].linguistic_score)


def test_ambiguous_grid_rows_selected(model):
    cfg = synth.SceneConfig(rows=2, cols=3, score_noise_sigma=0.02)
    for seed in range(20):
        rec, bundle = synth.gen_scene(replace(cfg, seed=seed))
        vis = [c.visual_score for c in bundle.lines]
        assert max(vis) - min(vis) <= 0.1
        out = spot_image(bundle, model)
        assert sorted(s.transcript for s in out) == sorted(g.transcript for g in rec.gt_lines)


def _dataset(n=40, seed=3):
    tmpl = synth.SceneConfig(score_noise_sigma=0.05, label_noise_rate=0.05, jitter_sigma=1.0)
    return synth.gen_dataset(n, tmpl, seed)


def _key(out):
    return [(s.polygon, s.transcript, s.final_score) for s in out]


def test_no_lm_independent_of_model(model, corpus):
    other = lm.fit(corpus[:50], n=1)
    cfg = PipelineConfig(use_lm=False)
    for _, b in _dataset():
        assert _key(spot_image(b, model, cfg)) == _key(spot_image(b, other, cfg)) == _key(spot_image(b, None, cfg))


def test_no_lm_equals_lambda_one(model):
    for _, b in _dataset():
        a = spot_image(b, None, PipelineConfig(use_lm=False))
        c = spot_image(b, model, PipelineConfig(lam=1.0))
        assert _key(a) == _key(c)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1))
def test_raising_final_threshold_gives_subset(model, t1, t2):
    lo, hi = sorted((t1, t2))
    for _, b in _dataset(10):
        strict = _key(spot_image(b, model, PipelineConfig(final_score_thr=hi)))
        loose = _key(spot_image(b, model, PipelineConfig(final_score_thr=lo)))
        assert all(x in loose for x in strict)


def test_idempotent(model):
    for _, b in _dataset():
        out = spot_image(b, model)
        again_in = replace(b, lines=tuple(LineCandidate(i, s.polygon, s.final_score) for i, s in enumerate(out)))
        again = spot_image(again_in, model, PipelineConfig(lam=1.0))
        assert _key(again) == _key(out)


def test_threshold_before_or_after_nms_equivalent(model):
    cfg = PipelineConfig()
    for _, b in _dataset():
        items = [(c.polygon, c.visual_score) for c in b.lines]
        after = [i for i in nms(items, cfg.final_nms) if items[i][1] >= cfg.final_score_thr]
        first = [i for i, it in enumerate(items) if it[1] >= cfg.final_score_thr]
        before = [first[j] for j in nms([items[i] for i in first], cfg.final_nms)]
        assert after == before


def test_output_sorted_by_final_score(model):
    for _, b in _dataset():
        scores = [s.final_score for s in spot_image(b, model, PipelineConfig(final_nms=1.0))]
        assert scores == sorted(scores, reverse=True)
