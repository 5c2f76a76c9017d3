"""Command-line entry point.

Exit codes: 0 on success, 2 on bad input, 1 on internal error. Errors are
reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, fields
from pathlib import Path
from typing import Callable, Iterable, TypeVar

from . import formats, lm, metrics, synth
from .ambiguity import AmbiguityConfig, InsufficientAmbiguousImages, curate, dataset_stats
from .ma import MatchConfig, recognize_line
from .model import ValidationError
from .pipeline import PipelineConfig, filter_candidates, spot_image

T = TypeVar("T")
R = TypeVar("R")


class InputError(Exception):
    def __init__(self, message: str, **extra):
        self.extra = extra
        super().__init__(message)


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get("AMBISPOT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"AMBISPOT_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _pmap(fn: Callable[[T], R], items: Iterable[T], threads: int) -> list[R]:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    doc = formats.read_json(path)
    if not isinstance(doc, dict):
        raise InputError("config file must hold a JSON object", path=path)
    return doc


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, ensure_ascii=False, sort_keys=True) + "\n")


# lm-train


def cmd_lm_train(args) -> int:
    corpus = lm.read_corpus(args.corpus)
    if not corpus:
        raise InputError("corpus is empty", path=args.corpus)
    model = lm.fit(corpus, n=args.n, smoothing_k=args.smoothing_k, max_len=args.max_len)
    model.save(args.out)
    _emit({"lines": len(corpus), "vocab_size": model.vocab_size, "n": model.n, "a": model.a, "b": model.b})
    return 0


def cmd_lm_calibrate(args) -> int:
    model = lm.NgramModel.load(args.model)
    bundles = {b.image_id: b for b in formats.parse_detections(formats.read_json(args.detections))}
    records = {r.image_id: r for r in formats.parse_ground_truth(formats.read_json(args.gt))}
    _check_ids(set(bundles), set(records))
    pcfg = PipelineConfig()
    mcfg = MatchConfig(args.thr_match)
    scored = []
    for image_id in sorted(bundles):
        cands = filter_candidates(bundles[image_id].lines, pcfg)
        labels = lm.label_candidates(cands, records[image_id].gt_lines, args.iou_pos)
        for cand, lab in zip(cands, labels):
            scored.append((recognize_line(cand.polygon, bundles[image_id].chars, mcfg), lab))
    a, b = lm.fit_calibration(model, scored)
    calibrated = model.with_calibration(a, b)
    calibrated.save(args.out)
    _emit({"a": a, "b": b, "examples": len(scored), "loss": lm.calibration_loss(calibrated, scored)})
    return 0


# spot


_PIPELINE_KEYS = {"lambda": "lam"}


def pipeline_config(args) -> PipelineConfig:
    names = {f.name for f in fields(PipelineConfig)}
    values = {}
    for k, v in _load_config(args.config).items():
        k = _PIPELINE_KEYS.get(k, k)
        if k not in names:
            raise InputError(f"unknown config field {k!r}", path=args.config)
        values[k] = v
    for k in names:
        flag = getattr(args, k, None)
        if flag is not None:
            values[k] = flag
    if args.no_lm:
        values["use_lm"] = False
    try:
        return PipelineConfig(**values)
    except (TypeError, ValueError) as e:
        raise InputError(str(e)) from None


def cmd_spot(args) -> int:
    cfg = pipeline_config(args)
    model = None
    if cfg.use_lm:
        if not args.model:
            raise InputError("--model is required unless --no-lm is given")
        model = lm.NgramModel.load(args.model)
    bundles = formats.parse_detections(formats.read_json(args.detections))
    results = _pmap(lambda b: spot_image(b, model, cfg), bundles, _threads(args))
    formats.write_json(args.out, formats.spotted_doc({b.image_id: r for b, r in zip(bundles, results)}))
    return 0


# eval


def _check_ids(got: set, want: set) -> None:
    if got != want:
        raise InputError(
            "image_id sets differ",
            only_in_first=sorted(got - want),
            only_in_second=sorted(want - got),
        )


def cmd_eval(args) -> int:
    spotted = formats.parse_spotted(formats.read_json(args.spotted))
    records = {r.image_id: r for r in formats.parse_ground_truth(formats.read_json(args.gt))}
    _check_ids(set(spotted), set(records))
    ids = sorted(records)
    reports = _pmap(
        lambda i: metrics.evaluate_image(spotted[i], records[i].gt_lines, args.iou), ids, _threads(args)
    )
    per_image = dict(zip(ids, reports))
    total = metrics.aggregate(reports)
    doc = {"global": total.to_dict(), "images": {i: r.to_dict() for i, r in per_image.items()}}
    if args.out:
        formats.write_json(args.out, doc)
    if args.table:
        print(metrics.format_table(total, per_image if args.per_image else None))
    elif not args.out:
        _emit(doc)
    return 0


# curate


def cmd_curate(args) -> int:
    acfg = AmbiguityConfig(**_load_config(args.config))
    records = formats.parse_ground_truth(formats.read_json(args.gt))
    ids = curate(records, args.n, args.seed, acfg)
    chosen = set(ids)
    full = dataset_stats(records, acfg)
    report = {
        "n": args.n,
        "seed": args.seed,
        "ambiguous_images": len(full.ambiguous_images),
        "dataset": full.to_dict(),
        "curated": dataset_stats([r for r in records if r.image_id in chosen], acfg).to_dict(),
    }
    Path(args.out_ids).write_text("".join(f"{i}\n" for i in ids), encoding="utf-8")
    formats.write_json(args.out_stats, report)
    return 0


# gen


def scene_template(path: str | None) -> synth.SceneConfig:
    doc = _load_config(path)
    doc.pop("seed", None)
    try:
        return synth.SceneConfig(**doc)
    except (TypeError, ValueError) as e:
        raise InputError(str(e), path=path) from None


def cmd_gen(args) -> int:
    template = scene_template(args.template)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = synth.gen_dataset(args.n, template, args.seed)
    formats.write_json(out / "gt.json", formats.ground_truth_doc(r for r, _ in data))
    formats.write_json(out / "detections.json", formats.detections_doc(b for _, b in data))
    formats.write_json(out / "template.json", {**asdict(template), "seed": args.seed, "n": args.n})
    return 0


def cmd_gen_corpus(args) -> int:
    lines = synth.synthetic_corpus(args.lines, args.seed)
    Path(args.out).write_text("".join(t + "\n" for t in lines), encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ambispot", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("lm-train", help="fit a character n-gram model on a corpus")
    s.add_argument("corpus")
    s.add_argument("--out", required=True)
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--smoothing-k", type=float, default=0.1)
    s.add_argument("--max-len", type=int, default=16)
    s.set_defaults(func=cmd_lm_train)

    s = sub.add_parser("lm-calibrate", help="fit the logistic score mapping on labelled candidates")
    s.add_argument("model")
    s.add_argument("--detections", required=True)
    s.add_argument("--gt", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--iou-pos", type=float, default=0.8)
    s.add_argument("--thr-match", type=float, default=0.3)
    s.set_defaults(func=cmd_lm_calibrate)

    s = sub.add_parser("spot", help="run the spotting pipeline on detector output")
    s.add_argument("detections")
    s.add_argument("--model")
    s.add_argument("--out", required=True)
    s.add_argument("--config")
    s.add_argument("--no-lm", action="store_true", help="ignore the language model (lambda = 1)")
    s.add_argument("--thr-score", dest="thr_score", type=float)
    s.add_argument("--thr-nms", dest="thr_nms", type=float)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--final-nms", dest="final_nms", type=float)
    s.add_argument("--final-score-thr", dest="final_score_thr", type=float)
    s.add_argument("--thr-match", dest="thr_match", type=float)
    s.add_argument("--threads", type=int)
    s.set_defaults(func=cmd_spot)

    s = sub.add_parser("eval", help="score spotted lines against ground truth")
    s.add_argument("spotted")
    s.add_argument("gt")
    s.add_argument("--out")
    s.add_argument("--iou", type=float, default=0.5)
    s.add_argument("--table", action="store_true", help="print a plain-text table")
    s.add_argument("--per-image", action="store_true", help="include per-image rows in the table")
    s.add_argument("--threads", type=int)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("curate", help="sample ambiguous images and report line statistics")
    s.add_argument("gt")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--config")
    s.add_argument("--out-ids", required=True)
    s.add_argument("--out-stats", required=True)
    s.set_defaults(func=cmd_curate)

    s = sub.add_parser("gen", help="generate a synthetic dataset")
    s.add_argument("--template")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("gen-corpus", help="write the built-in pseudo-language corpus")
    s.add_argument("--out", required=True)
    s.add_argument("--lines", type=int, default=12000)
    s.add_argument("--seed", type=int, default=2020)
    s.set_defaults(func=cmd_gen_corpus)
    return p


def _fail(code: int, payload: dict) -> int:
    sys.stderr.write(json.dumps(payload, ensure_ascii=False) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as e:
        return _fail(2, e.to_dict())
    except InsufficientAmbiguousImages as e:
        payload = {"error": "insufficient-ambiguous-images", "message": str(e)}
        return _fail(2, {**payload, "available": e.available, "requested": e.requested})
    except InputError as e:
        return _fail(2, {"error": "input", "message": str(e), **e.extra})
    except (OSError, json.JSONDecodeError, ValueError) as e:
        return _fail(2, {"error": type(e).__name__, "message": str(e)})
    except Exception as e:  # noqa: BLE001
        return _fail(1, {"error": "internal", "type": type(e).__name__, "message": str(e)})


if __name__ == "__main__":
    sys.exit(main())
