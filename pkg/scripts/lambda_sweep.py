"""F-measure and 1-NED as the fusion weight moves from 0 to 1."""

from __future__ import annotations

import argparse

from ambispot import lm, metrics, synth
from ambispot.pipeline import PipelineConfig, spot_image


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--steps", type=int, default=11)
    args = p.parse_args()

    data = synth.gen_dataset(args.n, synth.SceneConfig(score_noise_sigma=0.05, label_noise_rate=0.05), args.seed)
    model = lm.fit(list(synth.load_corpus("synthetic")))
    print(f"{'lambda':>6} {'F':>7} {'1-NED':>7}")
    for k in range(args.steps):
        lam = k / (args.steps - 1)
        cfg = PipelineConfig(lam=lam)
        rep = metrics.aggregate(metrics.evaluate_image(spot_image(b, model, cfg), r.gt_lines) for r, b in data)
        print(f"{lam:>6.2f} {100 * rep.f_measure:>7.2f} {100 * rep.one_minus_ned:>7.2f}")


if __name__ == "__main__":
    main()
