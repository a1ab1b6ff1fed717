#!/usr/bin/env python3
"""Confounder/collider quadrant loops: sign direction of the biased slope.

For each sign quadrant of the confounder's (or collider's) effects on x and
y, runs the randomized-specification loop and reports how often the biased
slope carries the predicted sign (positive for same-sign confounding,
negative for same-sign collider adjustment, and the reverse for mixed
signs).
"""

import argparse

import numpy as np

from biaslab.catalog import collider_template, confounder_template
from biaslab.mc import McTemplate, run_mc, summarize_series


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1992)
    ap.add_argument("--n", type=int, default=10_000, help="rows per replicate")
    ap.add_argument("--effect-floor", type=float, default=1.0,
                    help="minimum |effect coefficient| (templates draw from 1..100)")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    print(f"{'template':<22}{'predicted sign':>15}{'match rate':>12}{'median slope':>14}")
    for sx, sy in [(1, 1), (1, -1), (-1, 1), (-1, -1)]:
        tpl = McTemplate.from_json_dict(
            confounder_template(sx, sy, n=args.n, reps=args.reps, seed=args.seed,
                                effect_lo=args.effect_floor)
        )
        res = run_mc(tpl, workers=args.threads)
        bxy = res.series("bxy")
        want = 1 if sx * sy > 0 else -1
        rate = float(np.mean(np.sign(bxy) == want))
        med = summarize_series(res, "bxy").median
        print(f"confounder ({sx:+d},{sy:+d})    {want:>+15d}{rate:>12.4f}{med:>14.4f}")

        tpl = McTemplate.from_json_dict(
            collider_template(sx, sy, n=args.n, reps=args.reps, seed=args.seed,
                              effect_lo=args.effect_floor)
        )
        res = run_mc(tpl, workers=args.threads)
        adj = res.series("bxy_adj")
        want = -1 if sx * sy > 0 else 1
        rate = float(np.mean(np.sign(adj) == want))
        med = summarize_series(res, "bxy_adj").median
        print(f"collider   ({sx:+d},{sy:+d})    {want:>+15d}{rate:>12.4f}{med:>14.4f}")


if __name__ == "__main__":
    main()
