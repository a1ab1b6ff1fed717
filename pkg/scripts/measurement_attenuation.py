#!/usr/bin/env python3
"""Measurement attenuation tables for the response and predictor sides.

Fits the family-appropriate model per measurement decision and prints the
Spearman correlation, slope, test statistic, and Wald chi-square so the
information loss from recodes and transformations is visible in one table.
"""

import argparse

from biaslab.config import parse_config, run_scenario
from biaslab.catalog import entry13_response_measurement, entry14_predictor_measurement


def show(cfg_dict: dict, seed: int | None) -> None:
    cfg = parse_config(cfg_dict)
    run = run_scenario(cfg, seed=seed)
    table = run.artifacts["table"]
    print(f"\n== {cfg.id}")
    print(f"{'variant':<18}{'family':<10}{'spearman':>9}{'slope':>12}{'SE':>10}"
          f"{'stat':>9}{'chisq':>10}{'n':>7}")
    for r in table.rows:
        if r.error:
            print(f"{r.label:<18}{'-':<10}  error: {r.error}")
            continue
        print(f"{r.label:<18}{r.family:<10}{r.spearman:>9.3f}{r.slope:>12.5f}"
              f"{r.se:>10.5f}{r.stat:>9.2f}{r.chisq:>10.2f}{r.n_used:>7}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=None, help="override the built-in seed")
    args = ap.parse_args()
    show(entry13_response_measurement(), args.seed)
    show(entry14_predictor_measurement(), args.seed)


if __name__ == "__main__":
    main()
