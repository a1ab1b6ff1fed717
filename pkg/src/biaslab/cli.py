"""Command-line front end.

Subcommands: ``run`` (scenario execution), ``catalog`` (built-in ids),
``fit`` (one model on a CSV file), ``mc`` (a Monte Carlo template).
Exit codes: 0 success, 2 validation, 3 runtime analysis failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys

from .catalog import catalog_config, catalog_ids
from .config import (
    ScenarioConfig,
    artifact_json,
    load_config,
    parse_config,
    run_scenario,
)
from .data import read_csv
from .errors import BiaslabError, ValidationError
from .mc import McTemplate, run_mc, summarize_series, write_mc_csv
from .regress import FitResult, Formula, fit

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ANALYSIS = 3
EXIT_IO = 4


def _sig6(v: float) -> str:
    if v != v:
        return "nan"
    return f"{v:.6g}"


def format_fit_table(name: str, result: FitResult) -> str:
    lines = [
        f"== {name}: {result.formula.text()} [{result.family}] "
        f"n={result.n_used} dropped={result.n_dropped}"
        + (f" R2={_sig6(result.r_squared)}" if result.r_squared is not None else "")
        + ("" if result.converged else "  (NOT CONVERGED)")
    ]
    header = f"{'term':<16}{'b':>14}{'SE':>14}{'stat':>12}{'p':>12}{'beta':>12}"
    lines.append(header)
    for i, term in enumerate(result.terms):
        lines.append(
            f"{term:<16}{_sig6(result.b[i]):>14}{_sig6(result.se[i]):>14}"
            f"{_sig6(result.stat[i]):>12}{_sig6(result.p[i]):>12}{_sig6(result.beta[i]):>12}"
        )
    for j, cname in enumerate(result.cutpoint_names):
        lines.append(
            f"{cname:<16}{_sig6(result.cutpoints[j]):>14}{_sig6(result.cutpoint_se[j]):>14}"
        )
    return "\n".join(lines)


def _print_artifacts(run) -> None:
    for name, artifact in run.artifacts.items():
        if isinstance(artifact, FitResult):
            print(format_fit_table(name, artifact))
        else:
            print(f"== {name}")
            print(json.dumps(artifact_json(artifact), indent=2, default=str))
    for name, message in run.analysis_errors.items():
        print(f"== {name}: ERROR {message}", file=sys.stderr)


def _load_scenario(args) -> ScenarioConfig:
    if args.catalog and args.config:
        raise ValidationError("pass --config or --catalog, not both")
    if args.catalog:
        return parse_config(catalog_config(args.catalog))
    if args.config:
        return load_config(args.config)
    raise ValidationError("one of --config PATH or --catalog ID is required")


def cmd_run(args) -> int:
    cfg = _load_scenario(args)
    if args.reps is not None:
        cfg = cfg.with_reps(args.reps)
    run = run_scenario(
        cfg,
        out_dir=args.out,
        seed=args.seed,
        workers=args.threads,
        default_format=args.format,
    )
    _print_artifacts(run)
    if run.mc_result is not None:
        kept = len(run.mc_result)
        failed = len(run.mc_result.errors)
        print(f"== mc: {kept} replicates recorded ({failed} with errors), "
              f"template {run.mc_result.template_hash}")
    for path in run.files:
        print(f"wrote {path}")
    if cfg.analyses and run.analysis_errors and not run.artifacts:
        return EXIT_ANALYSIS
    return EXIT_OK


def cmd_catalog(_args) -> int:
    for ident in catalog_ids():
        print(ident)
    return EXIT_OK


def cmd_fit(args) -> int:
    data = read_csv(args.csv)
    formula = Formula.parse(args.formula)
    result = fit(data, formula, family=args.family)
    print(format_fit_table("fit", result))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(result.to_json_dict(), fh, indent=2)
            fh.write("\n")
        print(f"wrote {args.json}")
    return EXIT_OK


def cmd_mc(args) -> int:
    cfg = _load_scenario(args)
    if cfg.generator_kind != "mc":
        raise ValidationError(f"scenario {cfg.id!r} is not an mc template")
    payload = dict(cfg.generator)
    payload.setdefault("seed", args.seed if args.seed is not None else cfg.seed)
    if payload.get("seed") is None:
        raise ValidationError("mc template needs a seed (config seed or --seed)")
    if args.seed is not None:
        payload["seed"] = args.seed
    if args.reps is not None:
        payload["reps"] = args.reps
    template = McTemplate.from_json_dict(payload)
    result = run_mc(template, workers=args.threads)
    for series in result.series_names:
        try:
            s = summarize_series(result, series)
        except BiaslabError:
            continue
        print(
            f"{series:<12} min={_sig6(s.min)} q1={_sig6(s.q1)} median={_sig6(s.median)} "
            f"mean={_sig6(s.mean)} q3={_sig6(s.q3)} max={_sig6(s.max)}"
        )
    if args.out:
        import os

        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{cfg.id}.csv")
        write_mc_csv(result, path)
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="biaslab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="scenario config JSON path")
        p.add_argument("--catalog", help="built-in scenario id")
        p.add_argument("--seed", type=int, default=None, help="master seed (64-bit unsigned)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="json",
                       help="default format for declared outputs")
        p.add_argument("--threads", type=int, default=1, help="worker processes for MC loops")
        p.add_argument("--reps", type=int, default=None, help="override replicate count")

    p_run = sub.add_parser("run", help="run a scenario config")
    add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cat = sub.add_parser("catalog", help="list built-in scenario ids")
    p_cat.set_defaults(func=cmd_catalog)

    p_fit = sub.add_parser("fit", help="fit one model on a CSV file")
    p_fit.add_argument("csv", help="CSV path (header row; empty field = missing)")
    p_fit.add_argument("--formula", required=True, help="e.g. 'Y ~ X + Z + X:Z + X^2'")
    p_fit.add_argument("--family", default="gaussian",
                       choices=("gaussian", "binomial", "ordered"))
    p_fit.add_argument("--json", default=None, help="also write the fit as JSON here")
    p_fit.set_defaults(func=cmd_fit)

    p_mc = sub.add_parser("mc", help="run a Monte Carlo template")
    add_common(p_mc)
    p_mc.set_defaults(func=cmd_mc)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BiaslabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
