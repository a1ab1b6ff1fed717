"""Scenario configs: JSON ingestion, validation, execution, output emission.

A scenario couples one data-generation stage (``scm`` | ``corr`` |
``population`` | ``mc``) with an ordered list of analyses and a list of
declared file outputs.  Reproducibility is keyed entirely by the scenario
seed: generation consumes ``derive_substream(seed, 0)``, analysis k that
needs randomness consumes ``derive_substream(seed, k + 1)``, and embedded
sampling/MC plans default their master seed to ``seed + 1`` / ``seed``.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, replace
from typing import Any, Mapping

import numpy as np

from . import mc as mc_mod
from .causal import (
    RowFilter,
    compare_adjustments,
    iv_wald,
    mediation,
    moderated_fit,
    subgroup_effect,
)
from .data import (
    BalanceReport,
    Column,
    Dataset,
    balance_diff,
    summarize,
    write_csv,
)
from .errors import BiaslabError, ValidationError
from .measure import (
    AttenuationReport,
    AttenuationVariant,
    apply_rules,
    attenuation_report,
    rule_from_json,
)
from .regress import CollinearityReport, FitResult, Formula, collinearity_diagnostics, fit, predict
from .rng import derive_substream
from .scm import CorrTarget, ScmSpec, block_randomize, evaluate_scm, inject_outlier, mvn_exact

_GEN_KINDS = ("scm", "corr", "population", "mc")
_ANALYSIS_KINDS = (
    "fit",
    "collinearity",
    "compare_adjustments",
    "iv",
    "mediation",
    "moderated_fit",
    "subgroup",
    "balance",
    "block_balance",
    "attenuation",
    "summary",
    "correlation",
    "outlier_fit",
    "recode",
)


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated scenario: id, seed, one generator, analyses, outputs."""

    id: str
    seed: int | None
    generator_kind: str
    generator: dict
    analyses: tuple[dict, ...]
    outputs: tuple[dict, ...]

    def to_json_dict(self) -> dict:
        d: dict = {"id": self.id}
        if self.seed is not None:
            d["seed"] = self.seed
        d[self.generator_kind] = self.generator
        d["analyses"] = list(self.analyses)
        d["outputs"] = list(self.outputs)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=seed)

    def with_reps(self, reps: int) -> "ScenarioConfig":
        gen = json.loads(json.dumps(self.generator))
        if self.generator_kind == "mc":
            gen["reps"] = reps
        elif self.generator_kind == "population":
            gen["sampling"]["reps"] = reps
        return replace(self, generator=gen)


def _fail(path: str, message: str) -> ValidationError:
    return ValidationError(f"{path}: {message}")


def _column_names(kind: str, gen: Mapping) -> list[str]:
    if kind == "scm":
        spec = ScmSpec.from_json_dict(gen)
        return [s.name for s in spec.sources] + [e.target for e in spec.equations]
    if kind == "corr":
        return list(gen["names"])
    if kind == "population":
        spec = ScmSpec.from_json_dict(gen["scm"])
        return [s.name for s in spec.sources] + [e.target for e in spec.equations]
    return []  # mc scenarios analyse series, not columns


def parse_config(doc: Mapping | str) -> ScenarioConfig:
    """Validate a scenario JSON document; errors carry field paths."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, Mapping):
        raise ValidationError("config must be a JSON object")
    ident = doc.get("id")
    if not isinstance(ident, str) or not ident:
        raise _fail("id", "required non-empty string")
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or not (0 <= seed < 2**64)):
        raise _fail("seed", f"must be a decimal 64-bit unsigned integer, got {seed!r}")
    gens = [k for k in _GEN_KINDS if k in doc]
    if len(gens) != 1:
        raise _fail("config", f"exactly one of {_GEN_KINDS} required, found {gens}")
    kind = gens[0]
    gen = doc[kind]
    if not isinstance(gen, Mapping):
        raise _fail(kind, "must be an object")

    # structural validation of the generator payload
    if kind == "scm":
        spec = ScmSpec.from_json_dict(gen)
        if not spec.is_concrete():
            raise _fail("scm", f"placeholders {sorted(spec.placeholders())} are only valid in mc templates")
    elif kind == "corr":
        for req in ("names", "corr", "n"):
            if req not in gen:
                raise _fail(f"corr.{req}", "required")
        CorrTarget(
            names=tuple(gen["names"]),
            corr=np.asarray(gen["corr"], dtype=float),
            means=np.asarray(gen["means"], dtype=float) if "means" in gen else None,
            sds=np.asarray(gen["sds"], dtype=float) if "sds" in gen else None,
            empirical_exact=bool(gen.get("empirical_exact", True)),
        )
    elif kind == "population":
        if "scm" not in gen or "sampling" not in gen:
            raise _fail("population", "needs 'scm' and 'sampling'")
        ScmSpec.from_json_dict(gen["scm"])
        samp = gen["sampling"]
        for req in ("k", "reps", "analysis"):
            if req not in samp:
                raise _fail(f"population.sampling.{req}", "required")
        for j, step in enumerate(samp["analysis"]):
            mc_mod.step_from_json(step)
    else:  # mc
        payload = dict(gen)
        payload.setdefault("seed", seed if seed is not None else 0)
        mc_mod.McTemplate.from_json_dict(payload)

    columns = _column_names(kind, gen)

    analyses = []
    seen_names: set[str] = set()
    for idx, a in enumerate(doc.get("analyses", [])):
        path = f"analyses[{idx}]"
        if not isinstance(a, Mapping):
            raise _fail(path, "must be an object")
        akind = a.get("kind")
        if akind not in _ANALYSIS_KINDS:
            raise _fail(f"{path}.kind", f"unknown kind {akind!r}; valid: {_ANALYSIS_KINDS}")
        name = a.get("name", f"{akind}_{idx}")
        if name in seen_names:
            raise _fail(f"{path}.name", f"duplicate analysis name {name!r}")
        seen_names.add(name)
        a = dict(a)
        a["name"] = name

        def need(*fields: str):
            for f in fields:
                if f not in a:
                    raise _fail(f"{path}.{f}", "required")

        def check_cols(*names: str):
            if not columns:
                return
            for nm in names:
                if nm not in columns and nm not in seen_recodes:
                    raise _fail(path, f"unknown column {nm!r}; generator defines {columns}")

        seen_recodes: set[str] = {
            prev.get("as") for prev in analyses if prev.get("kind") == "recode"
        }
        if akind == "fit":
            need("formula")
            f = Formula.parse(a["formula"])
            check_cols(*f.variables())
        elif akind == "collinearity":
            need("formula")
            Formula.parse(a["formula"])
        elif akind == "compare_adjustments":
            need("y", "x", "covariate_sets")
            check_cols(a["y"], a["x"], *(v for s in a["covariate_sets"] for v in s))
        elif akind == "iv":
            need("y", "x", "instrument")
            check_cols(a["y"], a["x"], a["instrument"])
        elif akind == "mediation":
            need("y", "x", "m")
            check_cols(a["y"], a["x"], a["m"])
        elif akind == "moderated_fit":
            need("y", "x", "mo")
            check_cols(a["y"], a["x"], a["mo"])
        elif akind == "subgroup":
            need("y", "x", "where")
            RowFilter.from_json_list(a["where"])
            check_cols(a["y"], a["x"])
        elif akind in ("balance", "block_balance"):
            need("covariates")
            need("group" if akind == "balance" else "strata")
            check_cols(*a["covariates"])
        elif akind == "attenuation":
            need("y", "x", "variants")
            check_cols(a["y"], a["x"])
            for v in a["variants"]:
                rules = v["rule"] if isinstance(v["rule"], list) else [v["rule"]]
                AttenuationVariant(
                    label=v["label"],
                    target=v["target"],
                    rule=tuple(rule_from_json(r) for r in rules),
                    family=v.get("family"),
                )
        elif akind == "summary":
            need("var")
            check_cols(a["var"])
        elif akind == "correlation":
            need("x", "y")
            if a.get("method", "pearson") not in ("pearson", "spearman"):
                raise _fail(f"{path}.method", "must be pearson or spearman")
            check_cols(a["x"], a["y"])
        elif akind == "outlier_fit":
            need("assign", "formula")
            Formula.parse(a["formula"])
            check_cols(*a["assign"].keys())
        elif akind == "recode":
            need("var", "rule", "as")
            check_cols(a["var"])
            rules = a["rule"] if isinstance(a["rule"], list) else [a["rule"]]
            for r in rules:
                rule_from_json(r)
        analyses.append(a)

    outputs = []
    seen_paths: set[str] = set()
    for idx, o in enumerate(doc.get("outputs", [])):
        path = f"outputs[{idx}]"
        if not isinstance(o, Mapping) or "what" not in o or "path" not in o:
            raise _fail(path, "needs 'what' and 'path'")
        if o["path"] in seen_paths:
            raise _fail(f"{path}.path", f"duplicate output path {o['path']!r}")
        seen_paths.add(o["path"])
        fmt = o.get("format")
        if fmt is not None and fmt not in ("csv", "json"):
            raise _fail(f"{path}.format", f"must be csv or json, got {fmt!r}")
        what = o["what"]
        head = what.split(":", 1)[0]
        if head not in ("dataset", "analysis", "mc", "mc_summary", "histogram", "scatter", "fitted_line"):
            raise _fail(f"{path}.what", f"unknown output kind {what!r}")
        outputs.append(dict(o))

    return ScenarioConfig(
        id=ident,
        seed=seed,
        generator_kind=kind,
        generator=json.loads(json.dumps(gen)),
        analyses=tuple(analyses),
        outputs=tuple(outputs),
    )


def load_config(path: str) -> ScenarioConfig:
    with open(path) as fh:
        return parse_config(fh.read())


# -- execution ---------------------------------------------------------------


@dataclass
class ScenarioRun:
    config: ScenarioConfig
    data: Dataset | None
    mc_result: "mc_mod.McResult | None"
    artifacts: dict[str, Any]
    analysis_errors: dict[str, str]
    files: list[str]


def _effective_seed(cfg: ScenarioConfig, seed_override: int | None) -> int:
    if seed_override is not None:
        return seed_override
    if cfg.seed is not None:
        return cfg.seed
    env = os.environ.get("BIASLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"BIASLAB_SEED is not an integer: {env!r}") from None
    raise ValidationError(f"scenario {cfg.id!r} has no seed; pass --seed or set BIASLAB_SEED")


def _generate(cfg: ScenarioConfig, seed: int, workers: int) -> tuple[Dataset | None, mc_mod.McResult | None]:
    gen = cfg.generator
    if cfg.generator_kind == "scm":
        return evaluate_scm(ScmSpec.from_json_dict(gen), derive_substream(seed, 0)), None
    if cfg.generator_kind == "corr":
        target = CorrTarget(
            names=tuple(gen["names"]),
            corr=np.asarray(gen["corr"], dtype=float),
            means=np.asarray(gen["means"], dtype=float) if "means" in gen else None,
            sds=np.asarray(gen["sds"], dtype=float) if "sds" in gen else None,
            empirical_exact=bool(gen.get("empirical_exact", True)),
        )
        return mvn_exact(target, int(gen["n"]), derive_substream(seed, 0)), None
    if cfg.generator_kind == "population":
        pop = evaluate_scm(ScmSpec.from_json_dict(gen["scm"]), derive_substream(seed, 0))
        samp = dict(gen["sampling"])
        samp.setdefault("seed", (seed + 1) % 2**64)
        plan = mc_mod.SamplingPlan.from_json_dict(samp)
        return pop, mc_mod.repeated_samples(pop, plan, workers=workers)
    payload = dict(gen)
    payload.setdefault("seed", seed)
    template = mc_mod.McTemplate.from_json_dict(payload)
    return None, mc_mod.run_mc(template, workers=workers)


def _run_analysis(a: Mapping, data: Dataset, rng_stream) -> tuple[Any, Dataset]:
    kind = a["kind"]
    if kind == "fit":
        return fit(data, Formula.parse(a["formula"]), family=a.get("family", "gaussian")), data
    if kind == "collinearity":
        return collinearity_diagnostics(data, Formula.parse(a["formula"])), data
    if kind == "compare_adjustments":
        return (
            compare_adjustments(
                data, a["y"], a["x"], a["covariate_sets"],
                truth=a.get("truth"), scenario_id=a["name"],
            ),
            data,
        )
    if kind == "iv":
        return iv_wald(data, a["y"], a["x"], a["instrument"], allow_weak=a.get("allow_weak", False)), data
    if kind == "mediation":
        return mediation(data, a["y"], a["x"], a["m"]), data
    if kind == "moderated_fit":
        return moderated_fit(data, a["y"], a["x"], a["mo"]), data
    if kind == "subgroup":
        return subgroup_effect(data, a["y"], a["x"], RowFilter.from_json_list(a["where"])), data
    if kind == "balance":
        return balance_diff(data, a["group"], a["covariates"]), data
    if kind == "block_balance":
        assignment = block_randomize(data, a["strata"], rng_stream, name=a.get("as", "treated"))
        with_assign = data.with_column(assignment)
        return balance_diff(with_assign, assignment.name, a["covariates"]), with_assign
    if kind == "attenuation":
        variants = []
        for v in a["variants"]:
            rules = v["rule"] if isinstance(v["rule"], list) else [v["rule"]]
            variants.append(
                AttenuationVariant(
                    label=v["label"], target=v["target"],
                    rule=tuple(rule_from_json(r) for r in rules), family=v.get("family"),
                )
            )
        return attenuation_report(data, a["y"], a["x"], variants), data
    if kind == "summary":
        return summarize(data[a["var"]]), data
    if kind == "correlation":
        from .data import pearson, spearman as spearman_corr

        method = a.get("method", "pearson")
        fn = pearson if method == "pearson" else spearman_corr
        xcol, ycol = data[a["x"]], data[a["y"]]
        n_used = int((~(xcol.missing | ycol.missing)).sum())
        return {"method": method, "x": a["x"], "y": a["y"],
                "r": fn(xcol, ycol), "n_used": n_used}, data
    if kind == "outlier_fit":
        assign = {}
        for col, v in a["assign"].items():
            if isinstance(v, str) and v.startswith("mean:"):
                assign[col] = float(np.nanmean(data.column_values(v[5:])))
            else:
                assign[col] = float(v)
        augmented = inject_outlier(data, assign)
        return fit(augmented, Formula.parse(a["formula"]), family=a.get("family", "gaussian")), data
    if kind == "recode":
        rules = a["rule"] if isinstance(a["rule"], list) else [a["rule"]]
        col = apply_rules(data[a["var"]], tuple(rule_from_json(r) for r in rules), name=a["as"])
        new_data = data.with_column(col)
        counts = {
            str(k): int(c)
            for k, c in zip(*np.unique(col.present(), return_counts=True))
        }
        return {"column": a["as"], "levels": counts, "n_missing": col.n_missing}, new_data
    raise ValidationError(f"unknown analysis kind {kind!r}")


def run_scenario(
    cfg: ScenarioConfig,
    out_dir: str | None = None,
    seed: int | None = None,
    workers: int = 1,
    default_format: str = "json",
) -> ScenarioRun:
    """Generate, analyse, and write declared outputs.

    Analysis failures are recorded per analysis and do not stop the run;
    callers decide the exit status from ``analysis_errors``.
    """
    eff_seed = _effective_seed(cfg, seed)
    data, mc_result = _generate(cfg, eff_seed, workers)
    artifacts: dict[str, Any] = {}
    errors: dict[str, str] = {}
    working = data
    for k, a in enumerate(cfg.analyses):
        try:
            if working is None:
                raise ValidationError("mc scenarios do not support dataset analyses")
            artifact, working = _run_analysis(a, working, derive_substream(eff_seed, k + 1))
            artifacts[a["name"]] = artifact
        except BiaslabError as exc:
            errors[a["name"]] = f"{type(exc).__name__}: {exc}"
    files: list[str] = []
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for o in cfg.outputs:
            path = os.path.join(out_dir, o["path"])
            _write_output(o, path, working, mc_result, artifacts, o.get("format", None), default_format)
            files.append(path)
    return ScenarioRun(
        config=cfg,
        data=working,
        mc_result=mc_result,
        artifacts=artifacts,
        analysis_errors=errors,
        files=files,
    )


# -- output emission -----------------------------------------------------------


def artifact_json(artifact: Any) -> Any:
    if hasattr(artifact, "to_json_dict"):
        return artifact.to_json_dict()
    if isinstance(artifact, CollinearityReport):
        return {
            "terms": list(artifact.terms),
            "tolerance": [float(v) for v in artifact.tolerance],
            "vif": [float(v) for v in artifact.vif],
            "eigenvalues": [float(v) for v in artifact.eigenvalues],
            "condition_indices": [float(v) for v in artifact.condition_indices],
        }
    if isinstance(artifact, BalanceReport):
        return {
            r.covariate: {
                "delta_mean": r.delta_mean,
                "delta_sd": r.delta_sd,
                "delta_skew": r.delta_skew,
                "delta_kurtosis": r.delta_kurtosis,
            }
            for r in artifact.rows
        }
    if isinstance(artifact, AttenuationReport):
        return {
            "rows": [
                {
                    "label": r.label, "spearman": r.spearman, "slope": r.slope,
                    "se": r.se, "stat": r.stat, "chisq": r.chisq,
                    "n_used": r.n_used, "family": r.family, "error": r.error,
                }
                for r in artifact.rows
            ]
        }
    if isinstance(artifact, dict):
        return artifact
    if hasattr(artifact, "__dataclass_fields__"):
        return {k: getattr(artifact, k) for k in artifact.__dataclass_fields__}
    raise ValidationError(f"cannot serialize artifact of type {type(artifact).__name__}")


def _artifact_csv_rows(artifact: Any) -> tuple[list[str], list[list]]:
    if isinstance(artifact, AttenuationReport):
        return list(AttenuationReport.CSV_HEADER), artifact.to_csv_rows()
    if isinstance(artifact, CollinearityReport):
        header = ["term", "tolerance", "vif", "eigenvalue", "condition_index"]
        rows = []
        npred = len(artifact.terms)
        for j in range(len(artifact.eigenvalues)):
            rows.append([
                artifact.terms[j] if j < npred else "",
                float(artifact.tolerance[j]) if j < npred else "",
                float(artifact.vif[j]) if j < npred else "",
                float(artifact.eigenvalues[j]),
                float(artifact.condition_indices[j]),
            ])
        return header, rows
    if isinstance(artifact, BalanceReport):
        header = ["covariate", "delta_mean", "delta_sd", "delta_skew", "delta_kurtosis"]
        return header, [
            [r.covariate, r.delta_mean, r.delta_sd, r.delta_skew, r.delta_kurtosis]
            for r in artifact.rows
        ]
    if isinstance(artifact, FitResult):
        header = ["term", "b", "se", "stat", "p", "beta"]
        rows = [
            [t, float(artifact.b[i]), float(artifact.se[i]), float(artifact.stat[i]),
             float(artifact.p[i]), float(artifact.beta[i])]
            for i, t in enumerate(artifact.terms)
        ]
        return header, rows
    d = artifact_json(artifact)
    return ["field", "value"], [[k, json.dumps(v)] for k, v in d.items()]


def _write_output(
    o: Mapping,
    path: str,
    data: Dataset | None,
    mc_result: "mc_mod.McResult | None",
    artifacts: dict[str, Any],
    fmt: str | None,
    default_format: str,
) -> None:
    what = o["what"]
    head, _, rest = what.partition(":")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    if head == "dataset":
        if data is None:
            raise ValidationError("no dataset to write for an mc scenario")
        write_csv(data, path)
        return
    if head == "mc":
        if mc_result is None:
            raise ValidationError("output 'mc' requires an mc or population scenario")
        mc_mod.write_mc_csv(mc_result, path)
        return
    if head == "mc_summary":
        if mc_result is None:
            raise ValidationError("output 'mc_summary' requires an mc or population scenario")
        summary = mc_mod.summarize_series(mc_result, rest)
        with open(path, "w") as fh:
            json.dump(summary.to_json_dict(), fh, indent=2)
            fh.write("\n")
        return
    if head == "histogram":
        series, _, nbins = rest.partition(":")
        if mc_result is not None:
            bins = mc_mod.histogram(mc_result, series, int(nbins))
        else:
            col = data[series]  # type: ignore[index]
            fake = mc_mod.McResult((series,), [{"i": i, "N": 0, series: v}
                                               for i, v in enumerate(col.values)], {}, "", 0)
            bins = mc_mod.histogram(fake, series, int(nbins))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lo", "hi", "count"])
            w.writerows([[repr(lo), repr(hi), c] for lo, hi, c in bins])
        return
    if head == "scatter":
        xname, _, yname = rest.partition(":")
        if data is None:
            raise ValidationError("scatter output requires a dataset scenario")
        pts = Dataset([data[xname], data[yname]])
        write_csv(pts, path)
        return
    if head == "fitted_line":
        fit_name, _, xname = rest.partition(":")
        if fit_name not in artifacts:
            raise ValidationError(f"fitted_line references unknown analysis {fit_name!r}")
        fit_res = artifacts[fit_name]
        if not isinstance(fit_res, FitResult):
            raise ValidationError(f"fitted_line target {fit_name!r} is not a fit")
        xcol = data[xname]  # type: ignore[index]
        grid = np.linspace(float(np.nanmin(xcol.values)), float(np.nanmax(xcol.values)), 100)
        grid_data = Dataset.from_arrays({xname: grid})
        # other variables in the formula are held at their means
        for v in fit_res.formula.variables()[1:]:
            if v != xname:
                grid_data = grid_data.with_column(
                    Column(v, np.full(100, float(np.nanmean(data.column_values(v)))))  # type: ignore[union-attr]
                )
        yhat = predict(fit_res, grid_data)
        write_csv(Dataset([grid_data[xname], Column("fitted", yhat.values, yhat.missing)]), path)
        return
    # analysis artifact
    name = rest
    if name not in artifacts:
        raise ValidationError(f"output references unknown analysis {name!r}")
    chosen = fmt or default_format
    if chosen == "csv":
        header, rows = _artifact_csv_rows(artifacts[name])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    else:
        with open(path, "w") as fh:
            json.dump(artifact_json(artifacts[name]), fh, indent=2)
            fh.write("\n")
