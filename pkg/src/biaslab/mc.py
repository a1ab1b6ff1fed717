"""Reproducible Monte Carlo harness.

Two drivers share the same record/aggregate machinery:

* :func:`run_mc` — randomized-specification loops: per replicate, draw the
  sample size and every placeholder from its range, evaluate the model
  template, run the analysis plan, and record the requested estimates.
* :func:`repeated_samples` — repeated sampling without replacement from a
  fixed population (optionally pre-filtered), fitting per sample.

Replicate ``i`` always uses ``derive_substream(master_seed, i)``, so results
are independent of execution order and worker count, and adding replicates
never perturbs earlier ones.  Replicate failures (singular designs from
extreme draws) are recorded as missing with an error tag, never fatal.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .causal import iv_wald, RowFilter
from .data import Column, Dataset, balance_diff, quantile_type7
from .errors import BiaslabError, DataError, ParameterError, ValidationError
from .regress import Formula, fit
from .rng import RngState, derive_substream, sample_indices
from .scm import EquationSpec, ErrorTerm, GroupError, ScmSpec, SourceSpec, evaluate_scm

_OPS = {
    "<": np.less,
    "<=": np.less_equal,
    ">": np.greater,
    ">=": np.greater_equal,
    "==": np.equal,
    "!=": np.not_equal,
}


@dataclass(frozen=True)
class RangeSpec:
    """Closed range for a uniform draw (real) or integer draw (for n)."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValidationError(f"range reversed: lo={self.lo} > hi={self.hi}")

    def draw(self, rng: RngState) -> float:
        if self.lo == self.hi:
            return float(self.lo)
        return float(rng.generator.uniform(self.lo, self.hi))

    def draw_int(self, rng: RngState) -> int:
        return int(rng.generator.integers(int(self.lo), int(self.hi) + 1))


# -- analysis plan steps -----------------------------------------------------


@dataclass(frozen=True)
class FitStep:
    """Fit a formula and record selected quantities.

    Selectors: ``b:T`` ``se:T`` ``stat:T`` ``p:T`` ``beta:T`` (term T) and ``r2``.
    """

    formula: str
    record: tuple[tuple[str, str], ...]
    family: str = "gaussian"

    def __post_init__(self):
        object.__setattr__(self, "_parsed", Formula.parse(self.formula))
        object.__setattr__(self, "_wants_beta", any(s.startswith("beta") for _, s in self.record))

    def run(self, data: Dataset) -> dict[str, float]:
        if self.family == "gaussian":
            from .regress import fit_ols

            f = fit_ols(data, self._parsed, standardized=self._wants_beta)
        else:
            f = fit(data, self._parsed, family=self.family)
        out = {}
        for name, selector in self.record:
            if selector == "r2":
                out[name] = f.r_squared if f.r_squared is not None else float("nan")
                continue
            what, _, term = selector.partition(":")
            idx = f.term_index(term)
            out[name] = float({"b": f.b, "se": f.se, "stat": f.stat, "p": f.p, "beta": f.beta}[what][idx])
        return out

    def names(self) -> list[str]:
        return [n for n, _ in self.record]


@dataclass(frozen=True)
class IvStep:
    """Wald IV analysis; selectors: ratio, b_yin, se_yin, b_xin, se_xin."""

    y: str
    x: str
    instrument: str
    record: tuple[tuple[str, str], ...]
    allow_weak: bool = True

    def run(self, data: Dataset) -> dict[str, float]:
        est = iv_wald(data, self.y, self.x, self.instrument, allow_weak=self.allow_weak)
        pool = est.to_json_dict()
        return {name: float(pool[selector]) for name, selector in self.record}

    def names(self) -> list[str]:
        return [n for n, _ in self.record]


@dataclass(frozen=True)
class BalanceStep:
    """Group balance moments; selectors: delta_mean:COV, delta_sd:COV, ..."""

    group: str
    covariates: tuple[str, ...]
    record: tuple[tuple[str, str], ...]

    def run(self, data: Dataset) -> dict[str, float]:
        rep = balance_diff(data, self.group, self.covariates)
        out = {}
        for name, selector in self.record:
            what, _, cov = selector.partition(":")
            out[name] = float(getattr(rep.row(cov), what))
        return out

    def names(self) -> list[str]:
        return [n for n, _ in self.record]


AnalysisStep = FitStep | IvStep | BalanceStep


def step_to_json(step: AnalysisStep) -> dict:
    if isinstance(step, FitStep):
        return {
            "kind": "fit",
            "formula": step.formula,
            "family": step.family,
            "record": {n: s for n, s in step.record},
        }
    if isinstance(step, IvStep):
        return {
            "kind": "iv",
            "y": step.y,
            "x": step.x,
            "instrument": step.instrument,
            "allow_weak": step.allow_weak,
            "record": {n: s for n, s in step.record},
        }
    return {
        "kind": "balance",
        "group": step.group,
        "covariates": list(step.covariates),
        "record": {n: s for n, s in step.record},
    }


def step_from_json(d: Mapping) -> AnalysisStep:
    kind = d.get("kind")
    rec = tuple((n, s) for n, s in d.get("record", {}).items())
    if kind == "fit":
        return FitStep(formula=d["formula"], family=d.get("family", "gaussian"), record=rec)
    if kind == "iv":
        return IvStep(
            y=d["y"], x=d["x"], instrument=d["instrument"],
            allow_weak=d.get("allow_weak", True), record=rec,
        )
    if kind == "balance":
        return BalanceStep(group=d["group"], covariates=tuple(d["covariates"]), record=rec)
    raise ValidationError(f"unknown analysis step kind {kind!r}")


# -- templates and results ---------------------------------------------------


@dataclass(frozen=True)
class McTemplate:
    """A randomized-specification loop.

    ``scm`` may contain placeholder names; each must be bound exactly once in
    ``bindings``.  Per replicate the draw order is: sample size n, then the
    bindings in declaration order.  Drawn values are recorded alongside the
    analysis estimates.
    """

    scm: ScmSpec
    n: RangeSpec | int
    bindings: tuple[tuple[str, RangeSpec], ...]
    analysis: tuple[AnalysisStep, ...]
    reps: int
    master_seed: int

    def __post_init__(self):
        object.__setattr__(self, "bindings", tuple(self.bindings))
        object.__setattr__(self, "analysis", tuple(self.analysis))
        if self.reps < 1:
            raise ValidationError("reps must be >= 1")
        bound = [name for name, _ in self.bindings]
        if len(set(bound)) != len(bound):
            raise ValidationError(f"placeholder bound more than once: {bound}")
        needed = _spec_placeholders(self.scm)
        extra = set(bound) - needed
        missing = needed - set(bound)
        if extra:
            raise ValidationError(f"bindings for unused placeholders: {sorted(extra)}")
        if missing:
            raise ValidationError(f"unbound placeholders: {sorted(missing)}")
        reserved = {"i", "N"} | set(bound)
        for step in self.analysis:
            for name in step.names():
                if name in reserved:
                    raise ValidationError(f"recorded series name {name!r} collides")
                reserved.add(name)

    def series_names(self) -> list[str]:
        names = [name for name, _ in self.bindings]
        for step in self.analysis:
            names.extend(step.names())
        return names

    def to_json_dict(self) -> dict:
        return {
            "scm": self.scm.to_json_dict(),
            "n": {"lo": self.n.lo, "hi": self.n.hi} if isinstance(self.n, RangeSpec) else self.n,
            "bindings": {name: {"lo": r.lo, "hi": r.hi} for name, r in self.bindings},
            "analysis": [step_to_json(s) for s in self.analysis],
            "reps": self.reps,
            "seed": self.master_seed,
        }

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "McTemplate":
        n = d["n"]
        return cls(
            scm=ScmSpec.from_json_dict(d["scm"]),
            n=RangeSpec(n["lo"], n["hi"]) if isinstance(n, Mapping) else int(n),
            bindings=tuple((k, RangeSpec(v["lo"], v["hi"])) for k, v in d.get("bindings", {}).items()),
            analysis=tuple(step_from_json(s) for s in d["analysis"]),
            reps=int(d["reps"]),
            master_seed=int(d["seed"]),
        )

    def hash(self) -> str:
        text = json.dumps(self.to_json_dict(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _spec_placeholders(spec: ScmSpec) -> set[str]:
    out = spec.placeholders()
    out.discard("n")  # the sample size is drawn by the template, not a binding
    return out


def _subst(v, values: Mapping[str, float]):
    return values[v] if isinstance(v, str) and v in values else v


def bind_spec(spec: ScmSpec, values: Mapping[str, float], n: int) -> ScmSpec:
    """Substitute placeholder draws (and the sample size) into a template spec."""

    def bind_err(e: ErrorTerm | None) -> ErrorTerm | None:
        if e is None:
            return None
        return ErrorTerm(_subst(e.scale_coef, values), _subst(e.mean, values), _subst(e.sd, values))

    sources = tuple(
        SourceSpec(s.name, s.kind, {k: _subst(v, values) for k, v in s.params.items()})
        for s in spec.sources
    )
    equations = []
    for eq in spec.equations:
        ge = None
        if eq.group_error is not None:
            ge = GroupError(
                eq.group_error.by,
                {k: bind_err(t) for k, t in eq.group_error.levels.items()},
            )
        equations.append(
            EquationSpec(
                target=eq.target,
                intercept=_subst(eq.intercept, values),
                linear=tuple((s, _subst(c, values)) for s, c in eq.linear),
                interactions=tuple((a, b, _subst(c, values)) for a, b, c in eq.interactions),
                squares=tuple((s, _subst(c, values)) for s, c in eq.squares),
                error=bind_err(eq.error),
                group_error=ge,
            )
        )
    return ScmSpec(n=n, sources=sources, equations=tuple(equations))


@dataclass
class McResult:
    """Per-replicate records plus provenance."""

    series_names: tuple[str, ...]
    records: list[dict]
    errors: dict[int, str]
    template_hash: str
    master_seed: int
    n_filtered: int = 0

    def series(self, name: str) -> np.ndarray:
        if name not in ("i", "N") and name not in self.series_names:
            raise ValidationError(f"unknown series {name!r}; have {list(self.series_names)}")
        return np.array([float(r.get(name, math.nan)) for r in self.records])

    def __len__(self) -> int:
        return len(self.records)


def _run_template_replicate(template: McTemplate, i: int) -> tuple[dict, str | None]:
    rng = derive_substream(template.master_seed, i)
    n = template.n.draw_int(rng) if isinstance(template.n, RangeSpec) else int(template.n)
    values = {name: rs.draw(rng) for name, rs in template.bindings}
    record: dict = {"i": i, "N": n, **values}
    err: str | None = None
    try:
        spec = bind_spec(template.scm, values, n)
        ds = evaluate_scm(spec, rng)
        for step in template.analysis:
            record.update(step.run(ds))
    except (BiaslabError, np.linalg.LinAlgError) as exc:
        err = f"{type(exc).__name__}: {exc}"
        for step in template.analysis:
            for name in step.names():
                record.setdefault(name, math.nan)
    return record, err


def run_mc(template: McTemplate, workers: int = 1) -> McResult:
    """Execute the loop; per-replicate streams make the result order-free."""
    indices = range(template.reps)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, template.reps // (workers * 8))
            pairs = list(pool.map(_run_template_replicate, [template] * template.reps, indices, chunksize=chunk))
    else:
        pairs = [_run_template_replicate(template, i) for i in indices]
    records = [rec for rec, _ in pairs]
    errors = {rec["i"]: err for rec, err in pairs if err is not None}
    return McResult(
        series_names=tuple(template.series_names()),
        records=records,
        errors=errors,
        template_hash=template.hash(),
        master_seed=template.master_seed,
    )


@dataclass(frozen=True)
class SamplingPlan:
    """Repeated sampling without replacement from a fixed population."""

    k: int
    reps: int
    analysis: tuple[AnalysisStep, ...]
    master_seed: int
    row_filter: RowFilter | None = None

    def to_json_dict(self) -> dict:
        d: dict = {
            "k": self.k,
            "reps": self.reps,
            "analysis": [step_to_json(s) for s in self.analysis],
            "seed": self.master_seed,
        }
        if self.row_filter is not None:
            d["filter"] = self.row_filter.to_json_list()
        return d

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "SamplingPlan":
        return cls(
            k=int(d["k"]),
            reps=int(d["reps"]),
            analysis=tuple(step_from_json(s) for s in d["analysis"]),
            master_seed=int(d["seed"]),
            row_filter=RowFilter.from_json_list(d["filter"]) if "filter" in d else None,
        )


_POP_CACHE: dict[int, Dataset] = {}


def _run_sampling_replicate(args) -> tuple[dict, str | None]:
    pop, plan, i = args
    rng = derive_substream(plan.master_seed, i)
    idx = sample_indices(rng, pop.n_rows, plan.k, replace=False)
    sample = pop.select_rows(np.sort(idx))
    record: dict = {"i": i, "N": plan.k}
    err: str | None = None
    try:
        for step in plan.analysis:
            record.update(step.run(sample))
    except (BiaslabError, np.linalg.LinAlgError) as exc:
        err = f"{type(exc).__name__}: {exc}"
        for step in plan.analysis:
            for name in step.names():
                record.setdefault(name, math.nan)
    return record, err


def repeated_samples(
    population: Dataset,
    plan: SamplingPlan,
    workers: int = 1,
) -> McResult:
    """Draw ``k`` rows without replacement per replicate and run the plan."""
    pool_data = population
    if plan.row_filter is not None:
        pool_data = population.select_rows(plan.row_filter.mask(population))
    if pool_data.n_rows < plan.k:
        raise DataError(
            f"population after filtering has {pool_data.n_rows} rows, cannot sample {plan.k}"
        )
    args = [(pool_data, plan, i) for i in range(plan.reps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(_run_sampling_replicate, args, chunksize=max(1, plan.reps // (workers * 8))))
    else:
        pairs = [_run_sampling_replicate(a) for a in args]
    records = [rec for rec, _ in pairs]
    errors = {rec["i"]: err for rec, err in pairs if err is not None}
    names: list[str] = []
    for step in plan.analysis:
        names.extend(step.names())
    text = json.dumps(plan.to_json_dict(), sort_keys=True)
    return McResult(
        series_names=tuple(names),
        records=records,
        errors=errors,
        template_hash=hashlib.sha256(text.encode()).hexdigest()[:16],
        master_seed=plan.master_seed,
    )


# -- filtering and aggregation ------------------------------------------------


def filter_replicates(
    result: McResult, conditions: Sequence[tuple[str, str, float]] | RowFilter
) -> McResult:
    """Keep rows satisfying every (series, op, value) condition; NaN fails."""
    if isinstance(conditions, RowFilter):
        conds = [(c.var, c.op, c.value) for c in conditions.conditions]
    else:
        conds = list(conditions)
    for series, op, _ in conds:
        if series not in ("i", "N") and series not in result.series_names:
            raise ValidationError(f"unknown series {series!r}")
        if op not in _OPS:
            raise ValidationError(f"unknown comparison op {op!r}")
    kept = []
    for rec in result.records:
        ok = True
        for series, op, value in conds:
            v = float(rec.get(series, math.nan))
            if math.isnan(v) or not bool(_OPS[op](v, value)):
                ok = False
                break
        if ok:
            kept.append(rec)
    kept_ids = {r["i"] for r in kept}
    return McResult(
        series_names=result.series_names,
        records=kept,
        errors={i: m for i, m in result.errors.items() if i in kept_ids},
        template_hash=result.template_hash,
        master_seed=result.master_seed,
        n_filtered=result.n_filtered + (len(result.records) - len(kept)),
    )


@dataclass(frozen=True)
class McSummary:
    """Six-number layout: Min. 1st Qu. Median Mean 3rd Qu. Max."""

    min: float
    q1: float
    median: float
    mean: float
    q3: float
    max: float

    def to_json_dict(self) -> dict:
        return {
            "min": self.min, "q1": self.q1, "median": self.median,
            "mean": self.mean, "q3": self.q3, "max": self.max,
        }


def _clean_series(result: McResult, series: str) -> np.ndarray:
    x = result.series(series)
    x = x[~np.isnan(x)]
    if x.size == 0:
        raise DataError(f"series {series!r} has no non-missing values")
    return x


def summarize_series(result: McResult, series: str) -> McSummary:
    x = _clean_series(result, series)
    return McSummary(
        min=float(x.min()),
        q1=quantile_type7(x, 0.25),
        median=quantile_type7(x, 0.5),
        mean=float(x.mean()),
        q3=quantile_type7(x, 0.75),
        max=float(x.max()),
    )


def series_correlation(result: McResult, a: str, b: str) -> float:
    from .data import pearson

    xa = result.series(a)
    xb = result.series(b)
    return pearson(Column("a", xa), Column("b", xb))


def histogram(result: McResult, series: str, bins: int) -> list[tuple[float, float, int]]:
    """Equal-width bins over [min, max]; counts sum to the non-missing n."""
    if bins < 1:
        raise ParameterError("bins must be >= 1")
    x = _clean_series(result, series)
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        out = [(lo, hi, 0)] * bins
        out[0] = (lo, hi, int(x.size))
        return out
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(x, bins=edges)
    return [(float(edges[j]), float(edges[j + 1]), int(counts[j])) for j in range(bins)]


def write_mc_csv(result: McResult, path: str) -> None:
    """Columns: i, N, then the recorded series; missing cells are empty."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "N", *result.series_names])
        for rec in result.records:
            row = [rec["i"], rec["N"]]
            for name in result.series_names:
                v = rec.get(name, math.nan)
                row.append("" if (isinstance(v, float) and math.isnan(v)) else repr(float(v)))
            w.writerow(row)
