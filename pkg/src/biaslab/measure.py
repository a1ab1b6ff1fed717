"""Level-of-measurement recodes and continuous transformations.

Recodes (dichotomize/ordinalize) use type-7 quantile cutpoints so bin
counts on tie-free data are exact (e.g. a median split of 10000 values is
5000/5000).  Transform domain violations (log of a non-positive value,
fractional power of a negative) yield missing cells rather than errors,
mirroring NA propagation; listwise deletion then handles them downstream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import Column, Dataset, quantile_type7, spearman
from .errors import BiaslabError, DataError, ParameterError, ValidationError
from .regress import FitResult, Formula, fit, main

_DICHOTOMIZE_KINDS = {"dichotomize_median", "dichotomize_quantile", "dichotomize_threshold"}
_ORDINALIZE_KINDS = {"ordinalize_quantiles", "ordinalize_cutpoints"}


@dataclass(frozen=True)
class RecodeRule:
    """A level-of-measurement recode (dichotomize or ordinalize)."""

    kind: str
    p: float | None = None  # dichotomize_quantile
    threshold: float | None = None  # dichotomize_threshold
    probs: tuple[float, ...] = ()  # ordinalize_quantiles
    cutpoints: tuple[float, ...] = ()  # ordinalize_cutpoints

    def __post_init__(self):
        if self.kind not in _DICHOTOMIZE_KINDS | _ORDINALIZE_KINDS:
            raise ValidationError(f"unknown recode kind {self.kind!r}")
        if self.kind == "dichotomize_quantile":
            if self.p is None or not (0.0 < self.p < 1.0):
                raise ValidationError(f"dichotomize_quantile needs p in (0,1), got {self.p}")
        if self.kind == "dichotomize_threshold" and self.threshold is None:
            raise ValidationError("dichotomize_threshold needs a threshold value")
        if self.kind == "ordinalize_quantiles":
            probs = tuple(float(q) for q in self.probs)
            if not probs or any(not (0.0 < q < 1.0) for q in probs) or any(
                probs[i] >= probs[i + 1] for i in range(len(probs) - 1)
            ):
                raise ValidationError(
                    f"ordinalize_quantiles needs strictly increasing probs in (0,1), got {self.probs}"
                )
            object.__setattr__(self, "probs", probs)
        if self.kind == "ordinalize_cutpoints":
            cuts = tuple(float(c) for c in self.cutpoints)
            if not cuts or any(cuts[i] >= cuts[i + 1] for i in range(len(cuts) - 1)):
                raise ParameterError(
                    f"ordinalize_cutpoints needs strictly increasing values, got {self.cutpoints}"
                )
            object.__setattr__(self, "cutpoints", cuts)

    @property
    def is_dichotomize(self) -> bool:
        return self.kind in _DICHOTOMIZE_KINDS

    def to_json_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.p is not None:
            d["p"] = self.p
        if self.threshold is not None:
            d["threshold"] = self.threshold
        if self.probs:
            d["probs"] = list(self.probs)
        if self.cutpoints:
            d["cutpoints"] = list(self.cutpoints)
        return d

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "RecodeRule":
        return cls(
            kind=d["kind"],
            p=d.get("p"),
            threshold=d.get("threshold"),
            probs=tuple(d.get("probs", ())),
            cutpoints=tuple(d.get("cutpoints", ())),
        )


_TRANSFORM_KINDS = {
    "scale",
    "shift",
    "zscore",
    "minmax",
    "log_e",
    "log_10",
    "power",
    "round_whole",
    "window",
}


@dataclass(frozen=True)
class TransformRule:
    """A continuous transformation preserving the column's length."""

    kind: str
    c: float | None = None  # scale/shift constant
    exponent: float | None = None  # power
    pad_lo: float = 0.0  # minmax
    pad_hi: float = 0.0
    lo: float | None = None  # window
    hi: float | None = None

    def __post_init__(self):
        if self.kind not in _TRANSFORM_KINDS:
            raise ValidationError(f"unknown transform kind {self.kind!r}")
        if self.kind == "scale" and (self.c is None or self.c == 0):
            raise ParameterError("scale constant must be nonzero")
        if self.kind == "shift" and self.c is None:
            raise ValidationError("shift needs a constant")
        if self.kind == "power" and self.exponent is None:
            raise ValidationError("power needs an exponent")
        if self.kind == "window":
            if self.lo is None or self.hi is None or not (self.lo < self.hi):
                raise ValidationError(f"window needs lo < hi, got ({self.lo}, {self.hi})")

    def to_json_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        for k in ("c", "exponent", "lo", "hi"):
            v = getattr(self, k)
            if v is not None:
                d[k] = v
        if self.pad_lo or self.pad_hi:
            d["pad_lo"] = self.pad_lo
            d["pad_hi"] = self.pad_hi
        return d

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "TransformRule":
        return cls(
            kind=d["kind"],
            c=d.get("c"),
            exponent=d.get("exponent"),
            pad_lo=d.get("pad_lo", 0.0),
            pad_hi=d.get("pad_hi", 0.0),
            lo=d.get("lo"),
            hi=d.get("hi"),
        )


def rule_from_json(d: Mapping) -> "RecodeRule | TransformRule":
    if d.get("kind") in _TRANSFORM_KINDS:
        return TransformRule.from_json_dict(d)
    return RecodeRule.from_json_dict(d)


def dichotomize(col: Column, rule: RecodeRule, name: str | None = None) -> Column:
    """Recode to 0/1: value <= cut -> 0, value > cut -> 1; missing passes through."""
    if not rule.is_dichotomize:
        raise ParameterError(f"{rule.kind} is not a dichotomize rule")
    present = col.present()
    if present.size == 0:
        raise DataError(f"column {col.name!r} has no non-missing values")
    if rule.kind == "dichotomize_median":
        cut = quantile_type7(present, 0.5)
    elif rule.kind == "dichotomize_quantile":
        cut = quantile_type7(present, float(rule.p))  # type: ignore[arg-type]
    else:
        cut = float(rule.threshold)  # type: ignore[arg-type]
    out = np.where(col.values > cut, 1.0, 0.0)
    out[col.missing] = np.nan
    recoded = Column(name or col.name, out, col.missing.copy())
    classes = np.unique(recoded.present())
    if classes.size < 2:
        warnings.warn(
            f"dichotomizing {col.name!r} produced a single class", stacklevel=2
        )
    return recoded


def ordinalize(col: Column, rule: RecodeRule, name: str | None = None) -> Column:
    """Recode to ordered labels 1..K.

    Interior bins are left-closed/right-open; the final bin is closed at the
    maximum, matching >=/< chains that end with <=.
    """
    if rule.kind not in _ORDINALIZE_KINDS:
        raise ParameterError(f"{rule.kind} is not an ordinalize rule")
    present = col.present()
    if present.size == 0:
        raise DataError(f"column {col.name!r} has no non-missing values")
    if rule.kind == "ordinalize_quantiles":
        cuts = [quantile_type7(present, q) for q in rule.probs]
    else:
        cuts = list(rule.cutpoints)
    out = np.ones(len(col), dtype=float)
    for c in cuts:
        out += (col.values >= c).astype(float)
    out[col.missing] = np.nan
    return Column(name or col.name, out, col.missing.copy())


def transform(col: Column, rule: TransformRule, name: str | None = None) -> Column:
    """Apply a continuous transformation; domain violations become missing."""
    x = col.values
    miss = col.missing.copy()
    nm = name or col.name
    if rule.kind == "scale":
        return Column(nm, x * rule.c, miss)
    if rule.kind == "shift":
        return Column(nm, x + rule.c, miss)
    if rule.kind == "zscore":
        present = col.present()
        if present.size < 2 or np.std(present, ddof=1) == 0:
            raise DataError(f"zscore of constant/degenerate column {col.name!r}")
        return Column(nm, (x - present.mean()) / np.std(present, ddof=1), miss)
    if rule.kind == "minmax":
        present = col.present()
        if present.size == 0:
            raise DataError(f"minmax of all-missing column {col.name!r}")
        lo = present.min() - rule.pad_lo
        hi = present.max() + rule.pad_hi
        if hi == lo:
            raise DataError(f"minmax of constant column {col.name!r} with zero pads")
        return Column(nm, (x - lo) / (hi - lo), miss)
    if rule.kind in ("log_e", "log_10"):
        bad = ~miss & (x <= 0)
        vals = np.where(miss | bad, np.nan, x)
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = np.log(vals) if rule.kind == "log_e" else np.log10(vals)
        return Column(nm, vals, miss | bad)
    if rule.kind == "power":
        e = float(rule.exponent)  # type: ignore[arg-type]
        if e == round(e):
            with np.errstate(divide="ignore"):
                vals = np.where(miss, np.nan, x) ** e
            bad = ~miss & ~np.isfinite(vals)
            return Column(nm, np.where(bad, np.nan, vals), miss | bad)
        bad = ~miss & (x < 0)
        bad |= ~miss & (x == 0) & (e < 0)
        with np.errstate(invalid="ignore"):
            vals = np.where(miss | bad, np.nan, x) ** e
        return Column(nm, vals, miss | bad)
    if rule.kind == "round_whole":
        vals = np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))
        return Column(nm, np.where(miss, np.nan, vals), miss)
    if rule.kind == "window":
        bad = ~miss & ((x <= rule.lo) | (x >= rule.hi))
        return Column(nm, np.where(miss | bad, np.nan, x), miss | bad)
    raise AssertionError(rule.kind)


def apply_rule(col: Column, rule: "RecodeRule | TransformRule", name: str | None = None) -> Column:
    if isinstance(rule, TransformRule):
        return transform(col, rule, name)
    if rule.is_dichotomize:
        return dichotomize(col, rule, name)
    return ordinalize(col, rule, name)


def apply_rules(
    col: Column, rules: Sequence["RecodeRule | TransformRule"], name: str | None = None
) -> Column:
    """Apply a pipeline of rules left to right (e.g. minmax-with-pads then log)."""
    out = col
    for rule in rules:
        out = apply_rule(out, rule, name)
    return out


@dataclass(frozen=True)
class AttenuationVariant:
    """One measurement decision to compare against the untransformed baseline."""

    label: str
    target: str  # "x" | "y"
    rule: "RecodeRule | TransformRule | tuple"
    family: str | None = None  # override the automatic family choice

    def __post_init__(self):
        if self.target not in ("x", "y"):
            raise ValidationError(f"variant target must be 'x' or 'y', got {self.target!r}")
        if isinstance(self.rule, (list, tuple)):
            object.__setattr__(self, "rule", tuple(self.rule))

    def rules(self) -> tuple:
        return self.rule if isinstance(self.rule, tuple) else (self.rule,)


@dataclass(frozen=True)
class AttenuationRow:
    label: str
    spearman: float
    slope: float
    se: float
    stat: float
    chisq: float
    n_used: int
    family: str
    error: str | None = None


@dataclass(frozen=True)
class AttenuationReport:
    rows: tuple[AttenuationRow, ...]

    def row(self, label: str) -> AttenuationRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise ValidationError(f"no attenuation row labelled {label!r}")

    CSV_HEADER = ("label", "spearman", "slope", "se", "stat", "chisq", "n_used")

    def to_csv_rows(self) -> list[list]:
        return [
            [r.label, r.spearman, r.slope, r.se, r.stat, r.chisq, r.n_used] for r in self.rows
        ]


def choose_family(response: Column) -> str:
    """2 observed {0,1} levels -> binomial; 3..9 integer levels -> ordered; else gaussian."""
    vals = np.unique(response.present())
    if vals.size == 2 and set(vals) <= {0.0, 1.0}:
        return "binomial"
    if 3 <= vals.size <= 9 and np.all(vals == np.round(vals)):
        return "ordered"
    return "gaussian"


def attenuation_report(
    data: Dataset,
    y: str,
    x: str,
    variants: Sequence[AttenuationVariant],
) -> AttenuationReport:
    """Per-variant Spearman/slope/stat/chi-square against the baseline fit.

    Each row recodes or transforms one side, picks the family from the
    response's observed levels, fits ``y ~ x``, and reports the focal-term
    test statistic and its square.  A failing variant is recorded and the
    remaining rows still compute.
    """
    rows: list[AttenuationRow] = []

    def run(label: str, xcol: Column, ycol: Column, family: str | None):
        try:
            fam = family or choose_family(ycol)
            ds = Dataset([Column("x", xcol.values, xcol.missing), Column("y", ycol.values, ycol.missing)])
            rho = spearman(xcol, ycol)
            f: FitResult = fit(ds, Formula("y", (main("x"),)), family=fam)
            stat = f.stat_of("x")
            rows.append(
                AttenuationRow(
                    label=label,
                    spearman=rho,
                    slope=f.coef("x"),
                    se=f.se_of("x"),
                    stat=stat,
                    chisq=stat * stat,
                    n_used=f.n_used,
                    family=fam,
                )
            )
        except BiaslabError as exc:
            rows.append(
                AttenuationRow(label, float("nan"), float("nan"), float("nan"), float("nan"),
                               float("nan"), 0, family or "?", error=str(exc))
            )

    xbase, ybase = data[x], data[y]
    run("baseline", xbase, ybase, None)
    for v in variants:
        try:
            if v.target == "x":
                run(v.label, apply_rules(xbase, v.rules()), ybase, v.family)
            else:
                run(v.label, xbase, apply_rules(ybase, v.rules()), v.family)
        except BiaslabError as exc:
            rows.append(
                AttenuationRow(v.label, float("nan"), float("nan"), float("nan"), float("nan"),
                               float("nan"), 0, v.family or "?", error=str(exc))
            )
    return AttenuationReport(tuple(rows))
