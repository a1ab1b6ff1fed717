"""Directed-equation structural model engine and special-purpose generators.

A :class:`ScmSpec` lists exogenous sources and directed equations in
declaration order; evaluation follows that order, so any reference to a
not-yet-defined column is a hard validation error (cycles are impossible by
construction).  Numeric fields may also hold placeholder names (strings),
which the Monte Carlo harness binds to drawn values before evaluation.

Also here: the exact-correlation multivariate normal generator, clamped
integer populations, deterministic pattern repetition, outlier injection,
and blocked randomization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .data import Column, Dataset
from .errors import DataError, ParameterError, ValidationError
from .rng import RngState

Value = float | str  # str = placeholder name, bound by the MC harness

_SOURCE_KINDS = {
    "normal": ("mean", "sd"),
    "uniform_int": ("lo", "hi"),
    "pattern": ("values", "mode", "k"),
    "clamped_int_normal": ("mean", "sd", "lo", "hi"),
}

# source params that hold numbers (and may therefore hold placeholder names)
_NUMERIC_PARAMS = {
    "normal": ("mean", "sd"),
    "uniform_int": ("lo", "hi"),
    "pattern": ("k",),
    "clamped_int_normal": ("mean", "sd", "lo", "hi"),
}


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


@dataclass(frozen=True)
class ErrorTerm:
    """Additive noise: ``scale_coef * Normal(mean, sd)`` per row."""

    scale_coef: Value = 1.0
    mean: Value = 0.0
    sd: Value = 1.0

    def placeholders(self) -> set[str]:
        return {v for v in (self.scale_coef, self.mean, self.sd) if isinstance(v, str)}

    def draw(self, rng: RngState, n: int) -> np.ndarray:
        if self.sd < 0:
            raise ValidationError(f"error term sd must be >= 0, got {self.sd}")
        return self.scale_coef * rng.generator.normal(self.mean, self.sd, n)


@dataclass(frozen=True)
class SourceSpec:
    """An exogenous column definition."""

    name: str
    kind: str
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _SOURCE_KINDS:
            raise ValidationError(f"unknown source kind {self.kind!r}")
        missing = [k for k in _SOURCE_KINDS[self.kind] if k not in self.params]
        if missing:
            raise ValidationError(f"source {self.name!r} ({self.kind}) missing params {missing}")
        object.__setattr__(self, "params", dict(self.params))

    def placeholders(self) -> set[str]:
        return {
            self.params[k]
            for k in _NUMERIC_PARAMS[self.kind]
            if isinstance(self.params.get(k), str)
        }

    def generate(self, rng: RngState, n: int) -> np.ndarray:
        p = self.params
        if self.kind == "normal":
            if p["sd"] < 0:
                raise ValidationError(f"source {self.name!r}: sd must be >= 0")
            return rng.generator.normal(p["mean"], p["sd"], n)
        if self.kind == "uniform_int":
            lo, hi = int(p["lo"]), int(p["hi"])
            if lo > hi:
                raise ValidationError(f"source {self.name!r}: lo > hi")
            return rng.generator.integers(lo, hi + 1, size=n).astype(float)
        if self.kind == "pattern":
            return repeat_pattern(p["values"], p["mode"], int(p["k"]), n, name=self.name).values
        if self.kind == "clamped_int_normal":
            return clamped_integer_normal(
                n, p["mean"], p["sd"], p["lo"], p["hi"], rng, name=self.name
            ).values
        raise AssertionError(self.kind)


@dataclass(frozen=True)
class GroupError:
    """Error SD indexed by the level of an integer-valued column."""

    by: str
    levels: Mapping[int, ErrorTerm]

    def __post_init__(self):
        object.__setattr__(self, "levels", {int(k): v for k, v in self.levels.items()})

    def placeholders(self) -> set[str]:
        out: set[str] = set()
        for t in self.levels.values():
            out |= t.placeholders()
        return out


@dataclass(frozen=True)
class EquationSpec:
    """One directed equation: intercept + linear + interaction + square + error."""

    target: str
    intercept: Value = 0.0
    linear: tuple[tuple[str, Value], ...] = ()
    interactions: tuple[tuple[str, str, Value], ...] = ()
    squares: tuple[tuple[str, Value], ...] = ()
    error: ErrorTerm | None = None
    group_error: GroupError | None = None

    def __post_init__(self):
        object.__setattr__(self, "linear", tuple((s, c) for s, c in self.linear))
        object.__setattr__(self, "interactions", tuple((a, b, c) for a, b, c in self.interactions))
        object.__setattr__(self, "squares", tuple((s, c) for s, c in self.squares))
        if self.error is not None and self.group_error is not None:
            raise ValidationError(f"equation {self.target!r}: error and group_error are exclusive")

    def references(self) -> list[str]:
        names = [s for s, _ in self.linear]
        names += [a for a, _, _ in self.interactions] + [b for _, b, _ in self.interactions]
        names += [s for s, _ in self.squares]
        if self.group_error is not None:
            names.append(self.group_error.by)
        return names

    def placeholders(self) -> set[str]:
        out = {c for _, c in self.linear if isinstance(c, str)}
        out |= {c for _, _, c in self.interactions if isinstance(c, str)}
        out |= {c for _, c in self.squares if isinstance(c, str)}
        if isinstance(self.intercept, str):
            out.add(self.intercept)
        if self.error is not None:
            out |= self.error.placeholders()
        if self.group_error is not None:
            out |= self.group_error.placeholders()
        return out


@dataclass(frozen=True)
class ScmSpec:
    """A full simulation recipe: n rows, sources, then equations in order."""

    n: int | str
    sources: tuple[SourceSpec, ...]
    equations: tuple[EquationSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "equations", tuple(self.equations))
        self.validate()

    def validate(self) -> None:
        defined: set[str] = set()
        for src in self.sources:
            if src.name in defined:
                raise ValidationError(f"duplicate column {src.name!r}")
            defined.add(src.name)
        for eq in self.equations:
            if eq.target in defined:
                raise ValidationError(f"duplicate column {eq.target!r}")
            for ref in eq.references():
                if ref not in defined:
                    raise ValidationError(
                        f"equation {eq.target!r} references {ref!r} before it is defined "
                        "(cyclic or unknown name)"
                    )
            defined.add(eq.target)

    def placeholders(self) -> set[str]:
        out: set[str] = {self.n} if isinstance(self.n, str) else set()
        for src in self.sources:
            out |= src.placeholders()
        for eq in self.equations:
            out |= eq.placeholders()
        return out

    def is_concrete(self) -> bool:
        return not self.placeholders()

    # -- JSON interchange -----------------------------------------------

    def to_json_dict(self) -> dict:
        def err(e: ErrorTerm) -> dict:
            return {"coef": e.scale_coef, "mean": e.mean, "sd": e.sd}

        eqs = []
        for eq in self.equations:
            d: dict = {
                "target": eq.target,
                "intercept": eq.intercept,
                "linear": [[s, c] for s, c in eq.linear],
                "interactions": [[a, b, c] for a, b, c in eq.interactions],
                "squares": [[s, c] for s, c in eq.squares],
            }
            if eq.error is not None:
                d["error"] = err(eq.error)
            if eq.group_error is not None:
                d["group_error"] = {
                    "by": eq.group_error.by,
                    "levels": {str(k): err(v) for k, v in eq.group_error.levels.items()},
                }
            eqs.append(d)
        return {
            "n": self.n,
            "sources": [{"name": s.name, "kind": s.kind, "params": dict(s.params)} for s in self.sources],
            "equations": eqs,
        }

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "ScmSpec":
        def err(e: Mapping) -> ErrorTerm:
            return ErrorTerm(e.get("coef", 1.0), e.get("mean", 0.0), e.get("sd", 1.0))

        try:
            sources = tuple(
                SourceSpec(s["name"], s["kind"], s.get("params", {})) for s in d["sources"]
            )
            equations = []
            for e in d.get("equations", []):
                equations.append(
                    EquationSpec(
                        target=e["target"],
                        intercept=e.get("intercept", 0.0),
                        linear=tuple((s, c) for s, c in e.get("linear", [])),
                        interactions=tuple((a, b, c) for a, b, c in e.get("interactions", [])),
                        squares=tuple((s, c) for s, c in e.get("squares", [])),
                        error=err(e["error"]) if "error" in e else None,
                        group_error=(
                            GroupError(
                                e["group_error"]["by"],
                                {int(k): err(v) for k, v in e["group_error"]["levels"].items()},
                            )
                            if "group_error" in e
                            else None
                        ),
                    )
                )
            return cls(n=d["n"], sources=sources, equations=tuple(equations))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed scm spec: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "ScmSpec":
        return cls.from_json_dict(json.loads(text))


def evaluate_scm(spec: ScmSpec, rng: RngState) -> Dataset:
    """Materialize a concrete spec into a dataset, consuming ``rng`` in order."""
    if not spec.is_concrete():
        raise ValidationError(f"spec has unbound placeholders: {sorted(spec.placeholders())}")
    n = int(spec.n)
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {spec.n}")
    cols: dict[str, np.ndarray] = {}
    for src in spec.sources:
        cols[src.name] = src.generate(rng, n)
    for eq in spec.equations:
        y = np.full(n, float(eq.intercept))
        for s, c in eq.linear:
            y += c * cols[s]
        for a, b, c in eq.interactions:
            y += c * cols[a] * cols[b]
        for s, c in eq.squares:
            y += c * cols[s] ** 2
        if eq.error is not None:
            y += eq.error.draw(rng, n)
        elif eq.group_error is not None:
            g = cols[eq.group_error.by]
            if not np.all(g == np.round(g)):
                raise ValidationError(
                    f"group_error column {eq.group_error.by!r} must be integer-valued"
                )
            levels = eq.group_error.levels
            observed = np.unique(g.astype(int))
            unknown = [int(v) for v in observed if int(v) not in levels]
            if unknown:
                raise ValidationError(
                    f"group_error for {eq.target!r}: no error spec for levels {unknown}"
                )
            for level in sorted(levels):
                idx = np.flatnonzero(g == level)
                if idx.size:
                    y[idx] += levels[level].draw(rng, idx.size)
        cols[eq.target] = y
    return Dataset.from_arrays(cols, clean=True)


@dataclass(frozen=True)
class CorrTarget:
    """Target moments for the matrix-based generator."""

    names: tuple[str, ...]
    corr: np.ndarray
    means: np.ndarray = None  # type: ignore[assignment]
    sds: np.ndarray = None  # type: ignore[assignment]
    empirical_exact: bool = True

    def __post_init__(self):
        corr = np.asarray(self.corr, dtype=float)
        d = len(self.names)
        if corr.shape != (d, d):
            raise ValidationError(f"corr must be {d}x{d}, got {corr.shape}")
        if not np.allclose(corr, corr.T, atol=1e-12):
            raise ValidationError("corr must be symmetric")
        if not np.allclose(np.diag(corr), 1.0, atol=1e-12):
            raise ValidationError("corr must have a unit diagonal")
        means = np.zeros(d) if self.means is None else np.asarray(self.means, dtype=float)
        sds = np.ones(d) if self.sds is None else np.asarray(self.sds, dtype=float)
        if means.shape != (d,) or sds.shape != (d,):
            raise ValidationError("means/sds dimensions do not match corr")
        if np.any(sds <= 0):
            raise ValidationError("sds must be positive")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "corr", corr)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sds", sds)


def mvn_exact(target: CorrTarget, n: int, rng: RngState) -> Dataset:
    """Gaussian draws whose *sample* moments hit the target when requested.

    With ``empirical_exact`` the draws are re-centered, whitened by the
    eigendecomposition of their own sample covariance, and re-colored by the
    target factor, so the sample correlation matrix equals ``corr`` to
    ~1e-10 and sample means/sds equal the requested values.
    """
    d = len(target.names)
    lam, U = np.linalg.eigh(target.corr)
    if np.any(lam < -1e-10):
        raise DataError(f"correlation matrix is not positive semi-definite (min eig {lam.min():.3g})")
    if n < 1:
        raise ParameterError("n must be >= 1")
    z = rng.generator.normal(0.0, 1.0, (n, d))
    if target.empirical_exact:
        if n <= d:
            raise DataError(f"empirical_exact needs n > dimension ({n} <= {d})")
        z = z - z.mean(axis=0)
        s = z.T @ z / (n - 1)
        w, v = np.linalg.eigh(s)
        if np.any(w <= 1e-12):
            raise DataError("sample covariance is rank deficient; cannot whiten")
        whiten = v @ np.diag(1.0 / np.sqrt(w)) @ v.T
        color = U @ np.diag(np.sqrt(np.clip(lam, 0.0, None))) @ U.T
        x = z @ whiten @ color
        x -= x.mean(axis=0)
    else:
        color = U @ np.diag(np.sqrt(np.clip(lam, 0.0, None))) @ U.T
        x = z @ color
    x = x * target.sds + target.means
    return Dataset.from_arrays({name: x[:, j] for j, name in enumerate(target.names)}, clean=True)


def clamped_integer_normal(
    n: int,
    mean: float,
    sd: float,
    lo: float,
    hi: float,
    rng: RngState,
    name: str = "value",
) -> Column:
    """Normal draws truncated toward zero to integers, then clamped to [lo, hi]."""
    if lo > hi:
        raise ParameterError(f"clamp range reversed: lo={lo} > hi={hi}")
    if sd < 0:
        raise ParameterError("sd must be >= 0")
    x = np.trunc(rng.generator.normal(mean, sd, n))
    x[x <= lo] = lo
    x[x >= hi] = hi
    return Column(name, x)


def repeat_pattern(
    values: Sequence[float], mode: str, k: int, n: int, name: str = "value"
) -> Column:
    """Deterministic repetition: each value k times, or the pattern k times."""
    vals = np.asarray(list(values), dtype=float)
    if mode not in ("each", "times"):
        raise ParameterError(f"mode must be 'each' or 'times', got {mode!r}")
    if len(vals) * k != n:
        raise ParameterError(f"pattern length {len(vals)} x {k} != n = {n}")
    out = np.repeat(vals, k) if mode == "each" else np.tile(vals, k)
    return Column(name, out)


def inject_outlier(data: Dataset, assignments: Mapping[str, float]) -> Dataset:
    """Append one row holding the given values; unassigned columns are missing."""
    for name in assignments:
        if name not in data:
            raise ValidationError(f"outlier assigns unknown column {name!r}")
    cols = []
    for col in data.columns():
        if col.name in assignments:
            vals = np.append(col.values, float(assignments[col.name]))
            miss = np.append(col.missing, False)
        else:
            vals = np.append(col.values, np.nan)
            miss = np.append(col.missing, True)
        cols.append(Column(col.name, vals, miss))
    return Dataset(cols)


def block_randomize(data: Dataset, strata: str | Column, rng: RngState, name: str = "treated") -> Column:
    """Assign half of each stratum (uniformly at random) to treatment.

    Odd strata get floor or ceil treated counts, decided by one extra coin
    flip per odd stratum.
    """
    scol = data[strata] if isinstance(strata, str) else strata
    if scol.n_missing:
        raise DataError("strata column has missing values")
    out = np.zeros(data.n_rows)
    for level in np.unique(scol.values):
        idx = np.flatnonzero(scol.values == level)
        m = idx.size
        if m < 2:
            raise DataError(f"stratum {level!r} has fewer than 2 members")
        t = m // 2
        if m % 2 == 1 and rng.generator.integers(0, 2) == 1:
            t += 1
        chosen = rng.generator.choice(m, size=t, replace=False)
        out[idx[chosen]] = 1.0
    return Column(name, out)
