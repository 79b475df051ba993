"""Objectives, constraint checks and the compounded multiobjective score."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .engine import Evaluation, Problem, SearchConfig, SearchResult, run_search
from .fem import AnalysisResult, TrussError, TrussModel, analyze
from .neighborhood import Bounds

OBJECTIVES = ("mass", "neg_frequency", "displacement")
KINDS = OBJECTIVES + ("compound",)
DISPLACEMENT_MODES = ("component", "resultant")
COMPOUND_FORMS = ("normalized", "raw")


class ConfigurationError(ValueError):
    pass


class DesignEvaluationError(RuntimeError):
    """FEM failure, with the design that caused it."""

    def __init__(self, message: str, areas):
        super().__init__(f"{message} (areas={list(np.round(np.asarray(areas, float), 6))})")
        self.areas = np.asarray(areas, dtype=float)


@dataclass(frozen=True)
class ConstraintSet:
    sigma_max: float
    delta_max: float
    a_min: float
    a_max: float
    displacement_mode: str = "component"

    def __post_init__(self):
        if not self.a_min < self.a_max:
            raise ConfigurationError(f"a_min ({self.a_min}) must be below a_max ({self.a_max})")
        if not (self.sigma_max > 0 and self.delta_max > 0):
            raise ConfigurationError("sigma_max and delta_max must be positive")
        if self.displacement_mode not in DISPLACEMENT_MODES:
            raise ConfigurationError(f"displacement_mode must be one of {DISPLACEMENT_MODES}")


@dataclass(frozen=True)
class NormalizationConstants:
    """Best and worst single-objective values, keyed by objective name.

    All objectives are in minimization form, so ``best < worst``.
    """

    best: Mapping[str, float]
    worst: Mapping[str, float]

    def __post_init__(self):
        for name in OBJECTIVES:
            if name not in self.best or name not in self.worst:
                raise ConfigurationError(f"normalization constants missing objective {name!r}")
            if self.best[name] == self.worst[name]:
                raise ConfigurationError(f"degenerate normalization for {name!r}: best == worst")

    def to_dict(self) -> dict:
        return {name: {"best": float(self.best[name]), "worst": float(self.worst[name])} for name in OBJECTIVES}

    @classmethod
    def from_dict(cls, data: Mapping) -> "NormalizationConstants":
        unknown = set(data) - set(OBJECTIVES)
        if unknown:
            raise ConfigurationError(f"unknown objective(s) in normalization: {sorted(unknown)}")
        try:
            return cls({k: float(data[k]["best"]) for k in OBJECTIVES},
                       {k: float(data[k]["worst"]) for k in OBJECTIVES})
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"normalization needs best/worst for each of {OBJECTIVES}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "NormalizationConstants":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: str
    constraints: ConstraintSet
    normalization: NormalizationConstants | None = None
    compound_form: str = "normalized"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"objective kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "compound" and self.normalization is None:
            raise ConfigurationError("compound objective requires normalization constants")
        if self.compound_form not in COMPOUND_FORMS:
            raise ConfigurationError(f"compound_form must be one of {COMPOUND_FORMS}")

    @property
    def needs_modal(self) -> bool:
        return self.kind in ("neg_frequency", "compound")


@dataclass(frozen=True)
class Violation:
    kind: str       # "stress" or "displacement"
    label: str      # member "m3" or node "n1" (with axis for component mode)
    value: float
    limit: float

    @property
    def margin(self) -> float:
        """Relative excess over the limit (positive when violated)."""
        return abs(self.value) / self.limit - 1.0

    def __str__(self):
        return f"{self.kind} at {self.label}: |{self.value:.6g}| > {self.limit:.6g} (+{100 * self.margin:.3g}%)"


@dataclass
class ViolationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations

    @property
    def total(self) -> float:
        return float(sum(v.margin for v in self.violations))

    def describe(self) -> str:
        return "feasible" if self.feasible else "; ".join(str(v) for v in self.violations)


@dataclass
class ObjectiveValue:
    value: float
    feasible: bool
    report: ViolationReport
    raw: dict[str, float]
    analysis: AnalysisResult


def check_constraints(analysis: AnalysisResult, constraints: ConstraintSet) -> ViolationReport:
    report = ViolationReport()
    for e, s in enumerate(analysis.stresses):
        if abs(s) > constraints.sigma_max:
            report.violations.append(Violation("stress", f"m{e + 1}", float(s), constraints.sigma_max))
    for node, (dx, dy) in zip(analysis.free_nodes, analysis.displacements):
        if constraints.displacement_mode == "resultant":
            r = math.hypot(dx, dy)
            if r > constraints.delta_max:
                report.violations.append(Violation("displacement", f"n{node + 1}", r, constraints.delta_max))
            continue
        for axis, d in (("x", dx), ("y", dy)):
            if abs(d) > constraints.delta_max:
                report.violations.append(Violation("displacement", f"n{node + 1}{axis}", float(d),
                                                   constraints.delta_max))
    return report


def raw_objectives(analysis: AnalysisResult) -> dict[str, float]:
    raw = {"mass": analysis.mass, "displacement": analysis.total_displacement}
    if analysis.omega is not None:
        raw["neg_frequency"] = -analysis.omega
    return raw


def compound_objective(f_values: Mapping[str, float], norm: NormalizationConstants,
                       form: str = "normalized") -> float:
    """Product over objectives of the distance from the worst value.

    ``normalized`` divides each distance by ``worst - best`` and clamps it
    to [0, 1]; ``raw`` multiplies the unscaled distances. Larger is better.
    """
    out = 1.0
    for name in OBJECTIVES:
        worst, best = norm.worst[name], norm.best[name]
        if worst == best:
            raise ConfigurationError(f"degenerate normalization for {name!r}")
        gap = worst - f_values[name]
        if form == "raw":
            out *= gap
        else:
            out *= min(1.0, max(0.0, gap / (worst - best)))
    return out


def evaluate(spec: ObjectiveSpec, model: TrussModel, areas) -> ObjectiveValue:
    """Objective value in minimization form (compound scores are negated)."""
    a = np.asarray(areas, dtype=float)
    c = spec.constraints
    tol = 1e-9 * (c.a_max - c.a_min)
    for i, v in enumerate(a):
        if not (c.a_min - tol <= v <= c.a_max + tol):
            raise ValueError(f"area A{i + 1} = {v} outside [{c.a_min}, {c.a_max}]")
    try:
        res = analyze(model, a, modal=spec.needs_modal)
    except TrussError as exc:
        raise DesignEvaluationError(str(exc), a) from exc
    report = check_constraints(res, c)
    raw = raw_objectives(res)
    if spec.kind == "compound":
        value = -compound_objective(raw, spec.normalization, spec.compound_form)
    else:
        value = raw[spec.kind]
    return ObjectiveValue(float(value), report.feasible, report, raw, res)


class TrussProblem(Problem):
    """Adapter exposing a truss objective to the search engine."""

    def __init__(self, spec: ObjectiveSpec, model: TrussModel, min_step: float | Sequence[float]):
        self.spec = spec
        self.model = model
        c = spec.constraints
        self.bounds = Bounds(np.full(model.n_members, c.a_min), np.full(model.n_members, c.a_max), min_step)
        # Compound scores live in [-1, 0]; the start value says nothing about scale.
        self.penalty_scale = 1.0 if spec.kind == "compound" else None

    def evaluate(self, x) -> Evaluation:
        ov = evaluate(self.spec, self.model, x)
        return Evaluation(ov.value, ov.feasible, ov.report.total, ov.report)


@dataclass
class NormalizationRun:
    constants: NormalizationConstants
    designs: dict[str, np.ndarray]
    values: dict[str, dict[str, float]]
    results: dict[str, SearchResult]


def normalization_from_designs(model: TrussModel, designs: Mapping[str, Sequence[float]]) -> tuple[
        NormalizationConstants, dict[str, dict[str, float]]]:
    """Best/worst table from one optimal design per objective."""
    values = {}
    for name in OBJECTIVES:
        res = analyze(model, designs[name], modal=True)
        values[name] = raw_objectives(res)
    best = {name: values[name][name] for name in OBJECTIVES}
    worst = {name: max(values[d][name] for d in OBJECTIVES) for name in OBJECTIVES}
    return NormalizationConstants(best, worst), values


def derive_normalization(model: TrussModel, constraints: ConstraintSet, config: SearchConfig, start,
                         min_step) -> NormalizationRun:
    """Run the three single-objective searches and tabulate best/worst values."""
    results, designs = {}, {}
    for name in OBJECTIVES:
        spec = ObjectiveSpec(name, constraints)
        problem = TrussProblem(spec, model, min_step)
        result = run_search(problem, replace(config), start)
        final = evaluate(spec, model, result.best)
        if not final.feasible:
            raise RuntimeError(f"single-objective {name} search ended infeasible: {final.report.describe()}")
        results[name] = result
        designs[name] = result.best
    constants, values = normalization_from_designs(model, designs)
    return NormalizationRun(constants, designs, values, results)
