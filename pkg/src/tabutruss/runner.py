"""Glue between configs, the search engine and on-disk outputs."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .config import RunConfig
from .engine import SearchResult, TraceRow, run_search
from .fem import analyze
from .objectives import (NormalizationConstants, ObjectiveSpec, TrussProblem, check_constraints,
                         compound_objective, derive_normalization, raw_objectives)

log = logging.getLogger(__name__)

TRACE_HEADER = ("evaluations", "best_objective", "step_size", "event")
NORMALIZATION_FILE = "normalization.json"


@dataclass
class RunReport:
    areas: list[float]
    objective_kind: str
    objective_value: float | None
    mass: float
    omega: float
    frequency_hz: float
    total_displacement: float
    compound_score: float | None
    stresses: list[float]
    displacements: dict[str, list[float]]
    feasible: bool
    violations: list[str]
    evaluations: int
    termination: str | None
    wall_time: float
    seed: int | None
    config_hash: str
    config: dict

    def to_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        lines = [f"objective kind     {self.objective_kind}"]
        if self.objective_value is not None:
            lines.append(f"objective value    {self.objective_value:.6f}")
        lines += [
            f"mass               {self.mass:.4f}",
            f"frequency          {self.frequency_hz:.4f} Hz ({self.omega:.4f} rad/s)",
            f"total displacement {self.total_displacement:.6f}",
        ]
        if self.compound_score is not None:
            lines.append(f"compound score     {self.compound_score:.6f}")
        lines.append(f"feasible           {'yes' if self.feasible else 'no'}")
        lines += [f"  violated: {v}" for v in self.violations]
        lines.append("")
        lines.append("member  area          stress")
        for i, (a, s) in enumerate(zip(self.areas, self.stresses)):
            lines.append(f"m{i + 1:<6d}{a:<14.6g}{s:.6g}")
        lines.append("")
        lines.append("node    dx              dy")
        for node, (dx, dy) in self.displacements.items():
            lines.append(f"{node:<8s}{dx:<16.6g}{dy:.6g}")
        lines.append("")
        lines.append(f"evaluations {self.evaluations}  termination {self.termination}  "
                     f"seed {self.seed}  wall time {self.wall_time:.2f} s  config {self.config_hash}")
        return "\n".join(lines) + "\n"


def build_report(cfg: RunConfig, areas, *, evaluations=0, termination=None, wall_time=0.0,
                 seed=None, normalization: NormalizationConstants | None = None) -> RunReport:
    areas = np.asarray(areas, dtype=float)
    res = analyze(cfg.model, areas, modal=True)
    report = check_constraints(res, cfg.constraints)
    raw = raw_objectives(res)
    compound = None
    if normalization is not None:
        form = cfg.resolved["objective"].get("compound_form", "normalized")
        compound = compound_objective(raw, normalization, form)
    kind = cfg.kind
    if kind == "compound":
        value = compound
    else:
        value = raw[kind]
    return RunReport(
        areas=areas.tolist(), objective_kind=kind, objective_value=value, mass=res.mass, omega=res.omega,
        frequency_hz=res.frequency_hz, total_displacement=res.total_displacement, compound_score=compound,
        stresses=res.stresses.tolist(),
        displacements={f"n{n + 1}": d.tolist() for n, d in zip(res.free_nodes, res.displacements)},
        feasible=report.feasible, violations=[str(v) for v in report.violations],
        evaluations=evaluations, termination=termination, wall_time=wall_time, seed=seed,
        config_hash=cfg.config_hash, config=cfg.resolved,
    )


def write_trace(path, trace: list[TraceRow]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for row in trace:
            w.writerow((row.evaluations, repr(float(row.best_objective)), repr(float(row.step_size)), row.event))


def read_trace(path) -> list[TraceRow]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != TRACE_HEADER:
        raise ValueError(f"unexpected trace header {rows[0]}")
    return [TraceRow(int(r[0]), float(r[1]), float(r[2]), r[3]) for r in rows[1:]]


def write_report(out_dir, report: RunReport, stem: str = "report") -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{stem}.txt").write_text(report.to_text(), encoding="utf-8")
    (out_dir / f"{stem}.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")


def run_normalization(cfg: RunConfig, seed: int | None = None):
    """Three single-objective searches with the config's search settings."""
    search = cfg.search
    if seed is not None:
        search = replace(search, rng_seed=seed)
    if cfg.normalization_max_evaluations is not None:
        search = replace(search, max_evaluations=cfg.normalization_max_evaluations)
    return derive_normalization(cfg.model, cfg.constraints, search, cfg.start, cfg.min_step)


def resolve_normalization(cfg: RunConfig, seed: int | None = None, out_dir=None) -> NormalizationConstants:
    """Normalization constants from the config, a file, or a fresh derivation.

    Derived constants are persisted to ``out_dir`` so the run can be replayed.
    """
    if cfg.objective is not None and cfg.objective.normalization is not None:
        return cfg.objective.normalization
    src = cfg.normalization_source
    if isinstance(src, str):
        p = Path(src)
        if not p.is_absolute() and cfg.path is not None and not p.exists():
            p = cfg.path.parent / p
        return NormalizationConstants.load(p)
    log.info("deriving normalization constants from three single-objective searches")
    run = run_normalization(cfg, seed)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        run.constants.save(Path(out_dir) / NORMALIZATION_FILE)
    return run.constants


def optimise(cfg: RunConfig, seed: int | None = None, max_evaluations: int | None = None,
             out_dir=None) -> tuple[RunReport, SearchResult]:
    """Run the configured search; write trace and reports when ``out_dir`` is given."""
    cfg = cfg.with_overrides(seed, max_evaluations)
    search = cfg.search
    normalization = None
    spec = cfg.objective
    if cfg.kind == "compound":
        normalization = resolve_normalization(cfg, search.rng_seed, out_dir)
        form = cfg.resolved["objective"].get("compound_form", "normalized")
        spec = ObjectiveSpec("compound", cfg.constraints, normalization, form)
    problem = TrussProblem(spec, cfg.model, cfg.min_step)
    t0 = time.perf_counter()
    result = run_search(problem, search, cfg.start)
    wall = time.perf_counter() - t0
    report = build_report(cfg, result.best, evaluations=result.evaluations, termination=result.termination,
                          wall_time=wall, seed=search.rng_seed, normalization=normalization)
    if out_dir is not None:
        write_trace(Path(out_dir) / cfg.trace_file, result.trace)
        write_report(out_dir, report)
    return report, result
