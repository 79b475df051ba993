"""Benchmark acceptance checks, shared by ``tabutruss verify`` and the test suite.

Each check returns a :class:`CriterionResult`; :func:`run_all` prints one
line per criterion.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import benchmarks as bm
from .config import RunConfig, load_config, shipped_config_path
from .engine import SearchConfig, run_search
from .fem import analyze, assemble, fundamental_frequency, solve_static
from .linalg import cholesky
from .objectives import OBJECTIVES, check_constraints
from .runner import optimise, run_normalization
from .synthetic import CASES

BLAND_SEEDS = tuple(range(1, 11))
BLAND_TARGET = bm.METRIC_PRIOR_TS_MASS        # every good run must reach this
BLAND_BEST_TARGET = 1110.0
BLAND_BUDGET = 20_000
BLAND_WALL_LIMIT = 60.0
ANCHOR_EVALS, ANCHOR_MASS = 500, 1150.0
COMPOUND_BUDGET = 50_000
COMPOUND_TOL = 0.03
SYNTHETIC_RUNS, SYNTHETIC_REQUIRED, SYNTHETIC_BUDGET, SYNTHETIC_TIME = 100, 95, 3000, 300.0
EIGEN_SAMPLES, EIGEN_RTOL = 100, 1e-6


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    expected: str
    obtained: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] C{self.number} {self.name}: expected {self.expected}; "
                f"obtained {self.obtained} ({self.seconds:.1f} s)")


def _config_path(config_dir, name: str) -> Path:
    return Path(config_dir) / name if config_dir is not None else shipped_config_path(name)


def _bland(config_dir=None) -> RunConfig:
    return load_config(_config_path(config_dir, "bland.json"))


def _bd(config_dir=None) -> RunConfig:
    return load_config(_config_path(config_dir, "bd.json"))


@lru_cache(maxsize=4)
def bland_runs(config_dir=None):
    """The ten seeded minimum-mass runs, cached for criteria 1 and 2."""
    cfg = _bland(config_dir)
    out = []
    for seed in BLAND_SEEDS:
        report, result = optimise(cfg, seed=seed)
        out.append((seed, report, result))
    return tuple(out)


def criterion_1(config_dir=None) -> CriterionResult:
    t0 = time.perf_counter()
    runs = bland_runs(config_dir)
    masses = [r.mass for _, r, _ in runs]
    good = sum(r.feasible and r.mass <= BLAND_TARGET for _, r, _ in runs)
    best = min(m for (_, r, _), m in zip(runs, masses) if r.feasible) if any(r.feasible for _, r, _ in runs) \
        else float("inf")
    within_budget = all(res.evaluations <= BLAND_BUDGET for _, _, res in runs)
    max_wall = max(r.wall_time for _, r, _ in runs)
    passed = good >= 8 and best <= BLAND_BEST_TARGET and within_budget and max_wall <= BLAND_WALL_LIMIT
    return CriterionResult(
        1, "minimum-mass search", passed,
        f">=8/10 runs feasible with mass <= {BLAND_TARGET} kg, best <= {BLAND_BEST_TARGET} kg, "
        f"<= {BLAND_BUDGET} evaluations and <= {BLAND_WALL_LIMIT:.0f} s per run",
        f"{good}/10, best {best:.2f} kg, masses {[round(m, 1) for m in masses]}, slowest run {max_wall:.1f} s",
        time.perf_counter() - t0)


def criterion_2(config_dir=None) -> CriterionResult:
    t0 = time.perf_counter()
    runs = bland_runs(config_dir)
    seed, report, result = min(runs, key=lambda r: r[1].mass)
    early = [row.best_objective for row in result.trace if row.evaluations <= ANCHOR_EVALS]
    value = min(early) if early else float("inf")
    return CriterionResult(
        2, "convergence speed", value <= ANCHOR_MASS,
        f"best run below {ANCHOR_MASS} kg within {ANCHOR_EVALS} evaluations",
        f"seed {seed}: {value:.2f} kg", time.perf_counter() - t0)


def criterion_3(config_dir=None) -> CriterionResult:
    t0 = time.perf_counter()
    cfg = _bland(config_dir)
    res = analyze(cfg.model, bm.METRIC_TS_AREAS)
    feasible = check_constraints(res, cfg.constraints).feasible
    passed = abs(res.mass - bm.METRIC_TS_MASS) <= 0.5 and feasible
    return CriterionResult(
        3, "FEM check, metric case", passed,
        f"mass {bm.METRIC_TS_MASS} +/- 0.5 kg and the reference design feasible",
        f"mass {res.mass:.3f} kg, feasible={feasible}", time.perf_counter() - t0)


def criterion_4(config_dir=None) -> CriterionResult:
    t0 = time.perf_counter()
    cfg = _bd(config_dir)
    sa = analyze(cfg.model, bm.IMPERIAL_SA_AREAS)
    ts = analyze(cfg.model, bm.IMPERIAL_TS_AREAS)
    ref = bm.IMPERIAL_TS_OBJECTIVES
    mass_err = abs(sa.mass / bm.IMPERIAL_SA_OBJECTIVES["mass"] - 1)
    f_err = abs(ts.frequency_hz / ref["frequency_hz"] - 1)
    d_err = abs(ts.total_displacement / ref["displacement"] - 1)
    sa_violations = check_constraints(sa, cfg.constraints).violations
    sa_disp_violated = any(v.kind == "displacement" for v in sa_violations)
    ts_feasible = check_constraints(ts, cfg.constraints).feasible
    passed = mass_err <= 1e-3 and f_err <= 0.02 and d_err <= 0.02 and sa_disp_violated and ts_feasible
    return CriterionResult(
        4, "FEM check, imperial case", passed,
        f"mass {bm.IMPERIAL_SA_OBJECTIVES['mass']} lb +/-0.1%, {ref['frequency_hz']} Hz +/-2%, "
        f"{ref['displacement']} in +/-2%, displacement limit violated by the SA design, TS design feasible",
        f"mass {sa.mass:.2f} lb ({100 * mass_err:.3f}%), {ts.frequency_hz:.3f} Hz ({100 * f_err:.2f}%), "
        f"{ts.total_displacement:.3f} in ({100 * d_err:.2f}%), SA violation={sa_disp_violated}, "
        f"TS feasible={ts_feasible}", time.perf_counter() - t0)


@lru_cache(maxsize=4)
def compound_run(config_dir=None, seed: int = 1):
    cfg = _bd(config_dir)
    return optimise(cfg, seed=seed)


def criterion_5(config_dir=None) -> CriterionResult:
    t0 = time.perf_counter()
    report, result = compound_run(config_dir)
    ref = bm.IMPERIAL_TS_OBJECTIVES
    got = {"mass": report.mass, "frequency_hz": report.frequency_hz, "displacement": report.total_displacement}
    rel = {k: got[k] / ref[k] - 1 for k in ref}
    close = all(abs(v) <= COMPOUND_TOL for v in rel.values())
    dominates = (got["mass"] <= ref["mass"] and got["frequency_hz"] >= ref["frequency_hz"]
                 and got["displacement"] <= ref["displacement"])
    passed = report.feasible and result.evaluations <= COMPOUND_BUDGET and (close or dominates)
    return CriterionResult(
        5, "compound-objective search", passed,
        f"feasible, <= {COMPOUND_BUDGET} evaluations, each objective within {100 * COMPOUND_TOL:.0f}% of "
        f"{ref} or dominating it",
        f"{ {k: round(v, 4) for k, v in got.items()} } (rel {[f'{100 * v:+.2f}%' for v in rel.values()]}), "
        f"feasible={report.feasible}, {result.evaluations} evaluations, score {report.compound_score:.4f}",
        time.perf_counter() - t0)


def synthetic_hits(case, runs=SYNTHETIC_RUNS, budget=SYNTHETIC_BUDGET) -> int:
    _, optimum = case.enumerate_optimum()
    hits = 0
    for seed in range(runs):
        start = case.random_start(np.random.default_rng(10_000 + seed))
        cfg = SearchConfig(rng_seed=seed, max_evaluations=budget, on_converge="restart")
        result = run_search(case.problem(), cfg, start)
        hits += abs(result.best_value - optimum) <= 1e-9 * max(1.0, abs(optimum))
    return hits


def criterion_6(config_dir=None) -> CriterionResult:
    t0 = time.perf_counter()
    hits = {case.name: synthetic_hits(case) for case in CASES}
    sizes_ok = all(case.grid_points() <= 100_000 for case in CASES)
    elapsed = time.perf_counter() - t0
    passed = sizes_ok and all(h >= SYNTHETIC_REQUIRED for h in hits.values()) and elapsed <= SYNTHETIC_TIME
    return CriterionResult(
        6, "oracle equivalence", passed,
        f">= {SYNTHETIC_REQUIRED}/{SYNTHETIC_RUNS} runs hit the enumerated optimum on each problem, "
        f"<= {SYNTHETIC_TIME:.0f} s",
        f"{hits}", elapsed)


def _property_checks(config_dir=None) -> list[str]:
    """Quick randomized versions of the structural and search invariants; returns failures."""
    failures = []
    rng = np.random.default_rng(7)
    for cfg in (_bland(config_dir), _bd(config_dir)):
        c = cfg.constraints
        for _ in range(20):
            a = rng.uniform(c.a_min, c.a_max, cfg.model.n_members)
            k, m = assemble(cfg.model, a)
            if not (np.array_equal(k, k.T) and np.array_equal(m, m.T)):
                failures.append("K or M not symmetric")
            try:
                cholesky(k)
                cholesky(m)
            except np.linalg.LinAlgError:
                failures.append("K or M not positive definite")
            res = analyze(cfg.model, a)
            if res.residual > 1e-8:
                failures.append(f"equilibrium residual {res.residual:.2e}")
            w2 = analyze(cfg.model, 2.5 * a).omega
            if abs(w2 / res.omega - 1) > 1e-8:
                failures.append("frequency changed under uniform area scaling")
            u2 = solve_static(k, 3.0 * cfg.model.load_vector)
            u1 = solve_static(k, cfg.model.load_vector)
            if not np.allclose(u2, 3.0 * u1, rtol=1e-10, atol=0):
                failures.append("displacements not linear in load")
    # Search invariants on a short metric run.
    cfg = _bland(config_dir)
    short = cfg.with_overrides(seed=3, max_evaluations=3000)
    _, r1 = optimise(short)
    _, r2 = optimise(short)
    if r1.trace != r2.trace:
        failures.append("traces differ for identical seeds")
    best = [row.best_objective for row in r1.trace]
    if any(b2 > b1 for b1, b2 in zip(best, best[1:])):
        failures.append("incumbent got worse")
    evals = [row.evaluations for row in r1.trace]
    if any(e2 <= e1 for e1, e2 in zip(evals, evals[1:])):
        failures.append("trace evaluations not strictly increasing")
    for row in r1.trace:
        ratio = row.step_size / cfg.min_step
        if row.step_size < cfg.min_step * (1 - 1e-9) or abs(ratio - round(ratio)) > 1e-6:
            failures.append(f"step {row.step_size} not a multiple of min_step")
            break
    return failures


def criterion_7(config_dir=None) -> CriterionResult:
    t0 = time.perf_counter()
    failures = _property_checks(config_dir)
    return CriterionResult(7, "property checks", not failures, "no invariant violations",
                           "none" if not failures else "; ".join(sorted(set(failures))), time.perf_counter() - t0)


def reference_frequency(k: np.ndarray, m: np.ndarray) -> float:
    """Fundamental frequency from the full spectrum of ``M^-1 K`` (general eigensolver)."""
    lam = np.linalg.eigvals(np.linalg.solve(m, k))
    return float(np.sqrt(np.min(lam.real)))


def criterion_8(config_dir=None) -> CriterionResult:
    t0 = time.perf_counter()
    worst = 0.0
    rng = np.random.default_rng(11)
    for i in range(EIGEN_SAMPLES):
        cfg = _bd(config_dir) if i % 2 else _bland(config_dir)
        c = cfg.constraints
        a = rng.uniform(c.a_min, c.a_max, cfg.model.n_members)
        k, m = assemble(cfg.model, a)
        worst = max(worst, abs(fundamental_frequency(k, m) / reference_frequency(k, m) - 1))
    return CriterionResult(8, "eigen oracle", worst <= EIGEN_RTOL,
                           f"relative error <= {EIGEN_RTOL:g} on {EIGEN_SAMPLES} random designs",
                           f"max relative error {worst:.2e}", time.perf_counter() - t0)


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}


def run_all(config_dir=None, only=None, stream=sys.stdout) -> list[CriterionResult]:
    config_dir = str(config_dir) if config_dir is not None else None
    results = []
    t0 = time.perf_counter()
    for number, check in CRITERIA.items():
        if only is not None and number not in only:
            continue
        result = check(config_dir)
        results.append(result)
        if stream is not None:
            print(result.line(), file=stream, flush=True)
    if stream is not None:
        n_pass = sum(r.passed for r in results)
        print(f"{n_pass}/{len(results)} criteria passed in {time.perf_counter() - t0:.1f} s", file=stream)
    return results
