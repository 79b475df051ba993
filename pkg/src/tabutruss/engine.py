"""Variable step size tabu search over a lattice of design points.

Each control step optionally performs one strategic action, chosen by the
number of moves since the incumbent last improved:

* ``intensify_after`` stalled moves: restart from the aggregate of the elite list,
* ``diversify_after`` stalled moves: restart from a random feasible lattice point,
* ``reduce_after`` stalled moves: halve the step (truncated to the lattice)
  and return to the incumbent,

and then one full-neighborhood move from the current base, with a pattern
extension when the move improved on the base. Only a new incumbent or a
step reduction resets the counter. The search ends when the evaluation
budget is spent or when the counter reaches ``reduce_after`` with the step
already at its minimum.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from typing import Callable, NamedTuple

import numpy as np

from .memory import EliteList, TabuList
from .neighborhood import Bounds, CandidateMove, generate_neighborhood, pattern_move, same_point, select_move, snap

log = logging.getLogger(__name__)

EVENTS = ("move", "intensify", "diversify", "reduce")


class InfeasibleStartError(ValueError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


@dataclass
class Evaluation:
    """Outcome of one objective call. Lower ``value`` is better."""

    value: float
    feasible: bool = True
    violation: float = 0.0
    report: object = None


class Problem:
    """Minimization problem over a bounded lattice.

    Subclasses set ``bounds`` and implement :meth:`evaluate`. Evaluation must
    be pure: the engine relies on it for reproducibility.
    """

    bounds: Bounds

    def evaluate(self, x: np.ndarray) -> Evaluation:
        raise NotImplementedError


class FunctionProblem(Problem):
    """Wrap a plain function, with an optional ``constraint(x) -> bool``."""

    def __init__(self, func: Callable[[np.ndarray], float], bounds: Bounds,
                 constraint: Callable[[np.ndarray], bool] | None = None):
        self.func = func
        self.bounds = bounds
        self.constraint = constraint

    def evaluate(self, x):
        feasible = True if self.constraint is None else bool(self.constraint(x))
        return Evaluation(float(self.func(x)), feasible, 0.0 if feasible else 1.0)


@dataclass
class SearchConfig:
    tabu_size: int = 7
    elite_size: int = 5
    pattern_factor: float = 2.0
    intensify_after: int = 4
    diversify_after: int = 8
    reduce_after: int = 12
    initial_step: float | list[float] | None = None
    min_step: float | list[float] | None = None
    max_evaluations: int = 20000
    rng_seed: int = 0
    diversify_attempts: int = 50
    intensify_rule: str = "mean"
    # None discards infeasible candidates. A weight w turns on the penalty
    # value + w * scale * violation, where violation is the summed relative
    # constraint excess reported by the problem and scale is the problem's
    # ``penalty_scale`` if it defines one, else |value(start)|.
    penalty_weight: float | None = None
    # What to do at the fixpoint (stall cycle exhausted at min_step): "stop" or "restart".
    on_converge: str = "stop"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("tabu_size", "elite_size", "intensify_after", "diversify_after", "reduce_after",
                     "max_evaluations", "diversify_attempts"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if not self.pattern_factor >= 1.0:
            raise ValueError(f"pattern_factor must be >= 1, got {self.pattern_factor}")
        if not self.intensify_after < self.diversify_after < self.reduce_after:
            raise ValueError("counter thresholds must satisfy intensify_after < diversify_after < reduce_after")
        if self.intensify_rule not in INTENSIFY_RULES:
            raise ValueError(f"intensify_rule must be one of {sorted(INTENSIFY_RULES)}")
        if self.on_converge not in ("stop", "restart"):
            raise ValueError("on_converge must be 'stop' or 'restart'")
        if self.penalty_weight is not None and not self.penalty_weight > 0:
            raise ValueError("penalty_weight must be positive when given")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


class TraceRow(NamedTuple):
    evaluations: int
    best_objective: float
    step_size: float
    event: str


@dataclass
class SearchState:
    bounds: Bounds
    base: np.ndarray
    base_value: float
    best: np.ndarray
    best_value: float
    step: np.ndarray
    tabu: TabuList
    elite: EliteList
    rng: np.random.Generator
    stall_counter: int = 0
    # 0: nothing done in this stall cycle, 1: intensified, 2: diversified.
    phase: int = 0
    evaluations: int = 0
    trace: list[TraceRow] = field(default_factory=list)
    termination: str | None = None
    diversify_failures: int = 0
    restarts: int = 0
    last_event: str | None = None
    initial_step: np.ndarray | None = None
    # Best over all restarts; equals best/best_value until the first restart.
    record: np.ndarray | None = None
    record_value: float = np.inf
    penalty_scale: float = 1.0

    def note_record(self) -> None:
        if self.best_value < self.record_value:
            self.record = self.best.copy()
            self.record_value = self.best_value


@dataclass
class SearchResult:
    best: np.ndarray
    best_value: float
    trace: list[TraceRow]
    evaluations: int
    termination: str
    diversify_failures: int = 0
    restarts: int = 0


class _BudgetExhausted(Exception):
    pass


def reduce_step(step, min_step):
    """Halve ``step`` and truncate to a multiple of ``min_step``, never below it."""
    step = np.asarray(step, dtype=float)
    min_step = np.asarray(min_step, dtype=float)
    half = np.floor(step / 2.0 / min_step + 1e-9) * min_step
    out = np.maximum(min_step, half)
    return float(out) if out.ndim == 0 else out


def default_initial_step(bounds: Bounds) -> np.ndarray:
    return np.maximum(bounds.min_step, np.floor((bounds.upper - bounds.lower) / 10.0 / bounds.min_step + 1e-9)
                      * bounds.min_step)


def _elite_mean(points: np.ndarray) -> np.ndarray:
    return points.mean(axis=0)


def _elite_median(points: np.ndarray) -> np.ndarray:
    return np.median(points, axis=0)


INTENSIFY_RULES = {"mean": _elite_mean, "median": _elite_median}


def intensify(elite: EliteList, bounds: Bounds, rule: str = "mean", fallback=None) -> np.ndarray:
    """Restart point aggregated from the elite designs and snapped to the lattice."""
    if len(elite) == 0:
        if fallback is None:
            raise ValueError("elite list is empty and no fallback was given")
        return snap(fallback, bounds)
    return snap(INTENSIFY_RULES[rule](elite.points()), bounds)


def random_grid_point(bounds: Bounds, rng: np.random.Generator) -> np.ndarray:
    j = rng.integers(0, bounds.grid_size())
    return bounds.lower + j * bounds.min_step


def diversify(bounds: Bounds, rng: np.random.Generator,
              accept: Callable[[np.ndarray], bool] | None = None, attempts: int = 50) -> np.ndarray | None:
    """Uniform random lattice point passing ``accept``; ``None`` after ``attempts`` failures."""
    for _ in range(attempts):
        x = random_grid_point(bounds, rng)
        if accept is None or accept(x):
            return x
    return None


def _resolve_bounds(problem: Problem, config: SearchConfig) -> Bounds:
    b = problem.bounds
    if config.min_step is None:
        return b
    return Bounds(b.lower, b.upper, config.min_step)


def init_state(problem: Problem, config: SearchConfig, start) -> SearchState:
    config.validate()
    bounds = _resolve_bounds(problem, config)
    start = np.asarray(start, dtype=float)
    if start.shape != bounds.lower.shape:
        raise ValueError(f"start has {start.size} components, problem has {bounds.dim}")
    if not bounds.contains(start):
        i = int(np.flatnonzero((start < bounds.lower) | (start > bounds.upper))[0])
        raise InfeasibleStartError(
            f"start component {i + 1} = {start[i]} outside [{bounds.lower[i]}, {bounds.upper[i]}]")
    if not bounds.on_grid(start):
        raise ValueError("start point is not aligned with the min_step lattice")
    if config.initial_step is None:
        step = default_initial_step(bounds)
    else:
        step = np.broadcast_to(np.asarray(config.initial_step, dtype=float), bounds.lower.shape).copy()
        ratio = step / bounds.min_step
        if np.any(step < bounds.min_step * (1 - 1e-9)) or np.any(np.abs(ratio - np.round(ratio)) > 1e-6):
            raise ValueError("initial_step must be a positive integer multiple of min_step")
    ev = problem.evaluate(start)
    if not ev.feasible:
        raise InfeasibleStartError(f"start point is infeasible: {_describe(ev)}", ev.report)
    state = SearchState(
        bounds=bounds, base=start.copy(), base_value=ev.value, best=start.copy(), best_value=ev.value,
        step=step, tabu=TabuList(config.tabu_size, bounds.min_step),
        elite=EliteList(config.elite_size, bounds.min_step), rng=np.random.default_rng(config.rng_seed),
        evaluations=1, initial_step=step.copy(),
        penalty_scale=_penalty_scale(problem, ev.value),
    )
    state.tabu.push(start)
    state.elite.offer(start, ev.value)
    state.note_record()
    _log(state, "move")
    return state


def _penalty_scale(problem: Problem, start_value: float) -> float:
    scale = getattr(problem, "penalty_scale", None)
    if scale is not None:
        return float(scale)
    return abs(start_value) if start_value != 0 else 1.0


def _describe(ev: Evaluation) -> str:
    rep = ev.report
    if rep is None:
        return "constraint violated"
    describe = getattr(rep, "describe", None)
    return describe() if callable(describe) else str(rep)


def _log(state: SearchState, event: str) -> None:
    state.last_event = event
    state.note_record()
    state.trace.append(TraceRow(state.evaluations, float(state.record_value), float(np.max(state.step)), event))


def _evaluate(state: SearchState, problem: Problem, config: SearchConfig, x) -> tuple[float, bool, bool]:
    """Returns (selection value, admissible for selection, truly feasible)."""
    if state.evaluations >= config.max_evaluations:
        raise _BudgetExhausted
    state.evaluations += 1
    ev = problem.evaluate(x)
    if ev.feasible:
        return ev.value, True, True
    if config.penalty_weight is not None:
        return ev.value + config.penalty_weight * state.penalty_scale * ev.violation, True, False
    return ev.value, False, False


def _accept(state: SearchState, point, value: float, feasible: bool) -> None:
    state.base = np.array(point, dtype=float)
    state.base_value = value
    state.tabu.push(point)
    if feasible and value < state.best_value:
        state.best = state.base.copy()
        state.best_value = value
        state.elite.offer(point, value)
        state.stall_counter = 0
        state.phase = 0
    else:
        state.stall_counter += 1


def _restart(state: SearchState, point, value: float, feasible: bool) -> bool:
    """Move the base without counting a search move; True if the incumbent improved."""
    state.base = np.array(point, dtype=float)
    state.base_value = value
    state.tabu.push(point)
    if feasible and value < state.best_value:
        state.best = state.base.copy()
        state.best_value = value
        state.elite.offer(point, value)
        state.stall_counter = 0
        state.phase = 0
        return True
    return False


def _sweep(state: SearchState, problem: Problem, config: SearchConfig) -> None:
    """One full-neighborhood move from the current base."""
    candidates = []
    truly_feasible = {}
    try:
        for p in generate_neighborhood(state.base, state.step, state.bounds):
            value, admissible, feasible = _evaluate(state, problem, config, p)
            cand = CandidateMove(p, value, admissible)
            truly_feasible[id(cand)] = feasible
            candidates.append(cand)
    except _BudgetExhausted:
        state.termination = "budget"
    # Aspiration compares with the incumbent; infeasible penalized points never aspire.
    incumbent = state.best_value
    for c in candidates:
        c.tabu = c.point in state.tabu
        if c.tabu and not truly_feasible[id(c)]:
            c.feasible = False
    chosen = select_move(candidates, None, incumbent)
    if chosen is None:
        state.stall_counter += 1
        return
    point, value, feasible = chosen.point, chosen.objective, truly_feasible[id(chosen)]
    if value < state.base_value and config.pattern_factor > 1.0 and state.termination is None:
        p = pattern_move(state.base, point, config.pattern_factor, state.bounds)
        if not same_point(p, point, state.bounds.min_step) and p not in state.tabu:
            try:
                pv, padm, pfeas = _evaluate(state, problem, config, p)
            except _BudgetExhausted:
                state.termination = "budget"
            else:
                if padm and pv < value:
                    point, value, feasible = p, pv, pfeas
    _accept(state, point, value, feasible)


def _step_at_minimum(state: SearchState) -> bool:
    return bool(np.all(state.step <= state.bounds.min_step * (1 + 1e-9)))


def _intensify_action(state: SearchState, problem: Problem, config: SearchConfig) -> bool:
    b = state.bounds
    x = intensify(state.elite, b, config.intensify_rule, fallback=state.best)
    value, admissible, feasible = None, False, False
    if x not in state.tabu:
        value, admissible, feasible = _evaluate(state, problem, config, x)
    if not (admissible and feasible):
        # Nudge one lattice step per variable toward the incumbent.
        x = snap(x + np.sign(state.best - x) * b.min_step, b)
        if x not in state.tabu:
            value, admissible, feasible = _evaluate(state, problem, config, x)
        else:
            admissible = feasible = False
    if not (admissible and feasible):
        x, value, feasible = state.best.copy(), state.best_value, True
    return _restart(state, x, value, feasible)


def _diversify_action(state: SearchState, problem: Problem, config: SearchConfig) -> bool:
    found = {}

    def accept(x):
        if x in state.tabu:
            return False
        value, admissible, feasible = _evaluate(state, problem, config, x)
        if feasible:
            found["value"] = value
        return feasible

    x = diversify(state.bounds, state.rng, accept, config.diversify_attempts)
    if x is None:
        state.diversify_failures += 1
        log.info("diversification found no feasible point in %d attempts", config.diversify_attempts)
        return _restart(state, state.best.copy(), state.best_value, True)
    return _restart(state, x, found["value"], True)


def _fresh_start(state: SearchState, problem: Problem, config: SearchConfig) -> None:
    """Begin an independent sub-search from a random feasible point.

    Memories, step and counters are reset; only the record survives.
    """
    state.note_record()
    state.restarts += 1
    found = {}

    def accept(x):
        value, admissible, feasible = _evaluate(state, problem, config, x)
        if feasible:
            found["value"] = value
        return feasible

    x = diversify(state.bounds, state.rng, accept, config.diversify_attempts)
    if x is None:
        state.diversify_failures += 1
        x, found["value"] = state.record.copy(), state.record_value
    state.base, state.base_value = x.copy(), found["value"]
    state.best, state.best_value = x.copy(), found["value"]
    state.tabu = TabuList(config.tabu_size, state.bounds.min_step)
    state.elite = EliteList(config.elite_size, state.bounds.min_step)
    state.tabu.push(x)
    state.elite.offer(x, found["value"])
    state.step = state.initial_step.copy()
    state.stall_counter = 0
    state.phase = 0
    state.note_record()


def control_step(state: SearchState, problem: Problem, config: SearchConfig) -> SearchState:
    """Advance the search by one control step (see module docstring)."""
    if state.termination is not None:
        return state
    if state.evaluations >= config.max_evaluations:
        state.termination = "budget"
        return state
    event = "move"
    try:
        if state.phase == 0 and state.stall_counter >= config.intensify_after:
            if not _intensify_action(state, problem, config):
                state.phase = 1
            event = "intensify"
        elif state.phase == 1 and state.stall_counter >= config.diversify_after:
            if not _diversify_action(state, problem, config):
                state.phase = 2
            event = "diversify"
        elif state.phase == 2 and state.stall_counter >= config.reduce_after:
            if _step_at_minimum(state):
                if config.on_converge == "stop":
                    state.termination = "converged"
                    return state
                _fresh_start(state, problem, config)
                _sweep(state, problem, config)
                _log(state, "diversify")
                return state
            state.step = reduce_step(state.step, state.bounds.min_step)
            state.stall_counter = 0
            state.phase = 0
            state.base, state.base_value = state.best.copy(), state.best_value
            event = "reduce"
        _sweep(state, problem, config)
    except _BudgetExhausted:
        state.termination = "budget"
    if state.trace and state.trace[-1].evaluations == state.evaluations:
        return state
    _log(state, event)
    return state


def run_search(problem: Problem, config: SearchConfig, start,
               callback: Callable[[SearchState], None] | None = None) -> SearchResult:
    """Minimize ``problem`` from ``start``; raises :class:`InfeasibleStartError` for a bad start."""
    state = init_state(problem, config, start)
    while state.termination is None:
        control_step(state, problem, config)
        if callback is not None:
            callback(state)
    state.note_record()
    log.debug("search finished: %s after %d evaluations, best %.6g",
              state.termination, state.evaluations, state.record_value)
    return SearchResult(state.record.copy(), float(state.record_value), list(state.trace), state.evaluations,
                        state.termination, state.diversify_failures, state.restarts)
