import dataclasses
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tabutruss import benchmarks as bm
from tabutruss.engine import SearchConfig
from tabutruss.fem import analyze
from tabutruss.objectives import (OBJECTIVES, ConfigurationError, ConstraintSet, NormalizationConstants,
                                  ObjectiveSpec, TrussProblem, compound_objective, derive_normalization, evaluate,
                                  raw_objectives)

NORM = NormalizationConstants({"mass": 0.0, "neg_frequency": 0.0, "displacement": 0.0},
                              {"mass": 1.0, "neg_frequency": 1.0, "displacement": 1.0})


def f_of(*factors):
    # With best 0 and worst 1 a factor p corresponds to f = 1 - p.
    return {name: 1.0 - p for name, p in zip(OBJECTIVES, factors)}


def test_compound_examples():
    assert compound_objective(f_of(0.5, 0.8, 0.9), NORM) == pytest.approx(0.36)
    assert compound_objective(f_of(1, 1, 1), NORM) == 1.0
    assert compound_objective(f_of(0.0, 0.7, 0.7), NORM) == 0.0


def test_compound_clamps():
    assert compound_objective(f_of(1.5, 1, 1), NORM) == 1.0
    assert compound_objective(f_of(-0.5, 1, 1), NORM) == 0.0


def test_compound_raw_form():
    norm = NormalizationConstants({k: 0.0 for k in OBJECTIVES}, {k: 2.0 for k in OBJECTIVES})
    assert compound_objective({k: 1.0 for k in OBJECTIVES}, norm, "raw") == 1.0
    assert compound_objective({k: 0.0 for k in OBJECTIVES}, norm, "raw") == 8.0


def test_degenerate_normalization():
    with pytest.raises(ConfigurationError, match="mass"):
        NormalizationConstants({k: 1.0 for k in OBJECTIVES}, {"mass": 1.0, "neg_frequency": 2.0,
                                                               "displacement": 2.0})


def test_compound_requires_normalization():
    c = ConstraintSet(2.5e4, 2.0, 0.1, 33.5)
    with pytest.raises(ConfigurationError):
        ObjectiveSpec("compound", c)


def test_constraint_set_invariants():
    with pytest.raises(ConfigurationError):
        ConstraintSet(1.0, 1.0, 2.0, 1.0)
    with pytest.raises(ConfigurationError):
        ConstraintSet(0.0, 1.0, 0.1, 1.0)


f = st.floats(-0.5, 1.5)


@settings(max_examples=300)
@given(a=f, b=f, c=f, better=st.floats(0, 1), which=st.integers(0, 2))
def test_compound_monotone_and_bounded(a, b, c, better, which):
    values = f_of(a, b, c)
    score = compound_objective(values, NORM)
    assert 0.0 <= score <= 1.0
    improved = dict(values)
    improved[OBJECTIVES[which]] -= better
    assert compound_objective(improved, NORM) >= score


def test_argmax_invariant_under_power(bd_cfg):
    # Enumerate a small grid of designs (three area groups, four levels each).
    levels = [2.0, 8.0, 20.0, 33.5]
    groups = [(0, 2, 6, 7), (1, 3, 8, 9), (4, 5)]
    designs, raws = [], []
    for combo in itertools.product(levels, repeat=3):
        a = np.empty(10)
        for g, v in zip(groups, combo):
            a[list(g)] = v
        designs.append(a)
        raws.append(raw_objectives(analyze(bd_cfg.model, a)))
    best = {k: min(r[k] for r in raws) for k in OBJECTIVES}
    worst = {k: max(r[k] for r in raws) for k in OBJECTIVES}
    norm = NormalizationConstants(best, worst)
    scores = np.array([compound_objective(r, norm) for r in raws])
    for p in (0.3, 2.0, 5.0):
        powered = np.array([np.prod([((worst[k] - r[k]) / (worst[k] - best[k])) ** p for k in OBJECTIVES])
                            for r in raws])
        assert int(np.argmax(powered)) == int(np.argmax(scores))


def test_bland_start_feasible(bland_cfg):
    ov = evaluate(bland_cfg.objective, bland_cfg.model, np.full(10, 0.761))
    assert ov.feasible
    assert ov.value == pytest.approx(2089.09, abs=0.01)


def test_out_of_bounds_names_variable(bland_cfg):
    a = np.full(10, 0.761)
    a[3] = 0.1
    with pytest.raises(ValueError, match="A4"):
        evaluate(bland_cfg.objective, bland_cfg.model, a)


def test_stress_just_over_limit_names_member(bd_cfg):
    a = bm.IMPERIAL_TS_AREAS
    base = analyze(bd_cfg.model, a, modal=False)
    worst = int(np.argmax(np.abs(base.stresses)))
    factor = 1.001 * 2.5e4 / abs(base.stresses[worst])
    model = dataclasses.replace(bd_cfg.model, loads={n: (fx * factor, fy * factor)
                                                     for n, (fx, fy) in bd_cfg.model.loads.items()})
    spec = ObjectiveSpec("mass", ConstraintSet(2.5e4, 1e9, 0.1, 33.5))
    ov = evaluate(spec, model, a)
    assert not ov.feasible
    assert [v.label for v in ov.report.violations] == [f"m{worst + 1}"]
    assert ov.report.violations[0].value / 2.5e4 == pytest.approx(1.001 * np.sign(base.stresses[worst]))


def test_published_comparison_design_violates_displacement(bd_cfg):
    spec = ObjectiveSpec("mass", bd_cfg.constraints)
    ov = evaluate(spec, bd_cfg.model, bm.IMPERIAL_SA_AREAS)
    assert not ov.feasible
    assert {v.kind for v in ov.report.violations} == {"displacement"}
    assert ov.value == pytest.approx(7064.16, rel=1e-3)


def test_neg_frequency_sign(bd_cfg):
    spec = ObjectiveSpec("neg_frequency", bd_cfg.constraints)
    ov = evaluate(spec, bd_cfg.model, bm.IMPERIAL_TS_AREAS)
    assert ov.value == pytest.approx(-2 * np.pi * 28.36, rel=1e-3)


def test_evaluate_pure(bd_cfg):
    spec = ObjectiveSpec("displacement", bd_cfg.constraints)
    a = bm.IMPERIAL_TS_AREAS
    assert evaluate(spec, bd_cfg.model, a).value == evaluate(spec, bd_cfg.model, a.copy()).value


def test_resultant_displacement_mode(bd_cfg):
    c = dataclasses.replace(bd_cfg.constraints, displacement_mode="resultant")
    comp = evaluate(ObjectiveSpec("mass", bd_cfg.constraints), bd_cfg.model, bm.IMPERIAL_SA_AREAS).report
    res = evaluate(ObjectiveSpec("mass", c), bd_cfg.model, bm.IMPERIAL_SA_AREAS).report
    assert res.total >= comp.total


@pytest.fixture(scope="module")
def small_normalization(bd_cfg):
    cfg = SearchConfig(max_evaluations=3000, rng_seed=2, penalty_weight=1.0, on_converge="restart")
    return derive_normalization(bd_cfg.model, bd_cfg.constraints, cfg, np.full(10, 33.5), 0.05)


def test_derived_normalization_ordering(small_normalization):
    c = small_normalization.constants
    for k in OBJECTIVES:
        assert c.worst[k] >= c.best[k]
    assert c.best["mass"] <= 7062.14


def test_normalization_roundtrip_bit_identical(tmp_path, small_normalization, bd_cfg):
    c = small_normalization.constants
    path = tmp_path / "normalization.json"
    c.save(path)
    loaded = NormalizationConstants.load(path)
    a = bm.IMPERIAL_TS_AREAS
    s1 = evaluate(ObjectiveSpec("compound", bd_cfg.constraints, c), bd_cfg.model, a).value
    s2 = evaluate(ObjectiveSpec("compound", bd_cfg.constraints, loaded), bd_cfg.model, a).value
    assert s1 == s2


def test_truss_problem_bounds(bland_cfg):
    p = TrussProblem(bland_cfg.objective, bland_cfg.model, 0.001)
    assert p.bounds.dim == 10
    assert p.bounds.grid_size()[0] == 4783
    ev = p.evaluate(np.full(10, 0.761))
    assert ev.feasible and ev.violation == 0.0
