import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from tabutruss import benchmarks as bm
from tabutruss.fem import (G_IN_PER_S2, SolverError, TrussModel, UnstableStructureError, ZeroLengthMemberError,
                           analyze, assemble, element_mass, element_stiffness, fundamental_frequency, member_stress,
                           solve_static, standard_ten_bar_model, total_displacement, total_mass)


def bar(dx, dy, E=1.0, rho=1.0):
    return TrussModel(nodes=np.array([[0.0, 0.0], [dx, dy]]), members=[(0, 1)], supports={0},
                      loads={1: (0.0, 0.0)}, youngs_modulus=E, density=rho)


@pytest.fixture(scope="module")
def unit_ten_bar():
    return standard_ten_bar_model(1.0, 1.0, 1.0, 1.0)


def test_member_lengths():
    m = standard_ten_bar_model(3.0, 1.0, 1.0, 1.0)
    assert np.allclose(m.lengths[:6], 3.0)
    assert np.allclose(m.lengths[6:], 3.0 * math.sqrt(2))
    assert m.lengths[6] == pytest.approx(4.2426, abs=1e-4)


def test_free_dof_order():
    m = standard_ten_bar_model(1.0, 1.0, 1.0, 1.0)
    assert m.free_nodes == (0, 1, 2, 3)
    assert list(m.free_dofs) == list(range(8))
    assert list(m.load_vector) == [0, 0, 0, -1, 0, 0, 0, -1]


def test_invalid_member_rejected():
    with pytest.raises(ValueError):
        TrussModel(nodes=np.zeros((2, 2)), members=[(0, 0)], supports={0}, loads={}, youngs_modulus=1, density=1)


def test_horizontal_bar_stiffness():
    k = element_stiffness(bar(1, 0), 0, 1.0)
    assert np.allclose(k, [[1, 0, -1, 0], [0, 0, 0, 0], [-1, 0, 1, 0], [0, 0, 0, 0]])


def test_vertical_bar_stiffness():
    k = element_stiffness(bar(0, 1), 0, 1.0)
    assert np.allclose(k, [[0, 0, 0, 0], [0, 1, 0, -1], [0, 0, 0, 0], [0, -1, 0, 1]])


def test_diagonal_bar_stiffness():
    k = element_stiffness(bar(1, 1), 0, 1.0)
    assert np.allclose(np.abs(k), 1 / (2 * math.sqrt(2)))
    assert np.allclose(k, k.T)


def test_zero_length_member():
    with pytest.raises(ZeroLengthMemberError):
        element_stiffness(bar(0, 0), 0, 1.0)


def test_element_mass_unit():
    me = element_mass(bar(1, 0), 0, 1.0)
    assert np.allclose(np.diag(me), 1 / 3)
    assert me[0, 2] == pytest.approx(1 / 6) and me[1, 3] == pytest.approx(1 / 6)
    # x rows carry rho*A*l in total, likewise y rows.
    assert me[0::2].sum() == pytest.approx(1.0)
    assert me[1::2].sum() == pytest.approx(1.0)


def test_element_mass_rotation_invariant():
    horiz = element_mass(bar(math.sqrt(2), 0), 0, 1.0)
    diag = element_mass(bar(1, 1), 0, 1.0)
    assert np.allclose(horiz, diag, rtol=1e-14)


def test_lumped_mass():
    m = TrussModel(nodes=np.array([[0.0, 0.0], [2.0, 0.0]]), members=[(0, 1)], supports={0}, loads={},
                   youngs_modulus=1, density=3, mass_matrix="lumped")
    assert np.allclose(element_mass(m, 0, 1.0), 3.0 * np.eye(4))


def test_assemble_symmetric_and_linear(unit_ten_bar, rng):
    a = rng.uniform(0.5, 2.0, 10)
    k, m = assemble(unit_ten_bar, a)
    assert np.max(np.abs(k - k.T)) == 0
    assert np.max(np.abs(m - m.T)) == 0
    k2, m2 = assemble(unit_ten_bar, 2 * a)
    assert np.allclose(k2, 2 * k, rtol=1e-15) and np.allclose(m2, 2 * m, rtol=1e-15)


def test_assemble_hand_row(unit_ten_bar):
    # Row n1x with unit areas: m2 (n3-n1, horizontal) and m10 (n4-n1, 45 deg) meet at n1;
    # m6 (n1-n2) is vertical and adds nothing in x.
    k, _ = assemble(unit_ten_bar, np.ones(10))
    h = 1 / (2 * math.sqrt(2))
    expected = np.array([1 + h, h, 0, 0, -1, 0, -h, -h])
    assert np.allclose(k[0], expected, rtol=1e-14)


def test_unstable_structure():
    m = TrussModel(nodes=np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]), members=[(0, 1), (1, 2)],
                   supports={0}, loads={2: (1.0, 0.0)}, youngs_modulus=1, density=1)
    with pytest.raises(UnstableStructureError):
        assemble(m, [1.0, 1.0])


def test_solve_static_non_pd():
    with pytest.raises(SolverError):
        solve_static(-np.eye(3), np.ones(3))


def test_member_stress_rigid_translation(unit_ten_bar):
    u = np.tile([0.3, -0.7], 6)
    assert all(abs(member_stress(unit_ten_bar, e, u)) < 1e-15 for e in range(10))


def test_member_stress_tension_positive():
    m = bar(1, 0)
    assert member_stress(m, 0, np.array([0.0, 0.0, 0.001, 0.0])) == pytest.approx(0.001)


def test_total_mass_metric_start():
    m = standard_ten_bar_model(3.0, 2.07e8, 7850.0, 500.0, area_scale=0.01)
    expected = 7850 * 3 * 0.00761 * (6 + 4 * math.sqrt(2))
    assert total_mass(m, np.full(10, 0.761)) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(2089.2, abs=0.2)


def test_total_mass_imperial_reference(bd_cfg):
    assert total_mass(bd_cfg.model, bm.IMPERIAL_SA_AREAS) == pytest.approx(7064.16, rel=1e-3)


def test_total_mass_linear(bd_cfg):
    a = bm.IMPERIAL_TS_AREAS
    assert total_mass(bd_cfg.model, 0.37 * a) == pytest.approx(0.37 * total_mass(bd_cfg.model, a), rel=1e-14)


def test_frequency_one_dof():
    assert fundamental_frequency(np.array([[2.0]]), np.array([[0.5]])) == pytest.approx(2.0)


def test_frequency_two_dof():
    assert fundamental_frequency(np.array([[2.0, -1.0], [-1.0, 2.0]]), np.eye(2)) == pytest.approx(1.0)


def test_frequency_non_pd_mass():
    with pytest.raises(SolverError):
        fundamental_frequency(np.eye(2), np.array([[1.0, 0.0], [0.0, -1.0]]))


def test_total_displacement_examples():
    assert total_displacement(np.zeros((4, 2))) == 0
    assert total_displacement(np.array([[3.0, 4.0], [0, 0], [0, 0], [0, 0]])) == pytest.approx(5.0)


def test_imperial_reference_response(bd_cfg):
    res = analyze(bd_cfg.model, bm.IMPERIAL_TS_AREAS)
    assert res.frequency_hz == pytest.approx(28.427, rel=0.02)
    assert res.total_displacement == pytest.approx(4.38, rel=0.02)
    assert np.all(np.abs(res.stresses) <= 25_000)


def test_metric_reference_sits_on_limits(bland_cfg):
    res = analyze(bland_cfg.model, bm.METRIC_TS_AREAS)
    assert res.mass == pytest.approx(1103.8, abs=0.5)
    assert np.max(np.abs(res.stresses)) / 1.6e5 == pytest.approx(1.0, abs=1e-3)
    assert np.max(np.abs(res.displacements)) / 0.015 == pytest.approx(1.0, abs=1e-3)


def test_lumped_lowers_frequency(bd_cfg):
    lumped = standard_ten_bar_model(360, 1e7, 0.1, 1e5, dynamic_mass_factor=1 / G_IN_PER_S2, mass_matrix="lumped")
    f_c = analyze(bd_cfg.model, bm.IMPERIAL_TS_AREAS).omega
    f_l = analyze(lumped, bm.IMPERIAL_TS_AREAS).omega
    assert f_l < f_c


def test_node_force_balance(bd_cfg, rng):
    model = bd_cfg.model
    a = rng.uniform(0.1, 33.5, 10)
    res = analyze(model, a, modal=False)
    net = np.zeros((len(model.nodes), 2))
    for e, (i, j) in enumerate(model.members):
        d = model.nodes[j] - model.nodes[i]
        axis = d / np.linalg.norm(d)
        net[i] += res.member_forces[e] * axis
        net[j] -= res.member_forces[e] * axis
    for node, (fx, fy) in model.loads.items():
        net[node] += (fx, fy)
    scale = np.linalg.norm(model.load_vector)
    for node in model.free_nodes:
        assert np.linalg.norm(net[node]) <= 1e-8 * scale


areas = st.lists(st.floats(0.1, 33.5), min_size=10, max_size=10).map(np.array)


@settings(max_examples=40, deadline=None)
@given(a=areas, c=st.floats(0.05, 20.0))
def test_frequency_scale_invariance(bd_cfg, a, c):
    w1 = analyze(bd_cfg.model, a).omega
    w2 = analyze(bd_cfg.model, c * a).omega
    assert w2 == pytest.approx(w1, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(a=areas, c=st.floats(-10.0, 10.0))
def test_displacement_linear_in_load(bd_cfg, a, c):
    k, _ = assemble(bd_cfg.model, a)
    f = bd_cfg.model.load_vector
    assert np.allclose(solve_static(k, c * f), c * solve_static(k, f), rtol=1e-10, atol=1e-300)


@settings(max_examples=40, deadline=None)
@given(a=areas)
def test_pd_and_equilibrium(bd_cfg, a):
    k, m = assemble(bd_cfg.model, a)
    assert np.all(np.linalg.eigvalsh(k) > 0) and np.all(np.linalg.eigvalsh(m) > 0)
    assert analyze(bd_cfg.model, a).residual <= 1e-8


def test_eigen_against_dense_generalized_solver(bland_cfg, bd_cfg):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(100):
        cfg = bd_cfg if i % 2 else bland_cfg
        c = cfg.constraints
        a = rng.uniform(c.a_min, c.a_max, 10)
        k, m = assemble(cfg.model, a)
        ref = math.sqrt(scipy.linalg.eigh(k, m, eigvals_only=True)[0])
        worst = max(worst, abs(fundamental_frequency(k, m) / ref - 1))
    assert worst <= 1e-6
