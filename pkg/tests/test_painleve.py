import numpy as np
import pytest
from scipy.special import airy

from multicritical import painleve
from multicritical.fredholm import tw_tail
from multicritical.painleve import (
    hierarchy_residual,
    residual_coupled,
    solve_even_hierarchy,
    solve_p3_coupled,
    solve_single_interval,
    spacing_relation_residuals,
)


@pytest.fixture(scope="module")
def edge_trajectory():
    return solve_even_hierarchy(2, s_end=-2.0, n_points=201)


def test_edge_solution_follows_airy_far_right(edge_trajectory):
    mask = (edge_trajectory.s >= 4.0) & (edge_trajectory.s <= 8.0)
    assert mask.sum() > 10
    q = edge_trajectory.q()[mask]
    assert np.max(np.abs(q - airy(edge_trajectory.s[mask])[0])) <= 1e-6


def test_edge_solution_matches_fredholm_at_origin():
    traj = solve_even_hierarchy(2, s_end=0.0, n_points=41)
    assert traj.s[-1] == 0.0
    curve = tw_tail(2, [0.0])
    assert traj.q()[-1] == pytest.approx(curve.q[0], abs=1e-5)
    assert np.exp(traj.log_F[-1]) == pytest.approx(curve.F[0], abs=1e-5)


@pytest.mark.parametrize("order", [2, 4, 6])
def test_even_hierarchy_residual(order):
    traj = solve_even_hierarchy(order, s_end=-3.0, n_points=61)
    assert np.max(hierarchy_residual(traj)) <= 1e-8


def test_order_six_agrees_with_fredholm():
    traj = solve_even_hierarchy(6, s_end=-1.0, n_points=23)
    curve = tw_tail(6, [traj.s[-1]])
    assert np.exp(traj.log_F[-1]) == pytest.approx(curve.F[0], abs=1e-8)


def test_order_three_conservation():
    traj = solve_p3_coupled(8.0, 2.0)
    assert traj.drift() <= 1e-8
    assert residual_coupled(3, traj) <= 10 * 1e-10
    assert np.max(np.abs(traj.u(0) - traj.v(0))) <= 1e-10


def test_order_five_residual():
    traj = solve_single_interval(5, 8.0, 2.0, tol=1e-10, n_points=61)
    assert residual_coupled(5, traj) <= 1e-6
    far = hierarchy_residual(traj)[traj.s >= 6.0]
    assert np.max(far) <= 1e-8


def test_order_seven_sign_flip_is_detected(monkeypatch):
    traj = solve_single_interval(7, 8.0, 2.0, tol=1e-10, n_points=41)
    good = residual_coupled(7, traj)
    original = painleve._odd_rhs
    monkeypatch.setattr(painleve, "_odd_rhs", lambda order, s, q, p: original(order, -s, q, p))
    bad = residual_coupled(7, traj)
    assert good <= 1e-6
    assert bad > 1e3 * good


def test_residual_requires_matching_order():
    traj = solve_p3_coupled(8.0, 6.0, n_points=11)
    with pytest.raises(ValueError):
        residual_coupled(5, traj)
    with pytest.raises(ValueError):
        residual_coupled(4, traj)


def test_integration_direction_is_checked():
    with pytest.raises(ValueError):
        solve_single_interval(3, 2.0, 8.0)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_spacing_relations(s):
    res = spacing_relation_residuals(s)
    assert res["uv_derivative"] <= 1e-4
    assert res["resolvent"] <= 1e-6
    assert res["second_derivative"] <= 1e-6
    assert res["log_F_second"] <= 1e-6


def test_spacing_relations_only_for_order_three():
    with pytest.raises(ValueError):
        spacing_relation_residuals(1.0, order=5)

