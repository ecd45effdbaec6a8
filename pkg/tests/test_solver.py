"""
Tests for the minimum-time grid solver, the oracle and the controllability diagnostics
"""
import math

import numpy as np
import pytest

from sweepctl.models.request import MuSpec
from sweepctl.modules.a_geometry import Box, HalfSpace, TargetSet
from sweepctl.modules.b_dynamics import BallField, simulate
from sweepctl.modules.c_solver import (
    NodeStatus,
    continuity_modulus_bound,
    greedy_policy,
    mintime_at,
    modulus_default_constants,
    oracle_mintime,
    petrov_check,
    petrov_descent,
    reach_time_upper_bound,
    solve_mintime,
)
from sweepctl.utils.exceptions import (
    BudgetExceeded,
    DivergentIntegral,
    EmptyIntersection,
    GridTooCoarse,
    OutsideGraph,
)

LOG3 = math.log(3.0)


@pytest.fixture
def interval_grid(unit_interval, unit_speed, right_end):
    return solve_mintime(unit_interval, unit_speed, right_end, dx=0.05)


def test_static_value_iteration_matches_distance_to_target(interval_grid):
    grid = interval_grid
    assert grid.autonomous
    assert grid.converged
    assert grid.dt == pytest.approx(0.05)
    for x in (0.0, 0.3, 0.55, 0.9):
        assert mintime_at(grid, 0.0, [x]) == pytest.approx(1.0 - x, abs=1e-6)
    assert mintime_at(grid, 0.0, [1.0]) == 0.0


def test_node_status_counts(interval_grid):
    counts = interval_grid.counts()
    assert counts["TARGET"] >= 1
    assert counts["UNREACHED"] == 0
    assert counts["OUTSIDE_C"] >= 2
    assert sum(counts.values()) == interval_grid.values.size


def test_grid_frame_layout(interval_grid):
    frame = interval_grid.to_frame()
    assert list(frame.columns) == ["t", "x1", "T", "status"]
    assert frame["t"].isna().all()
    assert set(frame["status"]) <= {s.name for s in NodeStatus}


def test_probe_outside_the_constraint(interval_grid):
    with pytest.raises(OutsideGraph):
        mintime_at(interval_grid, 0.0, [1.5])


def test_empty_intersection(unit_box):
    field = BallField(1.0, dim=2, bound=1.0)
    far = TargetSet(HalfSpace([-1.0, 0.0], -5.0))
    with pytest.raises(EmptyIntersection):
        solve_mintime(unit_box, field, far, dx=0.1)


def test_time_step_must_leave_the_stencil(unit_interval, unit_speed, right_end):
    with pytest.raises(GridTooCoarse):
        solve_mintime(unit_interval, unit_speed, right_end, dx=0.1, dt=0.01)


def test_cells_larger_than_the_prox_radius(ex2):
    with pytest.raises(GridTooCoarse):
        solve_mintime(ex2.moving_set, ex2.field, ex2.target, dx=0.8)


def test_moving_constraint_uses_backward_recursion(ex1):
    grid = solve_mintime(ex1.moving_set, ex1.field, ex1.target, dx=0.05)
    assert not grid.autonomous
    assert grid.times[0] == 0.0 and grid.times[-1] == pytest.approx(3.0)
    assert grid.values.shape == (grid.times.size, grid.axes[0].size)
    # coarse grid, loose agreement with 1 + log 3
    assert mintime_at(grid, 0.0, [-1.0]) == pytest.approx(1.0 + LOG3, abs=0.2)
    assert mintime_at(grid, 2.5, [2.0]) == 0.0


def test_greedy_policy_reaches_the_target(interval_grid, unit_interval, unit_speed, right_end):
    policy = greedy_policy(interval_grid)
    record = simulate(unit_interval, unit_speed, policy, 0.0, [0.2], right_end, h=0.01, horizon=2.0)
    assert record.status == "HIT"
    assert record.hit_time == pytest.approx(0.8, abs=0.02)


def test_oracle_finds_the_straight_run(unit_interval, unit_speed, right_end):
    result = oracle_mintime(unit_interval, unit_speed, right_end, 0.0, [0.0], n_segments=4)
    assert result.best_time == pytest.approx(1.0, abs=2e-3)
    assert result.controls[0] == [1.0]
    assert result.evaluated > 0


def test_oracle_at_a_target_point(unit_interval, unit_speed, right_end):
    result = oracle_mintime(unit_interval, unit_speed, right_end, 0.0, [1.0])
    assert result.best_time == 0.0
    assert result.controls == []


def test_oracle_budget(ex2):
    with pytest.raises(BudgetExceeded):
        oracle_mintime(ex2.moving_set, ex2.field, ex2.target, 0.0, [0.0, 0.0], n_segments=10, budget=20000)


@pytest.mark.parametrize("c, upper, expected", [(0.5, 1.0, 4.0), (2.0, 3.0, 3.0), (1.0, 0.0, 0.0)])
def test_reach_time_bound_for_constant_rate(c, upper, expected):
    assert reach_time_upper_bound(MuSpec(kind="constant", c=c), upper) == pytest.approx(expected)


def test_reach_time_bound_for_square_root_rate():
    # 2 * integral_0^u r^(-1/2) dr = 4 sqrt(u)
    assert reach_time_upper_bound(MuSpec.parse("sqrt"), 0.25) == pytest.approx(2.0, rel=1e-8)


def test_linear_rate_is_not_integrable():
    with pytest.raises(DivergentIntegral):
        reach_time_upper_bound(MuSpec(kind="power", c=1.0, alpha=1.0), 1.0)


def test_tabulated_rate():
    mu = MuSpec.parse("table:0:1,1:1")
    assert reach_time_upper_bound(mu, 0.5) == pytest.approx(1.0)


def test_continuity_modulus_bound():
    mu = MuSpec(kind="constant", c=0.5)
    assert continuity_modulus_bound(mu, K=0.0, K_prime=1.0, dx=0.01, dt=0.0, T_bound=1.0) == pytest.approx(0.04)
    upper = math.exp(2.0) * 0.01 + 0.5 * math.sqrt(0.04)
    assert continuity_modulus_bound(mu, K=1.0, K_prime=0.5, dx=0.01, dt=0.04, T_bound=2.0) == pytest.approx(4.0 * upper)
    with pytest.raises(ValueError):
        continuity_modulus_bound(mu, K=1.0, K_prime=1.0, dx=-0.1, dt=0.0, T_bound=1.0)


def test_modulus_defaults(ex1, ex2):
    assert modulus_default_constants(ex1.moving_set, ex1.field) == (1.0, 1.0)
    # L_G = 0 and r = 1 for the holed box
    assert modulus_default_constants(ex2.moving_set, ex2.field) == (1.0, 1.0)


def test_petrov_condition_in_the_interior(unit_interval, unit_speed, right_end):
    report = petrov_check(
        unit_interval, unit_speed, right_end, MuSpec(kind="constant", c=0.5),
        delta=0.1, n_points=0, points=[[0.0, 0.5]]
    )
    assert len(report.points) == 1
    point = report.points[0]
    assert point.margin == pytest.approx(-0.5)
    assert point.v_bar == [1.0]
    assert report.passed


def test_petrov_check_excludes_target_points(unit_interval, unit_speed, right_end):
    report = petrov_check(
        unit_interval, unit_speed, right_end, MuSpec(kind="constant", c=0.5),
        n_points=0, points=[[0.0, 1.0]]
    )
    assert report.points == []
    assert report.excluded_in_target == 1
    assert report.worst_margin is None


def test_petrov_descent_reaches_the_target(unit_interval, unit_speed, right_end):
    report = petrov_descent(unit_interval, unit_speed, right_end, MuSpec(kind="constant", c=0.5), 0.0, [0.0])
    assert report.reached
    assert report.elapsed == pytest.approx(1.0, abs=1e-3)
    assert report.upper_bound == pytest.approx(4.0)
    assert report.elapsed <= report.upper_bound
    assert np.all(np.diff(report.distances) <= 1e-12)
