"""
Desk-scale reproduction of the closed-form results of both built-in scenarios

Grid solves at full resolution are marked slow.
"""
import math

import numpy as np
import pytest

from sweepctl.models.request import MuSpec
from sweepctl.modules.a_geometry import check_prox_regularity
from sweepctl.modules.b_dynamics import constant_policy, simulate, sup_gap
from sweepctl.modules.c_solver import (
    continuity_modulus_bound,
    mintime_at,
    oracle_mintime,
    petrov_check,
    reach_time_upper_bound,
    solve_mintime,
)
from sweepctl.modules.d_hjcheck import AugmentedPoint, hamiltonian_minus, hamiltonian_plus, verify_candidate
from sweepctl.modules.e_scenarios import DIAGONAL_LOW, example1_exact_T, example2_exact_T, example2_T3, in_region_D

LOG3 = math.log(3.0)


@pytest.mark.slow
def test_example1_grid_matches_closed_form(ex1, rng):
    grid = solve_mintime(ex1.moving_set, ex1.field, ex1.target, dx=5e-3, dt=2.5e-3)
    assert mintime_at(grid, 0.0, [-1.0]) == pytest.approx(1.0 + LOG3, abs=0.05)
    errors = []
    for _ in range(200):
        t = float(rng.uniform(0.0, 2.9))
        x = float(rng.uniform(t - 1.0, 2.0))
        errors.append(abs(mintime_at(grid, t, [x]) - example1_exact_T(t, x)))
    assert max(errors) <= 0.05


def test_example1_hit_time_and_dragging(ex1):
    h = 1e-4
    policy = constant_policy(ex1.field, [1.0])
    record = simulate(ex1.moving_set, ex1.field, policy, 0.0, [-1.0], ex1.target, h=h, horizon=3.0)
    assert record.status == "HIT"
    assert abs(record.hit_time - (1.0 + LOG3)) <= 5e-3
    dragged = record.times <= 1.0
    np.testing.assert_allclose(record.states[dragged, 0], record.times[dragged] - 1.0, atol=2.0 * h)


@pytest.mark.slow
def test_example2_grid_matches_closed_form(ex2, rng):
    grid = solve_mintime(ex2.moving_set, ex2.field, ex2.target, dx=0.02, tol=1e-9)
    assert grid.converged
    outside, inside = [], []
    while len(outside) < 200:
        x, y = float(rng.uniform(-5.0, 5.0)), float(rng.uniform(0.0, 4.0))
        # keep clear of the hole boundary where the stencil is partial
        if math.hypot(x, y - 2.0) < 1.05 or in_region_D(x, y):
            continue
        outside.append(abs(mintime_at(grid, 0.0, [x, y]) - (4.0 - y)))
    assert max(outside) <= 0.05
    for x, y in [(0.0, 0.8), (0.1, 0.9), (-0.2, 0.85), (0.3, 1.0)]:
        assert in_region_D(x, y)
        inside.append(abs(mintime_at(grid, 0.0, [x, y]) - example2_exact_T(x, y)))
    # the sliding region lies in the wedge |x| < sqrt(2)/2, y < 2 - sqrt(2)/2
    while len(inside) < 54:
        x, y = float(rng.uniform(-0.71, 0.71)), float(rng.uniform(DIAGONAL_LOW, 1.3))
        if not in_region_D(x, y) or math.hypot(x, y - 2.0) < 1.01:
            continue
        inside.append(abs(mintime_at(grid, 0.0, [x, y]) - example2_exact_T(x, y)))
    assert max(inside) <= 0.08


def test_example1_hand_values_of_the_hamiltonians(ex1):
    pt = AugmentedPoint.of(0.0, [-1.0], 1.0 + LOG3)
    assert hamiltonian_plus(ex1.moving_set, ex1.field, pt, (0.0, -1.0, 0.0), rho=4.0) == pytest.approx(-2.0)
    assert hamiltonian_plus(ex1.moving_set, ex1.field, pt, (1.0, -1.0, 0.0), rho=4.0) == pytest.approx(-1.0)
    # the combined normal of the start corner
    assert hamiltonian_minus(ex1.moving_set, ex1.field, pt, (-1.0, -1.0, -1.0), rho=4.0) == pytest.approx(-4.0)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["ex1", "ex2"])
def test_exact_candidates_satisfy_both_inequalities(name, request):
    bundle = request.getfixturevalue(name)
    report = verify_candidate(
        bundle.moving_set, bundle.field, bundle.target, bundle.exact_T, tol=1e-9, rho=bundle.rho, workers=2
    )
    assert report.passed, report.worst
    assert report.max_violation <= 1e-9


@pytest.mark.parametrize("name, starts, control", [
    ("ex1", ([-1.0], [-0.999]), [1.0]),
    ("ex1", ([0.5], [0.501]), [1.0]),
    ("ex2", ([-0.8, 0.0], [-0.799, 0.0]), [1.0, 1.0]),
])
@pytest.mark.parametrize("h", [1e-3, pytest.param(1e-4, marks=pytest.mark.slow)])
def test_common_control_trajectories_contract(name, starts, control, h, request):
    bundle = request.getfixturevalue(name)
    policy = constant_policy(bundle.field, control)
    first, second = (
        simulate(bundle.moving_set, bundle.field, policy, 0.0, x0, bundle.target, h=h, horizon=2.0)
        for x0 in starts
    )
    r, L_G = bundle.moving_set.prox_radius, bundle.field.lipschitz
    L = bundle.moving_set.lipschitz + bundle.field.bound
    rate = (2.0 * L / r if math.isfinite(r) else 0.0) + L_G
    n = min(len(first.times), len(second.times))
    gaps = np.linalg.norm(first.states[:n] - second.states[:n], axis=1)
    bounds = np.exp(rate * (first.times[:n] - first.times[0])) * 1e-3 + 10.0 * h
    assert np.all(gaps <= bounds)


def test_prox_regularity_certificate(ex2):
    assert check_prox_regularity(ex2.moving_set, 1.0).passed
    failing = check_prox_regularity(ex2.moving_set, 2.0)
    assert not failing.passed
    assert failing.witness is not None


def _integrator_gaps(bundle, x0, control, integrator, horizon=2.5):
    policy = constant_policy(bundle.field, control)
    args = (bundle.moving_set, bundle.field, policy, 0.0, x0, bundle.target)
    gaps = []
    for h in (4e-3, 2e-3, 1e-3):
        catching_up = simulate(*args, h=h, horizon=horizon)
        other = simulate(*args, h=h, horizon=horizon, integrator=integrator)
        gaps.append(sup_gap(catching_up, other))
    return gaps


@pytest.mark.parametrize("integrator", ["subdifferential", "projected"])
def test_integrators_converge_on_the_holed_box(ex2, integrator):
    gaps = _integrator_gaps(ex2, [-0.8, 0.0], [1.0, 1.0], integrator)
    for coarse, fine in zip(gaps, gaps[1:]):
        assert fine * 1.5 <= coarse
    assert gaps[-1] < 0.05


def test_bounded_form_matches_catching_up_on_the_interval(ex1):
    # both forms push along the moving left end, so they agree to rounding
    gaps = _integrator_gaps(ex1, [-1.0], [1.0], "subdifferential")
    for coarse, fine in zip(gaps, gaps[1:]):
        assert fine * 1.5 <= coarse or fine <= 1e-6


@pytest.mark.parametrize("mu, dx, expected", [
    (MuSpec(kind="constant", c=1.0), 0.1, 0.2),
    (MuSpec.parse("sqrt"), 0.01, 0.4),
])
def test_continuity_modulus_identities(mu, dx, expected):
    assert continuity_modulus_bound(mu, K=0.0, K_prime=1.0, dx=dx, dt=0.0, T_bound=1.0) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("mu, d, expected", [
    (MuSpec(kind="constant", c=1.0), 3.0, 6.0),
    (MuSpec.parse("sqrt"), 1.0, 4.0),
])
def test_reach_time_identities(mu, d, expected):
    assert reach_time_upper_bound(mu, d) == pytest.approx(expected, abs=1e-10)


def test_petrov_margins_at_the_documented_points(ex1, ex2):
    mu = MuSpec(kind="constant", c=0.5)
    corner = petrov_check(ex1.moving_set, ex1.field, ex1.target, mu, n_points=0, points=[[0.0, -1.0]])
    assert corner.points[0].margin >= 0.0
    arc = petrov_check(ex2.moving_set, ex2.field, ex2.target, mu, n_points=0, points=[[0.0, 0.0, 1.0], [0.0, 0.3, 2.0 - math.sqrt(0.91)]])
    assert len(arc.points) == 2
    assert all(p.margin >= 0.0 for p in arc.points)
    assert not arc.passed
    sampled = petrov_check(ex2.moving_set, ex2.field, ex2.target, mu, n_points=20, seed=3)
    assert len(sampled.points) + sampled.excluded_in_target == 20


def test_oracle_matches_the_first_example(ex1):
    result = oracle_mintime(ex1.moving_set, ex1.field, ex1.target, 0.0, [-1.0], n_segments=3)
    assert result.best_time <= 1.0 + LOG3 + 5e-3
    assert result.best_time >= 1.0 + LOG3 - 5e-3


@pytest.mark.slow
def test_oracle_matches_the_diagonal_start(ex2):
    result = oracle_mintime(ex2.moving_set, ex2.field, ex2.target, 0.0, [0.0, DIAGONAL_LOW], n_segments=4)
    assert result.best_time == pytest.approx(example2_T3(DIAGONAL_LOW), abs=5e-3)
