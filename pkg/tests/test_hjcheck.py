"""
Tests for the Hamiltonians, epigraph/hypograph normals and the
Hamilton-Jacobi and invariance verifications
"""
import math

import numpy as np
import pytest

from sweepctl.modules.a_geometry import HalfSpace
from sweepctl.modules.d_hjcheck import (
    AugmentedPoint,
    CandidateValueFunction,
    SamplePlan,
    epi_normals,
    graph_normals,
    hamiltonian_minus,
    hamiltonian_plus,
    hypo_normals,
    limiting_gradients,
    plan_points,
    strong_invariance_check,
    verify_candidate,
    weak_invariance_check,
)
from sweepctl.modules.e_scenarios import example1_perturbed_candidate
from sweepctl.utils.exceptions import EmptyIntersection, NotInGraph, SignConditionFailed, ValueMismatch

LOG3 = math.log(3.0)
START = AugmentedPoint.of(0.0, [-1.0], 1.0 + LOG3)


@pytest.mark.parametrize("p, expected", [
    ((0.0, -1.0, 0.0), -2.0),
    ((1.0, -1.0, 0.0), -1.0),
])
def test_upper_hamiltonian_at_the_start_corner(ex1, p, expected):
    assert hamiltonian_plus(ex1.moving_set, ex1.field, START, p, rho=4.0) == pytest.approx(expected)


def test_lower_hamiltonian_at_the_start_corner(ex1):
    assert hamiltonian_minus(ex1.moving_set, ex1.field, START, (-1.0, 0.0, -1.0), rho=4.0) == pytest.approx(0.0)
    combined = np.array([-1.0, -1.0, -1.0]) / math.sqrt(3.0)
    assert hamiltonian_minus(ex1.moving_set, ex1.field, START, combined, rho=4.0) == pytest.approx(-4.0 / math.sqrt(3.0))


def test_hamiltonian_defaults_rho_to_the_speed_bound(ex1):
    assert hamiltonian_plus(ex1.moving_set, ex1.field, START, (0.0, -1.0, 0.0)) == pytest.approx(-2.0)


def test_hamiltonian_outside_the_graph(ex1):
    with pytest.raises(NotInGraph):
        hamiltonian_minus(ex1.moving_set, ex1.field, AugmentedPoint.of(0.5, [-1.0], 0.0), (0.0, 1.0, 0.0))
    with pytest.raises(NotInGraph):
        hamiltonian_plus(ex1.moving_set, ex1.field, AugmentedPoint.of(4.0, [2.0], 0.0), (0.0, 1.0, 0.0))


def test_autonomous_covector(ex2):
    pt = AugmentedPoint.of(0.0, [3.0, 0.0], 4.0)
    # (p_x, p_lambda) = ((0, -1), -1): bottom face normal is (0, -1), G reaches up at speed 1
    value = hamiltonian_minus(ex2.moving_set, ex2.field, pt, (0.0, -1.0, -1.0), rho=math.sqrt(2.0))
    assert value == pytest.approx(-math.sqrt(2.0) - 1.0 + 1.0)


def test_graph_normals_at_the_start_corner(ex1):
    normals = graph_normals(ex1.moving_set, 0.0, [-1.0])
    assert sorted(tuple(n) for n in normals) == [(-1.0, 0.0), (1.0, -1.0)]
    assert graph_normals(ex1.moving_set, 1.0, [1.0]) == []


def test_smooth_epi_and_hypo_normals(ex1):
    candidate = ex1.exact_T
    theta = candidate(2.0, [1.5])
    assert theta == pytest.approx(LOG3 - math.log(2.5))
    pt = AugmentedPoint.of(2.0, [1.5], theta)
    epi = epi_normals(candidate, ex1.moving_set, pt)
    hypo = hypo_normals(candidate, ex1.moving_set, pt)
    np.testing.assert_allclose(epi[0].vector, [0.0, -0.4, -1.0])
    np.testing.assert_allclose(hypo[0].vector, [0.0, 0.4, 1.0])
    assert not epi[0].horizontal


def test_normals_need_lambda_on_the_graph(ex1):
    pt = AugmentedPoint.of(2.0, [1.5], 5.0)
    with pytest.raises(ValueMismatch):
        epi_normals(ex1.exact_T, ex1.moving_set, pt)


def test_limiting_gradients_detect_a_convex_kink(unit_interval):
    candidate = CandidateValueFunction(value=lambda t, x: abs(x[0] - 0.5) + 1.0, dim=1, autonomous=True)
    gradients, kind = limiting_gradients(candidate, unit_interval, 0.0, np.array([0.5]))
    assert kind == "convex"
    np.testing.assert_allclose(sorted(g[0] for g in gradients), [-1.0, 1.0], atol=1e-6)
    smooth, kind = limiting_gradients(candidate, unit_interval, 0.0, np.array([0.2]))
    assert kind == "smooth"
    np.testing.assert_allclose(smooth[0], [-1.0], atol=1e-6)


def test_plan_points_cover_grid_and_features(ex1):
    plan = SamplePlan(dt=0.5, dx=0.5, points=[(0.25, [0.0])])
    points = plan_points(ex1.moving_set, plan, ex1.exact_T)
    times = {t for t, _ in points}
    assert {0.0, 0.5, 3.0} <= times
    assert points[-1][0] == 0.25
    np.testing.assert_allclose(points[-1][1], [0.0])
    for t, x in points:
        assert ex1.moving_set.contains(t, x)


def test_exact_candidate_example1_passes(ex1):
    plan = SamplePlan(dt=0.25, dx=0.25)
    report = verify_candidate(ex1.moving_set, ex1.field, ex1.target, ex1.exact_T, plan=plan, rho=ex1.rho)
    assert report.passed, report.worst
    assert report.max_violation <= report.tol
    assert report.n_probes > 0


def test_perturbed_candidate_example1_fails(ex1):
    plan = SamplePlan(dt=0.1, dx=0.1)
    candidate = example1_perturbed_candidate()
    report = verify_candidate(ex1.moving_set, ex1.field, ex1.target, candidate, plan=plan, rho=ex1.rho)
    assert not report.passed
    assert report.max_violation > 0.1
    assert report.worst.inequality in ("H-", "H+")


def test_exact_candidate_example2_passes(ex2):
    plan = SamplePlan(dx=0.1)
    report = verify_candidate(ex2.moving_set, ex2.field, ex2.target, ex2.exact_T, plan=plan, rho=ex2.rho)
    assert report.passed, report.worst


def test_threads_do_not_change_the_verdict(ex2):
    plan = SamplePlan(dx=0.25)
    serial = verify_candidate(ex2.moving_set, ex2.field, ex2.target, ex2.exact_T, plan=plan)
    threaded = verify_candidate(ex2.moving_set, ex2.field, ex2.target, ex2.exact_T, plan=plan, workers=3)
    assert len(serial.records) == len(threaded.records)
    assert serial.max_violation == threaded.max_violation


def test_sign_condition(ex1):
    constant = CandidateValueFunction(value=lambda t, x: 1.0, dim=1, name="constant")
    with pytest.raises(SignConditionFailed):
        verify_candidate(ex1.moving_set, ex1.field, ex1.target, constant, plan=SamplePlan(dt=0.5, dx=0.5))


def test_invariance_near_the_target_holds(ex1):
    K = HalfSpace([-1.0], -1.9)
    plan = SamplePlan(dt=0.05)
    assert weak_invariance_check(ex1.moving_set, ex1.field, K, plan=plan, rho=ex1.rho).passed
    assert strong_invariance_check(ex1.moving_set, ex1.field, K, plan=plan, rho=ex1.rho).passed


def test_weak_invariance_fails_when_every_velocity_leaves(ex1):
    K = HalfSpace([1.0], 1.5)
    report = weak_invariance_check(ex1.moving_set, ex1.field, K, plan=SamplePlan(dt=0.05), rho=ex1.rho)
    assert not report.passed
    assert report.worst.inequality == "Hmeno"
    assert report.worst.x == pytest.approx([1.5])


def test_strong_invariance_fails_when_some_velocity_leaves(ex1):
    K = HalfSpace([-1.0], -0.5)
    plan = SamplePlan(dt=0.05)
    assert weak_invariance_check(ex1.moving_set, ex1.field, K, plan=plan, rho=ex1.rho).passed
    strong = strong_invariance_check(ex1.moving_set, ex1.field, K, plan=plan, rho=ex1.rho)
    assert not strong.passed
    assert strong.worst.inequality == "Hpiu"


def test_invariance_needs_an_intersection(ex1):
    with pytest.raises(EmptyIntersection):
        weak_invariance_check(ex1.moving_set, ex1.field, HalfSpace([-1.0], -5.0))
