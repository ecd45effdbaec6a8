"""
Tests for moving sets, projections, normal cones and the prox-regularity check
"""
import math

import numpy as np
import pytest

from sweepctl.modules.a_geometry import (
    Ball,
    Box,
    BoxMinusBall,
    HalfSpace,
    MovingInterval,
    SignedDistanceSet,
    TargetSet,
    check_prox_regularity,
    check_target_semiconcavity,
    distance,
    estimate_set_lipschitz,
    hausdorff_distance,
    normal_cone_contains,
    normal_generators,
    project,
    target_superdifferential,
)
from sweepctl.utils.exceptions import InsideTarget, NotInSet, OutsideReach, TimeOutOfDomain


def test_moving_interval_distance_and_projection(ex1):
    C = ex1.moving_set
    assert C.time_domain == (0.0, 3.0)
    assert distance(C, 0.5, [-1.0]) == pytest.approx(0.5)
    assert distance(C, 0.5, [1.0]) == 0.0
    np.testing.assert_allclose(project(C, 0.5, [-1.0]), [-0.5])
    np.testing.assert_allclose(project(C, 2.5, [3.0]), [2.0])


def test_moving_interval_rejects_times_outside_domain(ex1):
    with pytest.raises(TimeOutOfDomain):
        distance(ex1.moving_set, 3.5, [2.0])
    with pytest.raises(TimeOutOfDomain):
        distance(ex1.moving_set, -0.1, [0.0])


def test_moving_interval_normals_and_speeds(ex1):
    C = ex1.moving_set
    left = normal_generators(C, 0.5, [-0.5])
    assert len(left) == 1
    np.testing.assert_allclose(left[0], [-1.0])
    # left end moves right at unit speed: outward normal speed -1
    assert C.boundary_normal_speed(0.5, np.array([-0.5]), left[0]) == -1.0
    right = normal_generators(C, 0.5, [2.0])
    np.testing.assert_allclose(right[0], [1.0])
    assert C.boundary_normal_speed(0.5, np.array([2.0]), right[0]) == 0.0
    assert normal_generators(C, 0.5, [0.7]) == []


def test_normal_generators_outside_set_raises(ex1):
    with pytest.raises(NotInSet):
        normal_generators(ex1.moving_set, 1.0, [-0.5])


def test_box_corner_has_two_normals():
    box = Box([0.0, 0.0], [1.0, 1.0])
    gens = normal_generators(box, 0.0, [1.0, 1.0])
    assert len(gens) == 2
    assert normal_cone_contains(box, 0.0, [1.0, 1.0], [1.0, 2.0])
    assert not normal_cone_contains(box, 0.0, [1.0, 1.0], [-1.0, 1.0])


def test_box_minus_ball_projects_out_of_the_hole(ex2):
    C = ex2.moving_set
    assert C.prox_radius == 1.0
    np.testing.assert_allclose(project(C, 0.0, [0.0, 2.5]), [0.0, 3.0])
    assert distance(C, 0.0, [0.0, 2.5]) == pytest.approx(0.5)
    gens = normal_generators(C, 0.0, [0.0, 1.0])
    assert len(gens) == 1
    np.testing.assert_allclose(gens[0], [0.0, 1.0])


def test_box_minus_ball_corner_of_box_and_hole_bottom(ex2):
    gens = normal_generators(ex2.moving_set, 0.0, [-5.0, 0.0])
    assert sorted(map(tuple, gens)) == [(-1.0, 0.0), (0.0, -1.0)]


def test_projection_at_the_hole_center_is_outside_reach(ex2):
    with pytest.raises(OutsideReach):
        project(ex2.moving_set, 0.0, [0.0, 2.0])


def test_halfspace_and_ball():
    H = HalfSpace([0.0, 2.0], 4.0)
    np.testing.assert_allclose(H.normal, [0.0, 1.0])
    assert H.offset == pytest.approx(2.0)
    assert distance(H, 0.0, [3.0, 5.0]) == pytest.approx(3.0)
    B = Ball([0.0, 0.0], 2.0)
    np.testing.assert_allclose(project(B, 0.0, [4.0, 0.0]), [2.0, 0.0])
    assert B.contains(0.0, [1.0, 1.0])


def test_prox_regularity_of_the_holed_box(ex2):
    ok = check_prox_regularity(ex2.moving_set, 1.0, n_samples=2000, seed=0)
    assert ok.passed
    assert ok.witness is None
    too_large = check_prox_regularity(ex2.moving_set, 2.0, n_samples=2000, seed=0)
    assert not too_large.passed
    assert too_large.worst_margin > 0.0
    assert too_large.witness is not None


def test_prox_regularity_is_reproducible(ex2):
    first = check_prox_regularity(ex2.moving_set, 2.0, n_samples=500, seed=7)
    second = check_prox_regularity(ex2.moving_set, 2.0, n_samples=500, seed=7)
    assert first.worst_margin == second.worst_margin


def test_convex_sets_pass_every_radius():
    report = check_prox_regularity(Box([0.0, 0.0], [1.0, 1.0]), math.inf, n_samples=500)
    assert report.passed


@pytest.mark.parametrize("s, t, expected", [(0.0, 1.0, 1.0), (0.5, 2.0, 1.5), (1.0, 1.0, 0.0)])
def test_hausdorff_distance_of_the_moving_interval(ex1, s, t, expected):
    assert hausdorff_distance(ex1.moving_set, s, t) == pytest.approx(expected)


def test_estimated_lipschitz_constant(ex1, ex2):
    assert estimate_set_lipschitz(ex1.moving_set) == pytest.approx(1.0)
    assert estimate_set_lipschitz(ex2.moving_set) == 0.0


def test_target_superdifferential():
    S = TargetSet(HalfSpace([-1.0], -2.0))
    np.testing.assert_allclose(target_superdifferential(S, [1.0])[0], [-1.0])
    np.testing.assert_allclose(target_superdifferential(S, [2.0])[0], [-1.0])
    with pytest.raises(InsideTarget):
        target_superdifferential(S, [3.0])


def test_halfspace_target_distance_is_linear_off_the_target():
    S = TargetSet(HalfSpace([0.0, -1.0], -4.0))
    worst = check_target_semiconcavity(S, [-5.0, 0.0], [5.0, 4.0], n_samples=200)
    assert worst <= 1e-12


def test_target_must_be_static(ex1):
    with pytest.raises(ValueError):
        TargetSet(ex1.moving_set)


def test_moving_interval_rejects_empty_start():
    with pytest.raises(ValueError):
        MovingInterval(2.0, 0.0, 1.0, 0.0)


def test_box_minus_ball_requires_the_hole_inside():
    with pytest.raises(ValueError):
        BoxMinusBall([0.0, 0.0], [1.0, 1.0], [0.0, 0.0], 0.5)


def _disk_sdf(t, X):
    return np.linalg.norm(X, axis=1) - (1.0 + t)


def test_signed_distance_set_on_a_growing_disk():
    disk = SignedDistanceSet(_disk_sdf, dim=2, bounds=([-3.0, -3.0], [3.0, 3.0]), lipschitz=1.0)
    assert not disk.is_static
    assert distance(disk, 0.0, [2.0, 0.0]) == pytest.approx(1.0, abs=1e-6)
    assert distance(disk, 0.0, [0.5, 0.0]) == 0.0
    np.testing.assert_allclose(project(disk, 0.0, [0.0, 3.0]), [0.0, 1.0], atol=1e-6)
    normals = normal_generators(disk, 0.0, [1.0, 0.0])
    assert len(normals) == 1
    np.testing.assert_allclose(normals[0], [1.0, 0.0], atol=1e-6)
    assert normal_generators(disk, 0.0, [0.2, 0.0]) == []
    assert disk.boundary_normal_speed(0.5, np.array([1.5, 0.0]), np.array([1.0, 0.0])) == pytest.approx(1.0, abs=1e-4)
