"""
Module E: Scenarios
Built-in constrained minimum-time problems with closed-form value
functions and the normal tables at their singular points, plus the
scenario document loader that builds sets and velocity fields from JSON
"""
import json
import logging
import math
import os
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import TypeAdapter, ValidationError

from sweepctl.models.scenario import FieldSpec, ScenarioConfig, ShapeSpec
from sweepctl.modules.a_geometry import (
    Ball,
    Box,
    BoxMinusBall,
    HalfSpace,
    MovingInterval,
    MovingSet,
    TargetSet,
    WholeSpace,
)
from sweepctl.modules.b_dynamics import BallField, ControlField, PolytopeField
from sweepctl.modules.d_hjcheck import CandidateValueFunction, SingularFeature
from sweepctl.utils.constants import FEATURE_SAMPLES, MEMBERSHIP_TOL
from sweepctl.utils.exceptions import ConfigError, DomainError, OutsideGraph

logger = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "data" / "scenarios"
BUILTIN_SCENARIOS = ("example1", "example2")

LOG3 = math.log(3.0)
SQRT2 = math.sqrt(2.0)

# arctanh/arcsin arguments are kept this far inside (-1, 1)
ARG_MARGIN = 1e-15
# tolerance on the endpoints of the diagonal-start domain
DOMAIN_SLACK = 1e-12
# radicand below which T1' is replaced by its limit at the lower endpoint
RADICAND_FLOOR = 1e-14
FEATURE_TOL = 1e-9

_shape_adapter = TypeAdapter(ShapeSpec)


@dataclass
class ScenarioBundle:
    """A constraint, velocity set and target with their constants and optional exact value function"""
    name: str
    description: str
    moving_set: MovingSet
    field: ControlField
    target: TargetSet
    rho: float
    config: ScenarioConfig
    exact_T: Optional[CandidateValueFunction] = None
    features: List[SingularFeature] = dataclass_field(default_factory=list)
    start: Optional[List[float]] = None
    policy: Optional[List[float]] = None
    horizon: Optional[float] = None

    @property
    def constants(self) -> Dict[str, float]:
        return {
            "r": self.moving_set.prox_radius,
            "L_C": self.moving_set.lipschitz,
            "M": self.field.bound,
            "L_G": self.field.lipschitz,
            "rho": self.rho,
        }

    @property
    def autonomous(self) -> bool:
        return self.moving_set.is_static


def _interior(a: float, b: float, n: int = FEATURE_SAMPLES) -> np.ndarray:
    """n points strictly between a and b"""
    return np.linspace(a, b, n + 2)[1:-1]


def _vec(*values: float) -> np.ndarray:
    return np.array(values, dtype=float)


def _no_normals(t: float, x: np.ndarray) -> List[np.ndarray]:
    return []


# ---------------------------------------------------------------------------
# Example 1: interval with a moving left end
# ---------------------------------------------------------------------------

def _switching_point(t: float) -> float:
    """State on the curve separating the waiting branch from the free branch"""
    return math.exp(t - 1.0) - 1.0


def example1_exact_T(t: float, x: float) -> float:
    """
    Minimum time for C(t) = [-1+t, 2], x' = x + u, |u| <= 1, S = {x >= 2}

    Below the switching curve x = -1 + e^(t-1) (t <= 1) the state is
    dragged by the left end until it reaches the curve: T = 1 + log 3 - t.
    Elsewhere T = log 3 - log(1 + x).

    Raises:
        OutsideGraph: if (t, x) is not in graph(C)
    """
    t, x = float(t), float(x)
    if t < -MEMBERSHIP_TOL or t > 3.0 + MEMBERSHIP_TOL or x < t - 1.0 - MEMBERSHIP_TOL or x > 2.0 + MEMBERSHIP_TOL:
        raise OutsideGraph(f"({t}, {x}) is not in graph(C)", {"t": t, "x": [x]})
    if x >= 2.0 - MEMBERSHIP_TOL:
        return 0.0
    if t <= 1.0 and x <= _switching_point(t):
        return 1.0 + LOG3 - t
    return LOG3 - math.log(1.0 + x)


def _example1_gradient(t: float, x: np.ndarray) -> np.ndarray:
    if t <= 1.0 and x[0] <= _switching_point(t):
        return _vec(-1.0, 0.0)
    return _vec(0.0, -1.0 / (1.0 + x[0]))


def _near(a: float, b: float) -> bool:
    return abs(a - b) <= FEATURE_TOL


def _example1_features() -> List[SingularFeature]:
    e_inv = math.exp(-1.0)

    def table(*rows: Tuple[float, ...]) -> Callable[[float, np.ndarray], List[np.ndarray]]:
        return lambda t, x: [_vec(*r) for r in rows]

    def switching_epi(t, x):
        normals = []
        if _near(t, 0.0):
            normals.append(_vec(-1.0, 0.0, 0.0))
        if _near(t, 1.0):
            normals.append(_vec(1.0, -1.0, 0.0))
        return normals

    def switching_hypo(t, x):
        normals = [_vec(1.0, 0.0, 1.0), _vec(0.0, math.exp(1.0 - t), 1.0)]
        if _near(t, 0.0):
            normals.append(_vec(-1.0, 0.0, 0.0))
        if _near(t, 1.0):
            normals.append(_vec(1.0, -1.0, 0.0))
        return normals

    curve_times = np.linspace(0.0, 1.0, FEATURE_SAMPLES)
    return [
        SingularFeature(
            name="start_corner",
            contains=lambda t, x: _near(t, 0.0) and _near(x[0], -1.0),
            epi=table((0.0, -1.0, 0.0), (1.0, -1.0, 0.0), (-1.0, 0.0, -1.0)),
            hypo=table((0.0, -1.0, 0.0), (1.0, -1.0, 0.0), (1.0, 0.0, 1.0)),
            samples=[(0.0, _vec(-1.0))]
        ),
        SingularFeature(
            name="end_corner",
            contains=lambda t, x: _near(t, 3.0) and _near(x[0], 2.0),
            epi=table((0.0, 1.0, 0.0), (1.0, -1.0, 0.0), (0.0, -1.0 / 3.0, -1.0)),
            hypo=table((0.0, 1.0, 0.0), (1.0, -1.0, 0.0), (0.0, 1.0 / 3.0, 1.0)),
            samples=[(3.0, _vec(2.0))]
        ),
        SingularFeature(
            name="target_corner",
            contains=lambda t, x: _near(t, 0.0) and _near(x[0], 2.0),
            epi=table((0.0, 1.0, 0.0), (-1.0, 0.0, 0.0), (0.0, -1.0 / 3.0, -1.0)),
            hypo=table((0.0, 1.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0 / 3.0, 1.0)),
            samples=[(0.0, _vec(2.0))]
        ),
        SingularFeature(
            name="switching_curve",
            contains=lambda t, x: -FEATURE_TOL <= t <= 1.0 + FEATURE_TOL and _near(x[0], _switching_point(t)),
            epi=switching_epi,
            hypo=switching_hypo,
            samples=[(float(t), _vec(_switching_point(t))) for t in curve_times]
        ),
        SingularFeature(
            name="target_edge",
            contains=lambda t, x: 0.0 < t < 3.0 and _near(x[0], 2.0),
            epi=table((0.0, 1.0, 0.0), (0.0, -1.0 / 3.0, -1.0)),
            hypo=table((0.0, 1.0, 0.0), (0.0, 1.0 / 3.0, 1.0)),
            samples=[(float(t), _vec(2.0)) for t in _interior(0.0, 3.0)]
        ),
        SingularFeature(
            name="left_edge_early",
            contains=lambda t, x: 0.0 < t < 1.0 and _near(x[0], t - 1.0),
            epi=table((1.0, -1.0, 0.0), (-1.0, 0.0, -1.0)),
            hypo=table((1.0, -1.0, 0.0), (1.0, 0.0, 1.0)),
            samples=[(float(t), _vec(t - 1.0)) for t in _interior(0.0, 1.0)]
        ),
        SingularFeature(
            name="left_edge_late",
            contains=lambda t, x: 1.0 < t < 3.0 and _near(x[0], t - 1.0),
            epi=lambda t, x: [_vec(1.0, -1.0, 0.0), _vec(0.0, -1.0 / t, -1.0)],
            hypo=lambda t, x: [_vec(1.0, -1.0, 0.0), _vec(0.0, 1.0 / t, 1.0)],
            samples=[(float(t), _vec(t - 1.0)) for t in _interior(1.0, 3.0)]
        ),
        SingularFeature(
            name="initial_edge_lower",
            contains=lambda t, x: _near(t, 0.0) and -1.0 < x[0] < e_inv - 1.0,
            epi=table((-1.0, 0.0, 0.0), (-1.0, 0.0, -1.0)),
            hypo=table((-1.0, 0.0, 0.0), (1.0, 0.0, 1.0)),
            samples=[(0.0, _vec(x)) for x in _interior(-1.0, e_inv - 1.0)]
        ),
        SingularFeature(
            name="initial_edge_upper",
            contains=lambda t, x: _near(t, 0.0) and e_inv - 1.0 < x[0] < 2.0,
            epi=lambda t, x: [_vec(-1.0, 0.0, 0.0), _vec(0.0, -1.0 / (x[0] + 1.0), -1.0)],
            hypo=lambda t, x: [_vec(-1.0, 0.0, 0.0), _vec(0.0, 1.0 / (x[0] + 1.0), 1.0)],
            samples=[(0.0, _vec(x)) for x in _interior(e_inv - 1.0, 2.0)]
        ),
    ]


def example1_candidate() -> CandidateValueFunction:
    return CandidateValueFunction(
        value=lambda t, x: example1_exact_T(t, x[0]),
        dim=1,
        gradient=_example1_gradient,
        features=_example1_features(),
        name="example1_exact"
    )


def _bump(t: float, x: float) -> Tuple[float, float, float]:
    """0.1 (1 - q)^2 on q < 1 with q the scaled squared distance to (0.5, 1), and its gradient"""
    q = ((t - 0.5) / 0.4) ** 2 + ((x - 1.0) / 0.4) ** 2
    if q >= 1.0:
        return 0.0, 0.0, 0.0
    scale = -0.2 * (1.0 - q)
    return 0.1 * (1.0 - q) ** 2, scale * 2.0 * (t - 0.5) / 0.16, scale * 2.0 * (x - 1.0) / 0.16


def example1_perturbed_candidate() -> CandidateValueFunction:
    """
    Exact value plus an interior bump; the hypograph inequality fails on
    the bump, e.g. with value 0.375 at (0.7, 1)
    """
    def value(t, x):
        return example1_exact_T(t, x[0]) + _bump(t, x[0])[0]

    def gradient(t, x):
        _, dt, dx = _bump(t, x[0])
        return _example1_gradient(t, x) + _vec(dt, dx)

    return CandidateValueFunction(
        value=value,
        dim=1,
        gradient=gradient,
        features=_example1_features(),
        name="example1_perturbed"
    )


# ---------------------------------------------------------------------------
# Example 2: box with a circular hole, upward cone of velocities
# ---------------------------------------------------------------------------

DIAGONAL_LOW = 2.0 - SQRT2
DEPARTURE = (SQRT2 / 2.0, 2.0 - SQRT2 / 2.0)


def _arg(z: float) -> float:
    return min(max(z, -1.0 + ARG_MARGIN), 1.0 - ARG_MARGIN)


def _check_domain(y0: float) -> float:
    y0 = float(y0)
    if y0 < DIAGONAL_LOW - DOMAIN_SLACK or y0 > 1.0 + DOMAIN_SLACK:
        raise DomainError(f"y0={y0} outside [2 - sqrt(2), 1]", {"y0": y0})
    return min(max(y0, DIAGONAL_LOW), 1.0)


def _radicand(y0: float) -> float:
    return max(-y0 * y0 + 4.0 * y0 - 2.0, 0.0)


def example2_T1(y0: float) -> float:
    """
    Time to reach the circle from (0, y0) along the diagonal (1, 1)

    Raises:
        DomainError: outside [2 - sqrt(2), 1]
    """
    y0 = _check_domain(y0)
    return 0.5 * (-math.sqrt(_radicand(y0)) - y0 + 2.0)


def example2_T2(y0: float) -> float:
    """
    Time spent sliding along the circle up to the departure point P

    Raises:
        DomainError: outside [2 - sqrt(2), 1]
    """
    t1 = example2_T1(y0)
    half_angle = 0.5 * math.asin(_arg(t1))
    return SQRT2 * (math.atanh(_arg(1.0 - SQRT2)) - math.atanh(_arg((math.tan(half_angle) - 1.0) / SQRT2)))


def example2_T3(y0: float) -> float:
    """Minimum time from (0, y0): diagonal leg, sliding leg and the run from P to S"""
    return example2_T1(y0) + example2_T2(y0) + 2.0 + SQRT2 / 2.0


def example2_T3_derivative(y0: float) -> float:
    """
    d T3 / d y0 = T1' (1 - 1 / (s (T1 + s))) with s = sqrt(1 - T1^2)

    Raises:
        DomainError: outside [2 - sqrt(2), 1]
    """
    y0 = _check_domain(y0)
    radicand = _radicand(y0)
    if radicand <= RADICAND_FLOOR:
        return -0.5
    t1 = example2_T1(y0)
    d1 = -0.5 + (y0 - 2.0) / (2.0 * math.sqrt(radicand))
    s = math.sqrt(max(1.0 - t1 * t1, 0.0))
    return d1 * (1.0 - 1.0 / (s * (t1 + s)))


def _example2_in_c(x: float, y: float) -> bool:
    in_box = -5.0 - MEMBERSHIP_TOL <= x <= 5.0 + MEMBERSHIP_TOL and -MEMBERSHIP_TOL <= y <= 4.0 + MEMBERSHIP_TOL
    return in_box and math.hypot(x, y - 2.0) >= 1.0 - MEMBERSHIP_TOL


def in_region_D(x: float, y: float) -> bool:
    """
    Starts whose optimal path slides along the lower arc of the circle

    Strict inequalities: points on the boundary of the region take the
    4 - y branch.
    """
    ax = abs(x)
    return _example2_in_c(x, y) and ax < SQRT2 / 2.0 and ax + DIAGONAL_LOW < y < DEPARTURE[1]


def example2_exact_T(x: float, y: float) -> float:
    """
    Minimum time in the holed box: T3(y - |x|) - |x| on the region below
    the circle, 4 - y elsewhere

    Raises:
        OutsideGraph: if (x, y) is not in C
    """
    x, y = float(x), float(y)
    if not _example2_in_c(x, y):
        raise OutsideGraph(f"({x}, {y}) is not in C", {"x": [x, y]})
    if in_region_D(x, y):
        return example2_T3(y - abs(x)) - abs(x)
    return max(4.0 - y, 0.0)


def _example2_gradient(t: float, X: np.ndarray) -> np.ndarray:
    x, y = float(X[0]), float(X[1])
    if in_region_D(x, y):
        d = example2_T3_derivative(y - abs(x))
        return _vec(math.copysign(1.0, x) * (-1.0 - d), d)
    return _vec(0.0, -1.0)


def _circle_normal(x: np.ndarray) -> np.ndarray:
    """Outward normal of C on the circle (pointing to the centre)"""
    return _vec(-x[0], 2.0 - x[1])


def _on_circle(x: np.ndarray) -> bool:
    return abs(math.hypot(x[0], x[1] - 2.0) - 1.0) <= FEATURE_TOL


def _example2_features() -> List[SingularFeature]:
    def junction_hypo(t, x):
        d = example2_T3_derivative(x[1])
        return [_vec(1.0 + d, -d, 1.0), _vec(-1.0 - d, -d, 1.0)]

    def departure_epi(t, x):
        side = math.copysign(1.0, x[0])
        return [
            np.concatenate([_circle_normal(x), [0.0]]),
            _vec(0.0, -1.0, -1.0),
            _vec(-side / 2.0, -0.5, -1.0),
        ]

    def departure_hypo(t, x):
        return [np.concatenate([_circle_normal(x), [0.0]]), _vec(0.0, 1.0, 1.0)]

    def diagonal_epi(t, x):
        return [_vec(0.0, -1.0, -1.0), _vec(-math.copysign(0.5, x[0]), -0.5, -1.0)]

    def sliding_epi(t, x):
        return [np.concatenate([_circle_normal(x), [0.0]]), np.concatenate([_example2_gradient(t, x), [-1.0]])]

    def sliding_hypo(t, x):
        return [np.concatenate([_circle_normal(x), [0.0]]), np.concatenate([-_example2_gradient(t, x), [1.0]])]

    def upper_epi(t, x):
        return [np.concatenate([_circle_normal(x), [0.0]]), _vec(0.0, -1.0, -1.0)]

    def upper_hypo(t, x):
        return [np.concatenate([_circle_normal(x), [0.0]]), _vec(0.0, 1.0, 1.0)]

    def arc_points(lo: float, hi: float) -> List[Tuple[float, np.ndarray]]:
        points = []
        for angle in _interior(lo, hi):
            for side in (1.0, -1.0):
                points.append((0.0, _vec(side * math.sin(angle), 2.0 - math.cos(angle))))
        return points

    return [
        SingularFeature(
            name="circle_bottom",
            contains=lambda t, x: _near(x[0], 0.0) and _near(x[1], 1.0),
            epi=lambda t, x: [_vec(0.0, 1.0, 0.0)],
            hypo=lambda t, x: [_vec(0.0, 1.0, 0.0)] + junction_hypo(t, _vec(0.0, 1.0)),
            samples=[(0.0, _vec(0.0, 1.0))]
        ),
        SingularFeature(
            name="apex",
            contains=lambda t, x: _near(x[0], 0.0) and _near(x[1], DIAGONAL_LOW),
            epi=lambda t, x: [_vec(0.0, -1.0, -1.0)],
            hypo=_no_normals,
            samples=[(0.0, _vec(0.0, DIAGONAL_LOW))]
        ),
        SingularFeature(
            name="departure_point",
            contains=lambda t, x: _near(abs(x[0]), DEPARTURE[0]) and _near(x[1], DEPARTURE[1]),
            epi=departure_epi,
            hypo=departure_hypo,
            samples=[(0.0, _vec(DEPARTURE[0], DEPARTURE[1])), (0.0, _vec(-DEPARTURE[0], DEPARTURE[1]))]
        ),
        SingularFeature(
            name="junction",
            contains=lambda t, x: _near(x[0], 0.0) and DIAGONAL_LOW < x[1] < 1.0,
            epi=_no_normals,
            hypo=junction_hypo,
            samples=[(0.0, _vec(0.0, y)) for y in _interior(DIAGONAL_LOW, 1.0)]
        ),
        SingularFeature(
            name="diagonal",
            contains=lambda t, x: 0.0 < abs(x[0]) < DEPARTURE[0] and _near(x[1], abs(x[0]) + DIAGONAL_LOW),
            epi=diagonal_epi,
            hypo=_no_normals,
            samples=[
                (0.0, _vec(side * a, a + DIAGONAL_LOW))
                for a in _interior(0.0, DEPARTURE[0]) for side in (1.0, -1.0)
            ]
        ),
        SingularFeature(
            name="sliding_arc",
            contains=lambda t, x: _on_circle(x) and 1.0 < x[1] < DEPARTURE[1] and x[0] != 0.0,
            epi=sliding_epi,
            hypo=sliding_hypo,
            samples=arc_points(0.0, math.pi / 4.0)
        ),
        SingularFeature(
            name="upper_arc",
            contains=lambda t, x: _on_circle(x) and DEPARTURE[1] < x[1] < 3.0 and x[0] != 0.0,
            epi=upper_epi,
            hypo=upper_hypo,
            samples=arc_points(math.pi / 4.0, math.pi)
        ),
    ]


def example2_candidate() -> CandidateValueFunction:
    return CandidateValueFunction(
        value=lambda t, x: example2_exact_T(x[0], x[1]),
        dim=2,
        autonomous=True,
        gradient=_example2_gradient,
        features=_example2_features(),
        name="example2_exact"
    )


EXACT_CANDIDATES: Dict[str, Callable[[], CandidateValueFunction]] = {
    "example1": example1_candidate,
    "example2": example2_candidate,
}


# ---------------------------------------------------------------------------
# Scenario documents
# ---------------------------------------------------------------------------

def build_shape(spec: Union[ShapeSpec, Dict[str, Any]]) -> MovingSet:
    """
    Construct a set from a shape descriptor

    Raises:
        ConfigError: if the descriptor is invalid
    """
    try:
        if isinstance(spec, dict):
            spec = _shape_adapter.validate_python(spec)
        if spec.kind == "interval":
            return MovingInterval(spec.a0, spec.a1, spec.b0, spec.b1, t0=spec.t0, t_max=spec.t_max)
        if spec.kind == "box":
            return Box(spec.lo, spec.hi)
        if spec.kind == "box_minus_ball":
            return BoxMinusBall(spec.lo, spec.hi, spec.center, spec.radius)
        if spec.kind == "halfspace":
            return HalfSpace(spec.normal, spec.offset)
        if spec.kind == "ball":
            return Ball(spec.center, spec.radius)
        return WholeSpace(spec.dim)
    except ValidationError as e:
        raise ConfigError(f"Invalid shape descriptor: {e.errors()[0]['msg']}", details={"errors": str(e)}) from e
    except ValueError as e:
        raise ConfigError(f"Invalid shape: {e}") from e


def build_field(spec: FieldSpec) -> ControlField:
    """
    Construct a velocity set from a field descriptor

    Raises:
        ConfigError: if the descriptor is inconsistent
    """
    kwargs = {
        "drift_matrix": spec.drift_matrix,
        "drift_offset": spec.drift_offset,
        "lipschitz": spec.lipschitz,
    }
    try:
        if spec.kind == "polytope":
            return PolytopeField(spec.vertices, spec.bound, **kwargs)
        return BallField(spec.radius, spec.dim, spec.bound, **kwargs)
    except ValueError as e:
        raise ConfigError(f"Invalid control field: {e}") from e


def build_from_config(config: ScenarioConfig) -> ScenarioBundle:
    """
    Assemble a ScenarioBundle from a validated scenario document

    Raises:
        ConfigError: if the pieces do not fit together
    """
    moving_set = build_shape(config.constraint)
    if config.prox_radius is not None:
        moving_set.prox_radius = config.prox_radius
    field = build_field(config.control)
    target = TargetSet(build_shape(config.target.shape), config.target.internal_sphere_radius)
    if field.dim != moving_set.dim or target.dim != moving_set.dim:
        raise ConfigError(
            f"Dimension mismatch: constraint {moving_set.dim}, control {field.dim}, target {target.dim}"
        )
    rho = config.rho if config.rho is not None else moving_set.lipschitz + field.bound

    exact = None
    if config.exact_candidate is not None:
        exact = EXACT_CANDIDATES[config.exact_candidate]()
        if exact.dim != moving_set.dim:
            raise ConfigError(f"Candidate {config.exact_candidate} is {exact.dim}D, constraint is {moving_set.dim}D")
    if config.start is not None and len(config.start) != moving_set.dim + 1:
        raise ConfigError(f"start needs t0 and {moving_set.dim} coordinates")

    return ScenarioBundle(
        name=config.name,
        description=config.description,
        moving_set=moving_set,
        field=field,
        target=target,
        rho=rho,
        config=config,
        exact_T=exact,
        features=exact.features if exact is not None else [],
        start=config.start,
        policy=config.policy,
        horizon=config.horizon
    )


def scenario_to_config(bundle: ScenarioBundle) -> ScenarioConfig:
    """The scenario document a bundle was built from"""
    return bundle.config.model_copy(deep=True)


def _error_line(text: str, loc: Tuple[Any, ...]) -> Optional[int]:
    """Line of the innermost key of a validation error location"""
    keys = [k for k in loc if isinstance(k, str)]
    for key in reversed(keys):
        needle = f'"{key}"'
        for number, line in enumerate(text.splitlines(), start=1):
            if needle in line:
                return number
    return None


def parse_scenario(text: str, source: str = "<string>") -> ScenarioConfig:
    """
    Validate a scenario document

    Raises:
        ConfigError: on malformed JSON or invalid fields, with the line number
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: malformed JSON: {e.msg}", line=e.lineno) from e
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(k) for k in first["loc"])
        raise ConfigError(
            f"{source}: {location}: {first['msg']}",
            line=_error_line(text, first["loc"]),
            details={"errors": len(e.errors())}
        ) from e


def _read_document(path: str) -> ScenarioConfig:
    if not os.path.exists(path):
        raise ConfigError(f"Scenario file not found: {path}")
    with open(path, 'r') as f:
        text = f.read()
    return parse_scenario(text, source=path)


def example1() -> ScenarioBundle:
    """C(t) = [-1+t, 2] on [0, 3], x' in x + [-1, 1], S = {x >= 2}"""
    return build_from_config(_read_document(str(SCENARIO_DIR / "example1.json")))


def example2() -> ScenarioBundle:
    """[-5,5] x [0,4] minus the open unit disk at (0,2), G = conv{(-1,1),(1,1),(0,0)}, S = {y >= 4}"""
    return build_from_config(_read_document(str(SCENARIO_DIR / "example2.json")))


def load_scenario(name_or_path: str) -> ScenarioBundle:
    """
    Resolve a built-in scenario name or a scenario document path

    Raises:
        ConfigError: if the file is missing or invalid
    """
    if name_or_path in BUILTIN_SCENARIOS:
        bundle = example1() if name_or_path == "example1" else example2()
    else:
        bundle = build_from_config(_read_document(name_or_path))
    logger.info(f"Loaded scenario '{bundle.name}' (dim={bundle.moving_set.dim}, constants={bundle.constants})")
    return bundle
