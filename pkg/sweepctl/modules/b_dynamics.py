"""
Module B: Dynamics
Perturbed sweeping process x' in -N_C(t)(x) + G(t,x): control fields and
time-stepping integrators (catching-up, bounded subdifferential form,
projected inclusion for static sets)
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd

from sweepctl.modules.a_geometry import MovingSet, TargetSet
from sweepctl.modules.numerics.cones import tangent_component
from sweepctl.utils.constants import (
    BALL_CONTROL_SAMPLES,
    BISECTION_ITERATIONS,
    MEMBERSHIP_TOL,
    TARGET_TOL,
)
from sweepctl.utils.exceptions import AutonomousOnly, NotInSet, StepTooLarge
from sweepctl.utils.validators import PointLike, as_point

logger = logging.getLogger(__name__)

Policy = Callable[[float, np.ndarray], np.ndarray]

INTEGRATORS = ("catching_up", "subdifferential", "projected")


class ControlField(ABC):
    """
    Convex compact velocity set G(t,x) = A x + b + U

    U is a fixed convex compact control set (polytope or ball); a control
    u in U selects the velocity g = A x + b + u.
    """

    kind: str = "abstract"

    def __init__(
        self,
        dim: int,
        bound: float,
        drift_matrix: Optional[Sequence[Sequence[float]]] = None,
        drift_offset: Optional[Sequence[float]] = None,
        lipschitz: Optional[float] = None
    ):
        if bound <= 0:
            raise ValueError("bound M must be positive")
        self.dim = dim
        self.bound = float(bound)
        self.drift_matrix = (
            np.zeros((dim, dim)) if drift_matrix is None else np.asarray(drift_matrix, dtype=float).reshape(dim, dim)
        )
        self.drift_offset = np.zeros(dim) if drift_offset is None else as_point(drift_offset, dim)
        spectral = float(np.linalg.norm(self.drift_matrix, 2)) if dim else 0.0
        self.lipschitz = spectral if lipschitz is None else float(lipschitz)

    def drift(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.drift_matrix @ x + self.drift_offset

    def drift_many(self, t: float, X: np.ndarray) -> np.ndarray:
        return X @ self.drift_matrix.T + self.drift_offset

    @abstractmethod
    def controls(self, m: int = BALL_CONTROL_SAMPLES) -> np.ndarray:
        """Extreme points of U (exact vertices, or m boundary samples of a ball)"""

    @abstractmethod
    def _control_support(self, q: np.ndarray) -> float:
        """max over u in U of u.q"""

    def velocity(self, t: float, x: np.ndarray, u: PointLike) -> np.ndarray:
        return self.drift(t, x) + as_point(u, self.dim)

    def extreme_points(self, t: float, x: PointLike, m: int = BALL_CONTROL_SAMPLES) -> np.ndarray:
        """(k, dim) extreme velocities of G(t,x)"""
        point = as_point(x, self.dim)
        return self.controls(m) + self.drift(t, point)

    def support(self, t: float, x: PointLike, q: PointLike) -> float:
        """max over g in G(t,x) of g.q (exact)"""
        point, direction = as_point(x, self.dim), as_point(q, self.dim)
        return float(self.drift(t, point) @ direction) + self._control_support(direction)

    def min_dot(self, t: float, x: PointLike, q: PointLike) -> float:
        """min over g in G(t,x) of g.q (exact)"""
        return -self.support(t, x, -as_point(q, self.dim))

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "bound": self.bound,
            "lipschitz": self.lipschitz,
            "drift_matrix": self.drift_matrix.tolist(),
            "drift_offset": self.drift_offset.tolist(),
        }


class PolytopeField(ControlField):
    """U = conv(vertices)"""

    kind = "polytope"

    def __init__(self, vertices: Sequence[Sequence[float]], bound: float, **kwargs):
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        super().__init__(V.shape[1], bound, **kwargs)
        self.vertices = V

    def controls(self, m: int = BALL_CONTROL_SAMPLES) -> np.ndarray:
        return self.vertices.copy()

    def _control_support(self, q: np.ndarray) -> float:
        return float(np.max(self.vertices @ q))

    def describe(self) -> dict:
        return {**super().describe(), "vertices": self.vertices.tolist()}


class BallField(ControlField):
    """U = radius * closed unit ball"""

    kind = "ball"

    def __init__(self, radius: float, dim: int, bound: float, **kwargs):
        if radius <= 0:
            raise ValueError("radius must be positive")
        super().__init__(dim, bound, **kwargs)
        self.radius = float(radius)

    def controls(self, m: int = BALL_CONTROL_SAMPLES) -> np.ndarray:
        if self.dim == 1:
            return np.array([[-self.radius], [self.radius]])
        if self.dim == 2:
            angles = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
            return self.radius * np.column_stack([np.cos(angles), np.sin(angles)])
        i = np.arange(m) + 0.5
        phi = np.arccos(1.0 - 2.0 * i / m)
        theta = np.pi * (1.0 + 5.0 ** 0.5) * i
        return self.radius * np.column_stack(
            [np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)]
        )

    def _control_support(self, q: np.ndarray) -> float:
        return self.radius * float(np.linalg.norm(q))

    def describe(self) -> dict:
        return {**super().describe(), "radius": self.radius}


def constant_policy(field: ControlField, u: PointLike) -> Policy:
    """Feedback g(t, x) = A x + b + u for a fixed control u"""
    control = as_point(u, field.dim)

    def policy(t: float, x: np.ndarray) -> np.ndarray:
        return field.velocity(t, x, control)

    return policy


@dataclass(frozen=True)
class TrajectoryRecord:
    """Discrete solution; arrays are read-only once built"""

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    normal_corrections: np.ndarray
    d_S: np.ndarray
    d_C: np.ndarray
    hit_time: Optional[float]
    status: str
    step: float
    integrator: str

    def __post_init__(self):
        for name in ("times", "states", "controls", "normal_corrections", "d_S", "d_C"):
            getattr(self, name).setflags(write=False)

    @property
    def max_violation(self) -> float:
        return float(np.max(self.d_C)) if self.d_C.size else 0.0

    @property
    def max_correction(self) -> float:
        if self.normal_corrections.size == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.normal_corrections, axis=1)))

    def to_frame(self) -> pd.DataFrame:
        """
        Columns t, x_i, g_i, xi_i, d_S, d_C; the final row has no step,
        so its g and xi entries are NaN
        """
        n = self.states.shape[1]
        pad = np.full((1, n), np.nan)
        data = {"t": self.times}
        for name, block in (
            ("x", self.states),
            ("g", np.vstack([self.controls, pad])),
            ("xi", np.vstack([self.normal_corrections, pad])),
        ):
            for i in range(n):
                data[f"{name}{i + 1}"] = block[:, i]
        data["d_S"] = self.d_S
        data["d_C"] = self.d_C
        return pd.DataFrame(data)


def _check_step(moving_set: MovingSet, field: ControlField, h: float) -> None:
    if h <= 0:
        raise ValueError("Step h must be positive")
    reach = moving_set.prox_radius
    if not math.isinf(reach) and 2.0 * h * (moving_set.lipschitz + field.bound) >= reach:
        raise StepTooLarge(
            f"h={h} violates 2h(L_C + M) < r with L_C={moving_set.lipschitz}, M={field.bound}, r={reach}",
            {"h": h, "L_C": moving_set.lipschitz, "M": field.bound, "r": reach}
        )


def catching_up_step(
    moving_set: MovingSet,
    field: ControlField,
    t: float,
    x: PointLike,
    g: PointLike,
    h: float
) -> tuple:
    """
    One step of Moreau's catching-up scheme

    Args:
        moving_set: Constraint C
        field: Velocity set G (its bound M enters the step guard)
        t: Current time
        x: Current state in C(t)
        g: Selected velocity in G(t,x)
        h: Step

    Returns:
        (x_next, xi) with x_next = P_C(t+h)(x + h g) and xi = (x + h g - x_next) / h
    """
    _check_step(moving_set, field, h)
    point, velocity = as_point(x, moving_set.dim), as_point(g, moving_set.dim)
    free = point + h * velocity
    x_next = moving_set.project_many(t + h, free[None, :])[0]
    return x_next, (free - x_next) / h


def _gradient_direction(moving_set: MovingSet, t: float, x: np.ndarray, free: np.ndarray, g: np.ndarray, tol: float):
    """Unit direction of the distance gradient used by the bounded form"""
    X = x[None, :]
    d = float(moving_set._distance(t, X)[0])
    if d > tol:
        return (x - moving_set._project(t, X)[0]) / d
    normals = moving_set._normals(t, x, tol)
    if normals:
        normal_part = g - tangent_component(g, normals)
        norm = float(np.linalg.norm(normal_part))
        if norm > 0.0:
            return normal_part / norm
        return normals[0]
    d_free = float(moving_set._distance(t, free[None, :])[0])
    return (free - moving_set._project(t, free[None, :])[0]) / d_free


def subdifferential_step(
    moving_set: MovingSet,
    field: ControlField,
    t: float,
    x: PointLike,
    g: PointLike,
    h: float,
    tol: float = MEMBERSHIP_TOL
) -> np.ndarray:
    """
    Explicit Euler step of x' in -(L_C + M) grad d_C(t)(x) + G

    The multiplier lambda in [0, L_C + M] is the smallest (by bisection)
    that brings the step back within tol of C(t+h). Falls back to the
    projection when even lambda = L_C + M is not enough.
    """
    _check_step(moving_set, field, h)
    point, velocity = as_point(x, moving_set.dim), as_point(g, moving_set.dim)
    t_next = moving_set.check_time(t + h)
    free = point + h * velocity
    if float(moving_set._distance(t_next, free[None, :])[0]) <= tol:
        return free

    direction = _gradient_direction(moving_set, t_next, point, free, velocity, tol)
    bound = moving_set.lipschitz + field.bound

    def violation(lam: float) -> float:
        return float(moving_set._distance(t_next, (free - h * lam * direction)[None, :])[0])

    if violation(bound) > tol:
        logger.debug(f"Bounded multiplier insufficient at t={t}; projecting")
        return moving_set._project(t_next, free[None, :])[0]

    lo, hi = 0.0, bound
    for _ in range(BISECTION_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if violation(mid) <= tol:
            hi = mid
        else:
            lo = mid
    return free - h * hi * direction


def projected_step(
    moving_set: MovingSet,
    field: ControlField,
    x: PointLike,
    g: PointLike,
    h: float,
    tol: float = MEMBERSHIP_TOL
) -> np.ndarray:
    """
    Step of the projected inclusion x' = proj onto T_C(x) of g (static C only)

    Constraints count as active within max(tol, h |g|) so the iterate keeps
    sliding along a curved boundary; the result is safety-projected onto C.

    Raises:
        AutonomousOnly: if C moves in time
    """
    if not moving_set.is_static:
        raise AutonomousOnly("The projected inclusion is only valid for time-independent constraints")
    _check_step(moving_set, field, h)
    t = moving_set.time_domain[0]
    point, velocity = as_point(x, moving_set.dim), as_point(g, moving_set.dim)
    active_tol = max(tol, h * float(np.linalg.norm(velocity)))
    normals = moving_set._normals(t, point, active_tol)
    direction = tangent_component(velocity, normals) if normals else velocity
    step = point + h * direction
    if float(moving_set._distance(t, step[None, :])[0]) > 0.0:
        step = moving_set._project(t, step[None, :])[0]
    return step


def simulate(
    moving_set: MovingSet,
    field: ControlField,
    policy: Policy,
    t0: float,
    x0: PointLike,
    target: TargetSet,
    h: float,
    horizon: float,
    integrator: str = "catching_up",
    tol: float = TARGET_TOL
) -> TrajectoryRecord:
    """
    Integrate the sweeping process from (t0, x0) until the target is hit

    Args:
        moving_set: Constraint C
        field: Velocity set G
        policy: Feedback (t, x) -> g in G(t,x), held constant over each step
        t0: Initial time
        x0: Initial state in C(t0)
        target: Target S
        h: Step
        horizon: Maximal duration
        integrator: catching_up, subdifferential or projected
        tol: Distance to S counted as a hit

    Returns:
        TrajectoryRecord with status HIT, HORIZON or DOMAIN_END
    """
    if integrator not in INTEGRATORS:
        raise ValueError(f"Unknown integrator {integrator!r}; expected one of {INTEGRATORS}")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    _check_step(moving_set, field, h)
    t0 = moving_set.check_time(t0)
    x = as_point(x0, moving_set.dim)
    d0 = float(moving_set._distance(t0, x[None, :])[0])
    if d0 > MEMBERSHIP_TOL:
        raise NotInSet(f"Initial state {x.tolist()} is at distance {d0:.3g} from C({t0})", {"distance": d0})

    t_end = min(t0 + horizon, moving_set.time_domain[1])
    n_steps = int(math.ceil((t_end - t0) / h - 1e-12))

    times, states, controls, corrections = [t0], [x], [], []
    dist_S, dist_C = [target.distance(x)], [d0]
    hit_time = t0 if dist_S[0] <= tol else None
    status = "HIT" if hit_time is not None else "HORIZON"

    k = 0
    while hit_time is None and k < n_steps:
        t = times[-1]
        t_next = min(t0 + (k + 1) * h, t_end)
        step = t_next - t
        if step <= 0.0:
            break
        g = as_point(policy(t, x), moving_set.dim)
        if integrator == "catching_up":
            x_next, xi = catching_up_step(moving_set, field, t, x, g, step)
        else:
            if integrator == "subdifferential":
                x_next = subdifferential_step(moving_set, field, t, x, g, step)
            else:
                x_next = projected_step(moving_set, field, x, g, step)
            xi = (x + step * g - x_next) / step

        d_next = target.distance(x_next)
        times.append(t_next)
        states.append(x_next)
        controls.append(g)
        corrections.append(xi)
        dist_S.append(d_next)
        dist_C.append(float(moving_set._distance(moving_set.check_time(t_next), x_next[None, :])[0]))
        if d_next <= tol:
            d_prev = dist_S[-2]
            # linear interpolation of d_S across the bracketing step
            hit_time = t + step * d_prev / (d_prev - d_next) if d_prev > d_next else t_next
            status = "HIT"
        x = x_next
        k += 1

    if hit_time is None and t_end < t0 + horizon:
        status = "DOMAIN_END"

    dim = moving_set.dim
    record = TrajectoryRecord(
        times=np.asarray(times),
        states=np.vstack(states),
        controls=np.vstack(controls) if controls else np.zeros((0, dim)),
        normal_corrections=np.vstack(corrections) if corrections else np.zeros((0, dim)),
        d_S=np.asarray(dist_S),
        d_C=np.asarray(dist_C),
        hit_time=hit_time,
        status=status,
        step=h,
        integrator=integrator
    )
    logger.debug(
        f"simulate[{integrator}] from t0={t0} x0={as_point(x0).tolist()}: {status} after {k} steps"
        + (f", hit_time={hit_time:.6f}" if hit_time is not None else "")
    )
    return record


def interstep_violation(moving_set: MovingSet, record: TrajectoryRecord, substeps: int = 4) -> float:
    """Largest distance to C(t) of the piecewise-linear trajectory between grid times"""
    worst = 0.0
    for k in range(len(record.times) - 1):
        t_a, t_b = record.times[k], record.times[k + 1]
        for s in np.linspace(0.0, 1.0, substeps + 2)[1:-1]:
            t = t_a + s * (t_b - t_a)
            x = (1.0 - s) * record.states[k] + s * record.states[k + 1]
            worst = max(worst, float(moving_set.distance_many(t, x[None, :])[0]))
    return worst


def sup_gap(first: TrajectoryRecord, second: TrajectoryRecord) -> float:
    """Sup-norm distance between two trajectories over their common grid times"""
    n = min(len(first.times), len(second.times))
    if not np.allclose(first.times[:n], second.times[:n], rtol=0.0, atol=1e-12):
        raise ValueError("Trajectories do not share a time grid")
    return float(np.max(np.linalg.norm(first.states[:n] - second.states[:n], axis=1)))
