"""
Module A: Geometry
Prox-regular moving constraints C(t) and static targets S with distance,
projection and proximal-normal-cone oracles

Every oracle is a pure function of its inputs, so shapes can be shared
between worker threads.
"""
import logging
import math
from abc import ABC, abstractmethod
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from sweepctl.models.report import ProxRegularityReport
from sweepctl.modules.numerics.cones import in_cone
from sweepctl.utils.constants import (
    BOUNDARY_SAMPLES_2D,
    CONE_ANGLE_TOL,
    FD_STEP,
    LIPSCHITZ_TIME_SAMPLES,
    MEMBERSHIP_TOL,
    PROX_SAMPLES,
    STATIC_TIME_WINDOW,
)
from sweepctl.utils.exceptions import (
    InsideTarget,
    NotInSet,
    OutsideReach,
    TimeOutOfDomain,
)
from sweepctl.utils.validators import PointLike, as_point

logger = logging.getLogger(__name__)


class MovingSet(ABC):
    """
    Time-indexed closed set C(t) on a closed time domain [t0, t_max]

    Subclasses implement the batch oracles `_distance` and `_project` on
    (m, dim) arrays plus the single-point normal oracle `_normals`.
    """

    kind: str = "abstract"

    def __init__(
        self,
        dim: int,
        prox_radius: float = math.inf,
        lipschitz: float = 0.0,
        time_domain: Tuple[float, float] = (0.0, math.inf),
    ):
        if prox_radius <= 0:
            raise ValueError("prox_radius must be positive")
        if lipschitz < 0:
            raise ValueError("lipschitz must be nonnegative")
        if time_domain[1] < time_domain[0]:
            raise ValueError(f"Empty time domain {time_domain}")
        self.dim = dim
        self.prox_radius = float(prox_radius)
        self.lipschitz = float(lipschitz)
        self.time_domain = (float(time_domain[0]), float(time_domain[1]))

    @property
    def is_static(self) -> bool:
        return False

    # -- time handling -------------------------------------------------

    def check_time(self, t: float) -> float:
        """Validate t against the time domain and clamp rounding noise"""
        t0, t1 = self.time_domain
        if t < t0 - MEMBERSHIP_TOL or t > t1 + MEMBERSHIP_TOL:
            raise TimeOutOfDomain(
                f"t={t} outside the time domain [{t0}, {t1}] of {self.kind}",
                {"t": t, "time_domain": [t0, t1]}
            )
        return min(max(t, t0), t1)

    def sampling_window(self) -> Tuple[float, float]:
        """Finite window used when sampling times"""
        t0, t1 = self.time_domain
        if math.isinf(t1):
            return t0, t0 + STATIC_TIME_WINDOW
        return t0, t1

    # -- oracles ---------------------------------------------------------

    @abstractmethod
    def _distance(self, t: float, X: np.ndarray) -> np.ndarray:
        """Distances of the rows of X to C(t)"""

    @abstractmethod
    def _project(self, t: float, X: np.ndarray) -> np.ndarray:
        """A nearest point of C(t) for every row of X"""

    @abstractmethod
    def _normals(self, t: float, x: np.ndarray, tol: float) -> List[np.ndarray]:
        """Unit generators of the proximal normal cone at a point of C(t)"""

    def distance_many(self, t: float, X: np.ndarray) -> np.ndarray:
        return self._distance(self.check_time(t), np.atleast_2d(X))

    def project_many(self, t: float, X: np.ndarray) -> np.ndarray:
        return self._project(self.check_time(t), np.atleast_2d(X))

    def contains_many(self, t: float, X: np.ndarray, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        return self.distance_many(t, X) <= tol

    def contains(self, t: float, x: PointLike, tol: float = MEMBERSHIP_TOL) -> bool:
        return bool(self.contains_many(t, as_point(x, self.dim)[None, :], tol)[0])

    def boundary_normal_speed(self, t: float, x: np.ndarray, n: np.ndarray) -> float:
        """
        Outward speed of the boundary of C(t) at x along the unit normal n

        One-sided finite differences of the distance: if x leaves C just after
        t the boundary is moving inward (negative speed).
        """
        if self.is_static:
            return 0.0
        t0, t1 = self.time_domain
        eps = FD_STEP
        X = x[None, :]
        if t + eps <= t1:
            ahead = float(self._distance(t + eps, X)[0])
            if ahead > 0.0:
                return -ahead / eps
        if t - eps >= t0:
            behind = float(self._distance(t - eps, X)[0])
            if behind > 0.0:
                return behind / eps
        return 0.0

    # -- sampling --------------------------------------------------------

    @abstractmethod
    def bounds_at(self, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """Axis-aligned box containing C(t)"""

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        """Box containing C(t) for every t of the time domain"""
        lo, hi = self.bounds_at(self.time_domain[0])
        if self.is_static:
            return lo, hi
        for t in np.linspace(*self.sampling_window(), 33):
            a, b = self.bounds_at(float(t))
            lo, hi = np.minimum(lo, a), np.maximum(hi, b)
        return lo, hi

    @abstractmethod
    def boundary_samples(self, t: float, n: int = BOUNDARY_SAMPLES_2D) -> np.ndarray:
        """Deterministic boundary points of C(t), roughly n of them"""

    @abstractmethod
    def sample_boundary(self, t: float, rng: np.random.Generator, k: int) -> np.ndarray:
        """k random boundary points of C(t)"""

    def sample_points(self, t: float, rng: np.random.Generator, k: int) -> np.ndarray:
        """k random points of C(t) (uniform in the bounds, projected into C(t))"""
        lo, hi = self.bounds_at(t)
        X = rng.uniform(lo, hi, size=(k, self.dim))
        return self._project(t, X)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "prox_radius": self.prox_radius,
            "lipschitz": self.lipschitz,
            "time_domain": list(self.time_domain),
        }


class StaticSet(MovingSet):
    """A set that does not depend on time"""

    def __init__(self, dim: int, prox_radius: float = math.inf):
        super().__init__(dim, prox_radius=prox_radius, lipschitz=0.0, time_domain=(0.0, math.inf))

    @property
    def is_static(self) -> bool:
        return True


def _box_boundary_samples(lo: np.ndarray, hi: np.ndarray, n: int) -> np.ndarray:
    dim = lo.size
    if dim == 1:
        return np.array([[lo[0]], [hi[0]]])
    per_face = max(2, int(round((n / (2 * dim)) ** (1.0 / (dim - 1)))))
    pieces = []
    for axis in range(dim):
        free = [k for k in range(dim) if k != axis]
        grids = np.meshgrid(*[np.linspace(lo[k], hi[k], per_face) for k in free], indexing="ij")
        face = np.zeros((grids[0].size, dim))
        for j, k in enumerate(free):
            face[:, k] = grids[j].ravel()
        for side in (lo[axis], hi[axis]):
            f = face.copy()
            f[:, axis] = side
            pieces.append(f)
    return np.unique(np.vstack(pieces), axis=0)


def _box_sample_boundary(lo: np.ndarray, hi: np.ndarray, rng: np.random.Generator, k: int) -> np.ndarray:
    dim = lo.size
    if dim == 1:
        return rng.choice([lo[0], hi[0]], size=(k, 1))
    widths = hi - lo
    areas = np.array([np.prod(np.delete(widths, axis)) for axis in range(dim)])
    if areas.sum() == 0.0:
        areas = np.ones(dim)
    axes = rng.choice(dim, size=k, p=areas / areas.sum())
    X = rng.uniform(lo, hi, size=(k, dim))
    sides = rng.integers(0, 2, size=k)
    X[np.arange(k), axes] = np.where(sides == 1, hi[axes], lo[axes])
    return X


def _box_normals(lo: np.ndarray, hi: np.ndarray, x: np.ndarray, tol: float) -> List[np.ndarray]:
    normals = []
    for axis in range(lo.size):
        if abs(x[axis] - lo[axis]) <= tol:
            e = np.zeros(lo.size)
            e[axis] = -1.0
            normals.append(e)
        if abs(x[axis] - hi[axis]) <= tol:
            e = np.zeros(lo.size)
            e[axis] = 1.0
            normals.append(e)
    return normals


class MovingInterval(MovingSet):
    """
    1D interval [a0 + a1 t, b0 + b1 t]

    The time domain ends where the endpoints cross unless t_max is given.
    """

    kind = "interval"

    def __init__(self, a0: float, a1: float, b0: float, b1: float, t0: float = 0.0, t_max: Optional[float] = None):
        if a0 + a1 * t0 > b0 + b1 * t0:
            raise ValueError("Interval is empty at the initial time")
        crossing = (b0 - a0) / (a1 - b1) if a1 > b1 else math.inf
        t_end = crossing if t_max is None else min(float(t_max), crossing)
        super().__init__(1, prox_radius=math.inf, lipschitz=max(abs(a1), abs(b1)), time_domain=(t0, t_end))
        self.a0, self.a1, self.b0, self.b1 = float(a0), float(a1), float(b0), float(b1)

    @property
    def is_static(self) -> bool:
        return self.a1 == 0.0 and self.b1 == 0.0

    def endpoints(self, t: float) -> Tuple[float, float]:
        return self.a0 + self.a1 * t, self.b0 + self.b1 * t

    def _distance(self, t, X):
        a, b = self.endpoints(t)
        x = X[:, 0]
        return np.maximum(np.maximum(a - x, x - b), 0.0)

    def _project(self, t, X):
        a, b = self.endpoints(t)
        return np.clip(X, a, b)

    def _normals(self, t, x, tol):
        a, b = self.endpoints(t)
        normals = []
        if abs(x[0] - a) <= tol:
            normals.append(np.array([-1.0]))
        if abs(x[0] - b) <= tol:
            normals.append(np.array([1.0]))
        return normals

    def boundary_normal_speed(self, t, x, n):
        # velocity of the endpoint the normal belongs to, along that normal
        return self.b1 if n[0] > 0 else -self.a1

    def bounds_at(self, t):
        a, b = self.endpoints(t)
        return np.array([a]), np.array([b])

    def bounding_box(self):
        t0, t1 = self.sampling_window()
        a = min(self.endpoints(t0)[0], self.endpoints(t1)[0])
        b = max(self.endpoints(t0)[1], self.endpoints(t1)[1])
        return np.array([a]), np.array([b])

    def boundary_samples(self, t, n=BOUNDARY_SAMPLES_2D):
        a, b = self.endpoints(t)
        return np.array([[a], [b]])

    def sample_boundary(self, t, rng, k):
        a, b = self.endpoints(t)
        return rng.choice([a, b], size=(k, 1))

    def describe(self):
        return {**super().describe(), "a0": self.a0, "a1": self.a1, "b0": self.b0, "b1": self.b1}


class Box(StaticSet):
    """Axis-aligned box [lo, hi]"""

    kind = "box"

    def __init__(self, lo: Sequence[float], hi: Sequence[float]):
        lo_arr, hi_arr = as_point(lo), as_point(hi)
        if lo_arr.size != hi_arr.size or np.any(lo_arr > hi_arr):
            raise ValueError(f"Invalid box bounds lo={lo} hi={hi}")
        super().__init__(lo_arr.size)
        self.lo, self.hi = lo_arr, hi_arr

    def _distance(self, t, X):
        return np.linalg.norm(X - np.clip(X, self.lo, self.hi), axis=1)

    def _project(self, t, X):
        return np.clip(X, self.lo, self.hi)

    def _normals(self, t, x, tol):
        return _box_normals(self.lo, self.hi, x, tol)

    def bounds_at(self, t):
        return self.lo.copy(), self.hi.copy()

    def boundary_samples(self, t, n=BOUNDARY_SAMPLES_2D):
        return _box_boundary_samples(self.lo, self.hi, n)

    def sample_boundary(self, t, rng, k):
        return _box_sample_boundary(self.lo, self.hi, rng, k)

    def describe(self):
        return {**super().describe(), "lo": self.lo.tolist(), "hi": self.hi.tolist()}


class BoxMinusBall(StaticSet):
    """
    Box with an open ball removed; the ball must lie inside the box

    The hole's radius is the prox-regularity constant.
    """

    kind = "box_minus_ball"

    def __init__(self, lo: Sequence[float], hi: Sequence[float], center: Sequence[float], radius: float):
        lo_arr, hi_arr, c = as_point(lo), as_point(hi), as_point(center)
        if not (lo_arr.size == hi_arr.size == c.size):
            raise ValueError("Box and ball dimensions differ")
        if radius <= 0 or np.any(c - radius < lo_arr) or np.any(c + radius > hi_arr):
            raise ValueError("The removed ball must lie inside the box")
        super().__init__(lo_arr.size, prox_radius=float(radius))
        self.lo, self.hi, self.center, self.radius = lo_arr, hi_arr, c, float(radius)

    def _project(self, t, X):
        P = np.clip(X, self.lo, self.hi)
        offset = P - self.center
        norms = np.linalg.norm(offset, axis=1)
        hole = norms < self.radius
        if np.any(hole):
            safe = np.where(norms[hole] > 0.0, norms[hole], 1.0)[:, None]
            radial = offset[hole] / safe
            # the center is equidistant from the whole sphere; pick the first axis
            radial[norms[hole] == 0.0] = np.eye(self.dim)[0]
            P[hole] = self.center + self.radius * radial
        return P

    def _distance(self, t, X):
        return np.linalg.norm(X - self._project(t, X), axis=1)

    def _normals(self, t, x, tol):
        normals = _box_normals(self.lo, self.hi, x, tol)
        inward = self.center - x
        dist = float(np.linalg.norm(inward))
        if abs(dist - self.radius) <= tol and dist > 0.0:
            normals.append(inward / dist)
        return normals

    def bounds_at(self, t):
        return self.lo.copy(), self.hi.copy()

    def _sphere_points(self, n: int) -> np.ndarray:
        if self.dim == 1:
            return np.array([self.center - self.radius, self.center + self.radius])
        if self.dim == 2:
            angles = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
            return self.center + self.radius * np.column_stack([np.cos(angles), np.sin(angles)])
        # Fibonacci sphere
        i = np.arange(n) + 0.5
        phi = np.arccos(1.0 - 2.0 * i / n)
        theta = np.pi * (1.0 + 5.0 ** 0.5) * i
        dirs = np.column_stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)])
        return self.center + self.radius * dirs

    def _boundary_shares(self) -> Tuple[float, float]:
        widths = self.hi - self.lo
        box_measure = 2.0 * sum(np.prod(np.delete(widths, a)) for a in range(self.dim))
        sphere_measure = 2.0 * np.pi * self.radius if self.dim == 2 else 4.0 * np.pi * self.radius ** 2
        total = box_measure + sphere_measure
        return box_measure / total, sphere_measure / total

    def boundary_samples(self, t, n=BOUNDARY_SAMPLES_2D):
        box_share, sphere_share = self._boundary_shares()
        n_sphere = max(8, int(round(n * sphere_share)))
        box_pts = _box_boundary_samples(self.lo, self.hi, max(4, n - n_sphere))
        return np.vstack([box_pts, self._sphere_points(n_sphere)])

    def sample_boundary(self, t, rng, k):
        _, sphere_share = self._boundary_shares()
        on_sphere = rng.random(k) < sphere_share
        X = _box_sample_boundary(self.lo, self.hi, rng, k)
        m = int(on_sphere.sum())
        if m:
            dirs = rng.normal(size=(m, self.dim))
            dirs /= np.linalg.norm(dirs, axis=1)[:, None]
            X[on_sphere] = self.center + self.radius * dirs
        return X

    def describe(self):
        return {
            **super().describe(),
            "lo": self.lo.tolist(),
            "hi": self.hi.tolist(),
            "center": self.center.tolist(),
            "radius": self.radius,
        }


class HalfSpace(StaticSet):
    """Closed half-space {x : a.x <= b}; a is the outward normal"""

    kind = "halfspace"

    def __init__(self, normal: Sequence[float], offset: float):
        a = as_point(normal)
        norm = float(np.linalg.norm(a))
        if norm == 0.0:
            raise ValueError("Half-space normal must be nonzero")
        super().__init__(a.size)
        self.normal = a / norm
        self.offset = float(offset) / norm

    def _distance(self, t, X):
        return np.maximum(X @ self.normal - self.offset, 0.0)

    def _project(self, t, X):
        excess = np.maximum(X @ self.normal - self.offset, 0.0)
        return X - excess[:, None] * self.normal

    def _normals(self, t, x, tol):
        if abs(float(x @ self.normal) - self.offset) <= tol:
            return [self.normal.copy()]
        return []

    def bounds_at(self, t):
        lo, hi = np.full(self.dim, -np.inf), np.full(self.dim, np.inf)
        if self.dim == 1:
            if self.normal[0] > 0:
                hi[0] = self.offset
            else:
                lo[0] = -self.offset
        return lo, hi

    def boundary_samples(self, t, n=BOUNDARY_SAMPLES_2D):
        if self.dim == 1:
            return np.array([[self.offset * self.normal[0]]])
        raise NotImplementedError("Boundary of a half-space is unbounded; sample through a bounded set")

    def sample_boundary(self, t, rng, k):
        if self.dim == 1:
            return np.full((k, 1), self.offset * self.normal[0])
        raise NotImplementedError("Boundary of a half-space is unbounded; sample through a bounded set")

    def project_to_boundary(self, X: np.ndarray) -> np.ndarray:
        return X - ((X @ self.normal) - self.offset)[:, None] * self.normal

    def describe(self):
        return {**super().describe(), "normal": self.normal.tolist(), "offset": self.offset}


class Ball(StaticSet):
    """Closed ball; convex, so prox-regular for every radius"""

    kind = "ball"

    def __init__(self, center: Sequence[float], radius: float):
        c = as_point(center)
        if radius <= 0:
            raise ValueError("Ball radius must be positive")
        super().__init__(c.size)
        self.center, self.radius = c, float(radius)

    def _distance(self, t, X):
        return np.maximum(np.linalg.norm(X - self.center, axis=1) - self.radius, 0.0)

    def _project(self, t, X):
        offset = X - self.center
        norms = np.linalg.norm(offset, axis=1)
        scale = np.where(norms > self.radius, self.radius / np.where(norms > 0, norms, 1.0), 1.0)
        return self.center + offset * scale[:, None]

    def _normals(self, t, x, tol):
        offset = x - self.center
        dist = float(np.linalg.norm(offset))
        if abs(dist - self.radius) <= tol and dist > 0.0:
            return [offset / dist]
        return []

    def bounds_at(self, t):
        return self.center - self.radius, self.center + self.radius

    def boundary_samples(self, t, n=BOUNDARY_SAMPLES_2D):
        if self.dim == 1:
            return np.array([self.center - self.radius, self.center + self.radius])
        angles = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        if self.dim == 2:
            return self.center + self.radius * np.column_stack([np.cos(angles), np.sin(angles)])
        raise NotImplementedError("Deterministic sphere sampling is provided for dim <= 2")

    def sample_boundary(self, t, rng, k):
        dirs = rng.normal(size=(k, self.dim))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        return self.center + self.radius * dirs

    def describe(self):
        return {**super().describe(), "center": self.center.tolist(), "radius": self.radius}


class WholeSpace(StaticSet):
    """R^n; no boundary, no normals"""

    kind = "whole_space"

    def _distance(self, t, X):
        return np.zeros(X.shape[0])

    def _project(self, t, X):
        return X.copy()

    def _normals(self, t, x, tol):
        return []

    def bounds_at(self, t):
        return np.full(self.dim, -np.inf), np.full(self.dim, np.inf)

    def boundary_samples(self, t, n=BOUNDARY_SAMPLES_2D):
        return np.zeros((0, self.dim))

    def sample_boundary(self, t, rng, k):
        return np.zeros((0, self.dim))


class SignedDistanceSet(MovingSet):
    """
    Oracle-backed shape {x : sdf(t, x) <= 0}

    `sdf(t, X)` must be vectorised over the rows of X and behave like a
    signed distance near the boundary; gradients use central differences
    unless `gradient(t, X)` is supplied.
    """

    kind = "signed_distance"

    def __init__(
        self,
        sdf: Callable[[float, np.ndarray], np.ndarray],
        dim: int,
        bounds: Tuple[Sequence[float], Sequence[float]],
        prox_radius: float = math.inf,
        lipschitz: float = 0.0,
        time_domain: Tuple[float, float] = (0.0, math.inf),
        gradient: Optional[Callable[[float, np.ndarray], np.ndarray]] = None,
        newton_steps: int = 8,
    ):
        super().__init__(dim, prox_radius=prox_radius, lipschitz=lipschitz, time_domain=time_domain)
        self.sdf = sdf
        self.gradient = gradient or self._fd_gradient
        self.lo, self.hi = as_point(bounds[0], dim), as_point(bounds[1], dim)
        self.newton_steps = newton_steps
        self._static = lipschitz == 0.0

    @property
    def is_static(self) -> bool:
        return self._static

    def _fd_gradient(self, t: float, X: np.ndarray) -> np.ndarray:
        grad = np.zeros_like(X)
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = FD_STEP
            grad[:, k] = (self.sdf(t, X + e) - self.sdf(t, X - e)) / (2.0 * FD_STEP)
        return grad

    def _project(self, t, X):
        P = X.copy()
        for _ in range(self.newton_steps):
            values = self.sdf(t, P)
            outside = values > 0.0
            if not np.any(outside):
                break
            grad = self.gradient(t, P[outside])
            norms = np.linalg.norm(grad, axis=1)[:, None]
            P[outside] -= values[outside][:, None] * grad / np.where(norms > 0, norms ** 2, 1.0)
        return P

    def _distance(self, t, X):
        values = self.sdf(t, X)
        return np.where(values > 0.0, np.linalg.norm(X - self._project(t, X), axis=1), 0.0)

    def _normals(self, t, x, tol):
        value = float(self.sdf(t, x[None, :])[0])
        if abs(value) > tol:
            return []
        grad = self.gradient(t, x[None, :])[0]
        norm = float(np.linalg.norm(grad))
        return [grad / norm] if norm > 0.0 else []

    def boundary_normal_speed(self, t, x, n):
        if self.is_static:
            return 0.0
        t0, t1 = self.time_domain
        lo_t, hi_t = max(t0, t - FD_STEP), min(t1, t + FD_STEP)
        X = x[None, :]
        rate = (self.sdf(hi_t, X)[0] - self.sdf(lo_t, X)[0]) / (hi_t - lo_t)
        return -float(rate)

    def bounds_at(self, t):
        return self.lo.copy(), self.hi.copy()

    def boundary_samples(self, t, n=BOUNDARY_SAMPLES_2D):
        rng = np.random.default_rng(0)
        return self.sample_boundary(t, rng, n)

    def sample_boundary(self, t, rng, k):
        X = rng.uniform(self.lo, self.hi, size=(k, self.dim))
        values = self.sdf(t, X)
        grad = self.gradient(t, X)
        norms = np.linalg.norm(grad, axis=1)[:, None]
        X = X - values[:, None] * grad / np.where(norms > 0, norms ** 2, 1.0)
        return self._project(t, X)


class TargetSet:
    """
    Time-independent closed target S with an internal sphere radius

    The distance d_S is semiconcave off S with constant 1/internal_sphere_radius.
    """

    def __init__(self, shape: MovingSet, internal_sphere_radius: float = math.inf):
        if not shape.is_static:
            raise ValueError("Target sets must be time-independent")
        if internal_sphere_radius <= 0:
            raise ValueError("internal_sphere_radius must be positive")
        self.shape = shape
        self.dim = shape.dim
        self.internal_sphere_radius = float(internal_sphere_radius)

    def distance(self, x: PointLike) -> float:
        return float(self.shape._distance(0.0, as_point(x, self.dim)[None, :])[0])

    def distance_many(self, X: np.ndarray) -> np.ndarray:
        return self.shape._distance(0.0, np.atleast_2d(X))

    def contains_many(self, X: np.ndarray, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        return self.distance_many(X) <= tol

    def describe(self) -> dict:
        return {"shape": self.shape.describe(), "internal_sphere_radius": self.internal_sphere_radius}


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def distance(moving_set: MovingSet, t: float, x: PointLike) -> float:
    """
    Euclidean distance from x to C(t)

    Raises:
        TimeOutOfDomain: if t is outside the set's time domain
    """
    X = as_point(x, moving_set.dim)[None, :]
    return float(moving_set.distance_many(t, X)[0])


def project(moving_set: MovingSet, t: float, x: PointLike) -> np.ndarray:
    """
    Unique nearest point of C(t)

    Raises:
        OutsideReach: if x is at distance >= r (projection may be non-unique)
        TimeOutOfDomain: if t is outside the set's time domain
    """
    X = as_point(x, moving_set.dim)[None, :]
    d = float(moving_set.distance_many(t, X)[0])
    if d >= moving_set.prox_radius:
        raise OutsideReach(
            f"Point at distance {d:.6g} >= prox radius {moving_set.prox_radius:.6g}",
            {"distance": d, "prox_radius": moving_set.prox_radius}
        )
    return moving_set.project_many(t, X)[0]


def normal_generators(
    moving_set: MovingSet,
    t: float,
    x: PointLike,
    tol: float = MEMBERSHIP_TOL
) -> List[np.ndarray]:
    """
    Unit generators of the proximal normal cone N_{C(t)}(x)

    Returns an empty list at interior points.

    Raises:
        NotInSet: if x is farther than tol from C(t)
    """
    point = as_point(x, moving_set.dim)
    t = moving_set.check_time(t)
    d = float(moving_set._distance(t, point[None, :])[0])
    if d > tol:
        raise NotInSet(f"Point {point.tolist()} is at distance {d:.3g} from C({t})", {"distance": d})
    return moving_set._normals(t, point, tol)


def _random_cone_element(generators: List[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    weights = rng.random(len(generators))
    zeta = np.sum([w * g for w, g in zip(weights, generators)], axis=0)
    norm = float(np.linalg.norm(zeta))
    return zeta / norm if norm > 0 else generators[0]


def check_prox_regularity(
    moving_set: MovingSet,
    r: float,
    n_samples: int = PROX_SAMPLES,
    seed: int = 0,
    tol: float = MEMBERSHIP_TOL
) -> ProxRegularityReport:
    """
    Monte-Carlo test of the proximal normal inequality
    zeta.(y - x) <= |zeta| |y - x|^2 / (2r)

    x is drawn on the boundary, zeta in the normal cone at x, and y in C(t)
    (half on the boundary, half anywhere in the set).

    Args:
        moving_set: Set under test
        r: Candidate prox-regularity radius
        n_samples: Number of (t, x, y, zeta) samples
        seed: Random seed

    Returns:
        Report with the worst margin and its witness
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    rng = np.random.default_rng(seed)
    t_lo, t_hi = moving_set.sampling_window()
    n_times = min(n_samples, 64)
    batches = np.array_split(np.arange(n_samples), n_times)
    times = rng.uniform(t_lo, t_hi, size=n_times) if t_hi > t_lo else np.full(n_times, t_lo)

    worst = -math.inf
    witness = None
    evaluated = 0
    for t, batch in zip(times, batches):
        k = batch.size
        if k == 0:
            continue
        t = float(t)
        X = moving_set.sample_boundary(t, rng, k)
        half = k // 2
        Y = np.vstack([moving_set.sample_boundary(t, rng, half), moving_set.sample_points(t, rng, k - half)])
        for x, y in zip(X, Y):
            gens = moving_set._normals(t, x, tol)
            if not gens:
                continue
            zeta = _random_cone_element(gens, rng)
            gap = y - x
            bound = 0.0 if math.isinf(r) else float(gap @ gap) / (2.0 * r)
            margin = float(zeta @ gap) - bound
            evaluated += 1
            if margin > worst:
                worst = margin
                witness = {"t": t, "x": x.tolist(), "y": y.tolist(), "zeta": zeta.tolist()}

    passed = worst <= tol
    logger.info(f"Prox-regularity check r={r}: {'pass' if passed else 'fail'} (worst margin {worst:.3e}, {evaluated} samples)")
    return ProxRegularityReport(
        r=r,
        n_samples=evaluated,
        seed=seed,
        passed=passed,
        worst_margin=worst if evaluated else 0.0,
        witness=None if passed else witness
    )


def hausdorff_distance(moving_set: MovingSet, s: float, t: float, n_boundary: int = BOUNDARY_SAMPLES_2D) -> float:
    """Hausdorff distance between C(s) and C(t), from boundary samples"""
    A = moving_set.boundary_samples(s, n_boundary)
    B = moving_set.boundary_samples(t, n_boundary)
    if A.size == 0 and B.size == 0:
        return 0.0
    ab = float(np.max(moving_set.distance_many(t, A))) if A.size else 0.0
    ba = float(np.max(moving_set.distance_many(s, B))) if B.size else 0.0
    return max(ab, ba)


def estimate_set_lipschitz(moving_set: MovingSet, n_time_samples: int = LIPSCHITZ_TIME_SAMPLES) -> float:
    """
    Largest sampled Hausdorff quotient d_H(C(t), C(s)) / |t - s|

    Raises:
        ValueError: if fewer than two time samples are requested
    """
    if n_time_samples < 2:
        raise ValueError("n_time_samples must be at least 2")
    times = np.linspace(*moving_set.sampling_window(), n_time_samples)
    for t in (times[0], times[-1]):
        moving_set.check_time(float(t))
    if moving_set.is_static:
        return 0.0
    boundaries = [moving_set.boundary_samples(float(t)) for t in times]
    best = 0.0
    for i in range(n_time_samples):
        for j in range(i + 1, n_time_samples):
            ti, tj = float(times[i]), float(times[j])
            d_ij = float(np.max(moving_set._distance(tj, boundaries[i]))) if boundaries[i].size else 0.0
            d_ji = float(np.max(moving_set._distance(ti, boundaries[j]))) if boundaries[j].size else 0.0
            best = max(best, max(d_ij, d_ji) / (tj - ti))
    return best


def target_superdifferential(S: TargetSet, x: PointLike, tol: float = MEMBERSHIP_TOL) -> List[np.ndarray]:
    """
    Proximal superdifferential of d_S at x outside the interior of S

    Off S this is the gradient (x - P_S(x)) / d_S(x); on the boundary the
    outward unit normals of S (gradients of the smooth extension).

    Raises:
        InsideTarget: for points in the interior of S
    """
    point = as_point(x, S.dim)
    d = S.distance(point)
    if d > tol:
        nearest = S.shape._project(0.0, point[None, :])[0]
        return [(point - nearest) / d]
    normals = S.shape._normals(0.0, point, tol)
    if not normals:
        raise InsideTarget(f"Point {point.tolist()} lies in the interior of the target", {"x": point.tolist()})
    return normals


def check_target_semiconcavity(
    S: TargetSet,
    lo: Sequence[float],
    hi: Sequence[float],
    n_samples: int = 1000,
    seed: int = 0
) -> float:
    """
    Worst sampled value of d_S(y) - d_S(x) - zeta.(y - x) - |y - x|^2 / (2R)
    over x, y in the box [lo, hi] outside S (R = internal sphere radius)
    """
    rng = np.random.default_rng(seed)
    lo_arr, hi_arr = as_point(lo, S.dim), as_point(hi, S.dim)
    X = rng.uniform(lo_arr, hi_arr, size=(n_samples, S.dim))
    Y = rng.uniform(lo_arr, hi_arr, size=(n_samples, S.dim))
    outside = (S.distance_many(X) > MEMBERSHIP_TOL) & (S.distance_many(Y) > MEMBERSHIP_TOL)
    worst = -math.inf
    curvature = 0.0 if math.isinf(S.internal_sphere_radius) else 1.0 / (2.0 * S.internal_sphere_radius)
    for x, y in zip(X[outside], Y[outside]):
        zeta = target_superdifferential(S, x)[0]
        gap = y - x
        margin = S.distance(y) - S.distance(x) - float(zeta @ gap) - curvature * float(gap @ gap)
        worst = max(worst, margin)
    return worst


def normal_cone_contains(moving_set: MovingSet, t: float, x: PointLike, v: PointLike, tol: float = CONE_ANGLE_TOL) -> bool:
    """Whether v lies in N_{C(t)}(x) up to the cone angle tolerance"""
    gens = normal_generators(moving_set, t, x, tol=max(tol, MEMBERSHIP_TOL))
    return in_cone(as_point(v, moving_set.dim), gens, tol)
