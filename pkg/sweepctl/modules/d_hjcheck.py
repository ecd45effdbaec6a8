"""
Module D: Hamilton-Jacobi verification
Hamiltonians of the augmented sweeping dynamics, proximal normals to the
epigraph/hypograph of a candidate minimum-time function, and the sampled
verification of the Hamilton-Jacobi and invariance inequalities
"""
import itertools
import logging
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from sweepctl.models.report import HamiltonianReport, ProbeRecord
from sweepctl.modules.a_geometry import HalfSpace, MovingSet, TargetSet
from sweepctl.modules.b_dynamics import ControlField
from sweepctl.modules.c_solver import ValueGrid, mintime_at
from sweepctl.modules.numerics.cones import truncated_cone_min
from sweepctl.utils.constants import (
    ANALYTIC_HJ_TOL,
    FD_STEP,
    GRID_KINK_TOL,
    KINK_TOL,
    MEMBERSHIP_TOL,
    PLAN_STEP,
)
from sweepctl.utils.exceptions import (
    EmptyIntersection,
    NotInGraph,
    SignConditionFailed,
    SweepctlError,
    TimeOutOfDomain,
    ValueMismatch,
)
from sweepctl.utils.validators import PointLike, as_point

logger = logging.getLogger(__name__)

HORIZONTAL_TOL = 1e-12


@dataclass(frozen=True)
class AugmentedPoint:
    """A point (tau, x, lambda) of graph(C) x R"""
    tau: float
    x: Tuple[float, ...]
    lam: float

    @classmethod
    def of(cls, tau: float, x: PointLike, lam: float) -> "AugmentedPoint":
        return cls(float(tau), tuple(as_point(x).tolist()), float(lam))

    @property
    def point(self) -> np.ndarray:
        return np.asarray(self.x, dtype=float)


@dataclass
class SingularFeature:
    """
    A declared curve or point where the candidate is not differentiable,
    with its epigraph and hypograph normal generators

    Generators are covectors (p_t, p_x, p_lambda), or (p_x, p_lambda) for
    autonomous candidates.
    """
    name: str
    contains: Callable[[float, np.ndarray], bool]
    epi: Callable[[float, np.ndarray], List[np.ndarray]]
    hypo: Callable[[float, np.ndarray], List[np.ndarray]]
    samples: List[Tuple[float, np.ndarray]] = dataclass_field(default_factory=list)


@dataclass
class CandidateValueFunction:
    """
    Candidate minimum-time function theta(t, x) on graph(C)

    `gradient(t, x)` returns (d_t, d_x...) or, for autonomous candidates,
    d_x only. Without it normals come from finite differences.
    """
    value: Callable[[float, np.ndarray], float]
    dim: int
    autonomous: bool = False
    gradient: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    features: List[SingularFeature] = dataclass_field(default_factory=list)
    fd_step: float = FD_STEP
    kink_tol: float = KINK_TOL
    name: str = "candidate"

    def __call__(self, t: float, x: PointLike) -> float:
        return float(self.value(t, as_point(x, self.dim)))

    @property
    def covector_dim(self) -> int:
        return self.dim + 1 if self.autonomous else self.dim + 2

    def feature_at(self, t: float, x: np.ndarray) -> Optional[SingularFeature]:
        for feature in self.features:
            if feature.contains(t, x):
                return feature
        return None


@dataclass(frozen=True)
class Normal:
    vector: np.ndarray
    horizontal: bool
    source: str


@dataclass
class SamplePlan:
    """Where the inequalities are probed: grid nodes, boundary samples, feature samples, extra points"""
    dt: float = PLAN_STEP
    dx: float = PLAN_STEP
    bounds: Optional[Tuple[Sequence[float], Sequence[float]]] = None
    boundary_points: int = 200
    features: bool = True
    vertical: bool = True
    points: List[Tuple[float, Sequence[float]]] = dataclass_field(default_factory=list)


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------

def _split_covector(moving_set: MovingSet, p: PointLike) -> Tuple[float, np.ndarray, float]:
    p = as_point(p)
    n = moving_set.dim
    if p.size == n + 2:
        return float(p[0]), p[1:n + 1], float(p[n + 1])
    if p.size == n + 1:
        return 0.0, p[:n], float(p[n])
    raise ValueError(f"Covector of length {p.size} does not match dimension {n}")


def _require_graph(moving_set: MovingSet, t: float, x: np.ndarray) -> float:
    try:
        t = moving_set.check_time(t)
    except TimeOutOfDomain as exc:
        raise NotInGraph(f"t={t} outside the time domain", exc.details) from exc
    if not moving_set.contains(t, x):
        raise NotInGraph(f"({t}, {x.tolist()}) is not in graph(C)", {"t": t, "x": x.tolist()})
    return t


def _state_hamiltonian(
    moving_set: MovingSet,
    field: ControlField,
    t: float,
    x: np.ndarray,
    p_t: float,
    p_x: np.ndarray,
    rho: float,
    maximize: bool
) -> float:
    """min over -N cap rho B of v.p_x, plus p_t, plus the min or max of g.p_x over G"""
    normals = moving_set._normals(t, x, MEMBERSHIP_TOL)
    normal_term = truncated_cone_min(p_x, normals, rho)
    control_term = field.support(t, x, p_x) if maximize else field.min_dot(t, x, p_x)
    return normal_term + p_t + control_term


def hamiltonian_minus(
    moving_set: MovingSet,
    field: ControlField,
    pt: AugmentedPoint,
    p: PointLike,
    rho: Optional[float] = None
) -> float:
    """
    Lower Hamiltonian at an augmented point

    p is (p_t, p_x, p_lambda), or (p_x, p_lambda) for autonomous problems.

    Raises:
        NotInGraph: if (tau, x) is not in graph(C)
    """
    x = as_point(pt.x, moving_set.dim)
    t = _require_graph(moving_set, pt.tau, x)
    rho = moving_set.lipschitz + field.bound if rho is None else rho
    p_t, p_x, p_lam = _split_covector(moving_set, p)
    return _state_hamiltonian(moving_set, field, t, x, p_t, p_x, rho, maximize=False) - p_lam


def hamiltonian_plus(
    moving_set: MovingSet,
    field: ControlField,
    pt: AugmentedPoint,
    p: PointLike,
    rho: Optional[float] = None
) -> float:
    """
    Upper Hamiltonian at an augmented point (G-summand maximised)

    Raises:
        NotInGraph: if (tau, x) is not in graph(C)
    """
    x = as_point(pt.x, moving_set.dim)
    t = _require_graph(moving_set, pt.tau, x)
    rho = moving_set.lipschitz + field.bound if rho is None else rho
    p_t, p_x, p_lam = _split_covector(moving_set, p)
    return _state_hamiltonian(moving_set, field, t, x, p_t, p_x, rho, maximize=True) - p_lam


# ---------------------------------------------------------------------------
# Normals
# ---------------------------------------------------------------------------

def graph_normals(moving_set: MovingSet, t: float, x: PointLike, tol: float = MEMBERSHIP_TOL) -> List[np.ndarray]:
    """
    Proximal normals (p_t, p_x) of graph(C) at (t, x)

    (-w, n) for every boundary generator n moving outward at speed w, and
    (-1, 0) at the initial time of a moving constraint.
    """
    point = as_point(x, moving_set.dim)
    normals = []
    for n in moving_set._normals(t, point, tol):
        w = moving_set.boundary_normal_speed(t, point, n)
        normals.append(np.concatenate([[-w], n]))
    if not moving_set.is_static and abs(t - moving_set.time_domain[0]) <= tol:
        normals.append(np.concatenate([[-1.0], np.zeros(moving_set.dim)]))
    return normals


def _horizontal_covectors(moving_set: MovingSet, candidate: CandidateValueFunction, t: float, x: np.ndarray) -> List[np.ndarray]:
    covectors = []
    for g in graph_normals(moving_set, t, x):
        if candidate.autonomous:
            if g[0] != 0.0 and not np.any(g[1:]):
                continue
            covectors.append(np.concatenate([g[1:], [0.0]]))
        else:
            covectors.append(np.concatenate([g, [0.0]]))
    return covectors


def _is_horizontal(v: np.ndarray) -> bool:
    return abs(float(v[-1])) <= HORIZONTAL_TOL * max(1.0, float(np.linalg.norm(v)))


def _as_normals(vectors: Sequence[np.ndarray], source: str) -> List[Normal]:
    return [Normal(np.asarray(v, dtype=float), _is_horizontal(np.asarray(v)), source) for v in vectors]


def _full_point(candidate: CandidateValueFunction, t: float, x: np.ndarray) -> np.ndarray:
    return x.copy() if candidate.autonomous else np.concatenate([[t], x])


def _fd_value(candidate: CandidateValueFunction, moving_set: MovingSet, t0: float, z: np.ndarray) -> Optional[float]:
    t, x = (t0, z) if candidate.autonomous else (float(z[0]), z[1:])
    lo, hi = moving_set.time_domain
    if t < lo - MEMBERSHIP_TOL or t > hi + MEMBERSHIP_TOL:
        return None
    try:
        if not moving_set.contains(t, x):
            return None
        return candidate(t, x)
    except SweepctlError:
        return None


def _fd_gradient(candidate, moving_set, t0: float, z: np.ndarray, h: float) -> Optional[np.ndarray]:
    centre = _fd_value(candidate, moving_set, t0, z)
    if centre is None:
        return None
    grad = np.zeros(z.size)
    for i in range(z.size):
        e = np.zeros(z.size)
        e[i] = h
        ahead = _fd_value(candidate, moving_set, t0, z + e)
        behind = _fd_value(candidate, moving_set, t0, z - e)
        if ahead is not None and behind is not None:
            grad[i] = (ahead - behind) / (2.0 * h)
        elif ahead is not None:
            grad[i] = (ahead - centre) / h
        elif behind is not None:
            grad[i] = (centre - behind) / h
        else:
            return None
    return grad


def limiting_gradients(
    candidate: CandidateValueFunction,
    moving_set: MovingSet,
    t: float,
    x: np.ndarray
) -> Tuple[List[np.ndarray], str]:
    """
    Gradients of theta near (t, x) by finite differences, clustered

    Gradients are taken at offsets of two steps along every coordinate so
    that a kink through the point separates them. Returns the distinct
    gradients and whether the point is 'smooth', a 'convex' kink or a
    'concave' kink (decided by second differences across the kink).
    """
    h = candidate.fd_step
    z = _full_point(candidate, t, x)
    samples = []
    for i in range(z.size):
        for sign in (-1.0, 1.0):
            offset = z.copy()
            offset[i] += sign * 2.0 * h
            g = _fd_gradient(candidate, moving_set, t, offset, h)
            if g is not None:
                samples.append(g)
    centre = _fd_gradient(candidate, moving_set, t, z, h)
    clusters: List[np.ndarray] = []
    for g in samples:
        if all(np.linalg.norm(g - c) > candidate.kink_tol for c in clusters):
            clusters.append(g)
    if len(clusters) <= 1:
        if centre is not None:
            return [centre], "smooth"
        return clusters, "smooth"

    value = _fd_value(candidate, moving_set, t, z)
    kind = "convex"
    for a, b in itertools.combinations(clusters, 2):
        v = (a - b) / np.linalg.norm(a - b)
        ahead = _fd_value(candidate, moving_set, t, z + h * v)
        behind = _fd_value(candidate, moving_set, t, z - h * v)
        if value is not None and ahead is not None and behind is not None and ahead + behind - 2.0 * value < 0.0:
            kind = "concave"
            break
    return clusters, kind


def _check_value(candidate: CandidateValueFunction, pt: AugmentedPoint, side: str, vertical: bool, tol: float) -> float:
    theta = candidate(pt.tau, pt.point)
    gap = pt.lam - theta
    if vertical:
        wrong_side = gap <= tol if side == "epi" else gap >= -tol
        if wrong_side:
            raise ValueMismatch(
                f"Vertical {side} probe needs lambda {'above' if side == 'epi' else 'below'} theta",
                {"lambda": pt.lam, "theta": theta}
            )
    elif abs(gap) > tol:
        raise ValueMismatch(f"lambda={pt.lam} differs from theta={theta}", {"lambda": pt.lam, "theta": theta})
    return theta


def _candidate_normals(
    candidate: CandidateValueFunction,
    moving_set: MovingSet,
    pt: AugmentedPoint,
    side: str,
    vertical: bool,
    tol: float
) -> List[Normal]:
    _check_value(candidate, pt, side, vertical, tol)
    t, x = pt.tau, pt.point
    feature = candidate.feature_at(t, x)
    if vertical:
        if feature is not None:
            table = feature.epi(t, x) if side == "epi" else feature.hypo(t, x)
            return [n for n in _as_normals(table, feature.name) if n.horizontal]
        return _as_normals(_horizontal_covectors(moving_set, candidate, t, x), "graph")
    if feature is not None:
        table = feature.epi(t, x) if side == "epi" else feature.hypo(t, x)
        return _as_normals(table, feature.name)

    sign = -1.0 if side == "epi" else 1.0
    normals = []
    if candidate.gradient is not None:
        grad = np.asarray(candidate.gradient(t, x), dtype=float)
        normals.extend(_as_normals([np.concatenate([-sign * grad, [sign]])], "gradient"))
    else:
        gradients, kind = limiting_gradients(candidate, moving_set, t, x)
        keep = kind == "smooth" or (kind == "convex" and side == "epi") or (kind == "concave" and side == "hypo")
        if keep:
            source = "gradient" if kind == "smooth" else "kink"
            normals.extend(_as_normals([np.concatenate([-sign * g, [sign]]) for g in gradients], source))
    normals.extend(_as_normals(_horizontal_covectors(moving_set, candidate, t, x), "graph"))
    return normals


def epi_normals(
    candidate: CandidateValueFunction,
    moving_set: MovingSet,
    pt: AugmentedPoint,
    vertical: bool = False,
    tol: float = ANALYTIC_HJ_TOL
) -> List[Normal]:
    """
    Proximal normal generators of epi(theta) at pt

    From a declared feature table when one contains the point; otherwise
    (grad theta, -1) plus the horizontal normals of graph(C), with kinks
    detected from finite differences when no analytic gradient exists.
    Vertical probes (lambda above theta over the boundary of graph(C)) only
    carry horizontal normals.

    Raises:
        ValueMismatch: if pt.lam is not theta(pt) (or not above it when vertical)
    """
    return _candidate_normals(candidate, moving_set, pt, "epi", vertical, tol)


def hypo_normals(
    candidate: CandidateValueFunction,
    moving_set: MovingSet,
    pt: AugmentedPoint,
    vertical: bool = False,
    tol: float = ANALYTIC_HJ_TOL
) -> List[Normal]:
    """
    Proximal normal generators of hypo(theta) at pt: (-grad theta, 1)
    plus horizontal normals, or the declared feature table

    Raises:
        ValueMismatch: if pt.lam is not theta(pt) (or not below it when vertical)
    """
    return _candidate_normals(candidate, moving_set, pt, "hypo", vertical, tol)


# ---------------------------------------------------------------------------
# Sample plans
# ---------------------------------------------------------------------------

def _plan_times(moving_set: MovingSet, dt: float) -> np.ndarray:
    if moving_set.is_static:
        return np.array([moving_set.time_domain[0]])
    lo, hi = moving_set.sampling_window()
    n = int(round((hi - lo) / dt)) + 1
    return np.linspace(lo, hi, max(n, 2))


def _plan_nodes(moving_set: MovingSet, t: float, plan: SamplePlan) -> np.ndarray:
    if plan.bounds is not None:
        lo, hi = as_point(plan.bounds[0], moving_set.dim), as_point(plan.bounds[1], moving_set.dim)
    else:
        lo, hi = moving_set.bounds_at(t)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("Sample plan needs finite bounds for an unbounded set")
    axes = [a + plan.dx * np.arange(int(math.floor((b - a) / plan.dx + 1e-9)) + 1) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.column_stack([m.ravel() for m in mesh])
    nodes = nodes[moving_set.contains_many(t, nodes)]
    boundary = moving_set.boundary_samples(t, plan.boundary_points)
    if boundary.size:
        boundary = boundary[moving_set.contains_many(t, boundary)]
        nodes = np.vstack([nodes, boundary])
    return nodes


def plan_points(
    moving_set: MovingSet,
    plan: SamplePlan,
    candidate: Optional[CandidateValueFunction] = None
) -> List[Tuple[float, np.ndarray]]:
    """Probe points of graph(C) in a fixed order: grid nodes, boundary samples, feature samples, extra points"""
    points = []
    for t in _plan_times(moving_set, plan.dt):
        t = float(t)
        points.extend((t, x) for x in _plan_nodes(moving_set, t, plan))
    if candidate is not None and plan.features:
        for feature in candidate.features:
            points.extend((float(t), as_point(x, moving_set.dim)) for t, x in feature.samples)
    points.extend((float(t), as_point(x, moving_set.dim)) for t, x in plan.points)
    return points


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def _pairwise_sums(normals: List[Normal]) -> List[Normal]:
    sums = []
    for a, b in itertools.combinations(normals, 2):
        v = a.vector + b.vector
        norm = float(np.linalg.norm(v))
        if norm > HORIZONTAL_TOL:
            v = v / norm
            sums.append(Normal(v, _is_horizontal(v), "combination"))
    return sums


def _record(moving_set, field, t, x, lam, normal: Normal, rho, tol, maximize, label) -> ProbeRecord:
    p_t, p_x, p_lam = _split_covector(moving_set, normal.vector)
    value = _state_hamiltonian(moving_set, field, t, x, p_t, p_x, rho, maximize) - p_lam
    return ProbeRecord(
        t=t,
        x=x.tolist(),
        lam=lam,
        p=normal.vector.tolist(),
        inequality=label,
        value=value,
        passed=value <= tol,
        horizontal=normal.horizontal,
        source=normal.source
    )


def _probe_candidate(moving_set, field, target, candidate, t, x, rho, tol, vertical) -> List[ProbeRecord]:
    theta = candidate(t, x)
    pt = AugmentedPoint.of(t, x, theta)
    in_target = bool(target.contains_many(x[None, :])[0])
    at_end = not moving_set.is_static and t >= moving_set.time_domain[1] - MEMBERSHIP_TOL

    epi = epi_normals(candidate, moving_set, pt, tol=math.inf)
    hypo = hypo_normals(candidate, moving_set, pt, tol=math.inf)
    if not in_target and not at_end:
        epi = epi + _pairwise_sums(epi)
        hypo = hypo + _pairwise_sums(hypo)

    records = []
    for normal in epi:
        # horizontal epigraph normals are shared with the hypograph: tested against H+
        maximize = normal.horizontal
        records.append(_record(moving_set, field, t, x, theta, normal, rho, tol, maximize, "H+" if maximize else "H-"))
    for normal in hypo:
        records.append(_record(moving_set, field, t, x, theta, normal, rho, tol, True, "H+"))

    if vertical and moving_set._normals(t, x, MEMBERSHIP_TOL):
        for side, lam in (("epi", theta + 1.0), ("hypo", theta - 1.0)):
            pt_v = AugmentedPoint.of(t, x, lam)
            normals = _candidate_normals(candidate, moving_set, pt_v, side, True, 0.0)
            for normal in normals:
                vertical_normal = Normal(normal.vector, True, f"vertical:{normal.source}")
                records.append(_record(moving_set, field, t, x, lam, vertical_normal, rho, tol, True, "H+"))
    return records


def _check_signs(candidate, target, points, tol) -> None:
    for t, x in points:
        theta = candidate(t, x)
        in_target = bool(target.contains_many(x[None, :])[0])
        if in_target and abs(theta) > tol:
            raise SignConditionFailed(
                f"theta={theta:.6g} is not zero on the target at ({t}, {x.tolist()})",
                {"t": t, "x": x.tolist(), "theta": theta}
            )
        if not in_target and not theta > 0.0:
            raise SignConditionFailed(
                f"theta={theta:.6g} is not positive off the target at ({t}, {x.tolist()})",
                {"t": t, "x": x.tolist(), "theta": theta}
            )


def _summarize(check: str, records: List[ProbeRecord], tol: float, rho: float, n_probes: int, skipped: int) -> HamiltonianReport:
    worst = max(records, key=lambda r: r.value) if records else None
    max_violation = worst.value if worst is not None else -math.inf
    return HamiltonianReport(
        check=check,
        tol=tol,
        rho=rho,
        n_probes=n_probes,
        records=records,
        max_violation=max_violation,
        worst=worst,
        passed=all(r.passed for r in records),
        skipped=skipped
    )


def _run_chunks(func: Callable, items: List, workers: int) -> List:
    chunks = [c for c in np.array_split(np.arange(len(items)), max(1, workers)) if c.size]
    if workers <= 1 or len(chunks) <= 1:
        results = [func([items[i] for i in c]) for c in chunks]
    else:
        results = Parallel(n_jobs=workers, prefer="threads")(delayed(func)([items[i] for i in c]) for c in chunks)
    return results


def verify_candidate(
    moving_set: MovingSet,
    field: ControlField,
    target: TargetSet,
    candidate: CandidateValueFunction,
    plan: Optional[SamplePlan] = None,
    tol: float = ANALYTIC_HJ_TOL,
    rho: Optional[float] = None,
    workers: int = 1
) -> HamiltonianReport:
    """
    Check (H-) at the non-horizontal epigraph normals and (H+) at the
    hypograph and horizontal normals over a sample plan

    Off the target (and before the end of the time domain) pairwise sums
    of the generators are probed too.

    Raises:
        SignConditionFailed: if theta is not zero on S or not positive off S
    """
    plan = plan or SamplePlan()
    rho = moving_set.lipschitz + field.bound if rho is None else rho
    points = plan_points(moving_set, plan, candidate)
    _check_signs(candidate, target, points, tol)
    logger.info(f"Verifying candidate '{candidate.name}' at {len(points)} probe points (tol={tol:g}, rho={rho:g})")

    def work(chunk):
        out, skipped = [], 0
        for t, x in chunk:
            try:
                out.extend(_probe_candidate(moving_set, field, target, candidate, t, x, rho, tol, plan.vertical))
            except (NotInGraph, ValueMismatch, TimeOutOfDomain) as exc:
                logger.debug(f"Skipping probe ({t}, {x.tolist()}): {exc}")
                skipped += 1
        return out, skipped

    results = _run_chunks(work, points, workers)
    records = [r for chunk, _ in results for r in chunk]
    skipped = sum(s for _, s in results)
    if skipped:
        logger.warning(f"{skipped} probes left graph(C) and were skipped")
    report = _summarize("candidate", records, tol, rho, len(points), skipped)
    logger.info(f"Candidate '{candidate.name}': {'pass' if report.passed else 'FAIL'}, max value {report.max_violation:.3e}")
    return report


# ---------------------------------------------------------------------------
# Invariance
# ---------------------------------------------------------------------------

def _invariant_set_probes(moving_set: MovingSet, K: MovingSet, t: float, plan: SamplePlan) -> Tuple[np.ndarray, bool]:
    """Boundary points of K in C(t) and boundary points of C(t) in K; flag whether K meets C(t)"""
    try:
        nodes = _plan_nodes(moving_set, t, plan)
    except ValueError:
        nodes = np.zeros((0, moving_set.dim))
    c_boundary = moving_set.boundary_samples(t, plan.boundary_points)
    if isinstance(K, HalfSpace) and K.dim > 1:
        k_boundary = K.project_to_boundary(np.vstack([nodes, c_boundary])) if nodes.size or c_boundary.size else nodes
    else:
        k_boundary = K.boundary_samples(t, plan.boundary_points)
    k_boundary = k_boundary[moving_set.contains_many(t, k_boundary)] if k_boundary.size else k_boundary
    c_boundary = c_boundary[K.contains_many(t, c_boundary)] if c_boundary.size else c_boundary
    meets = bool(k_boundary.size or c_boundary.size or (nodes.size and np.any(K.contains_many(t, nodes))))
    probes = np.vstack([k_boundary.reshape(-1, moving_set.dim), c_boundary.reshape(-1, moving_set.dim)])
    return probes, meets


def _intersection_normals(moving_set: MovingSet, K: MovingSet, t: float, x: np.ndarray) -> List[Normal]:
    k_normals = [np.concatenate([[0.0], n]) for n in K._normals(t, x, MEMBERSHIP_TOL)]
    c_normals = graph_normals(moving_set, t, x)
    normals = _as_normals(k_normals, "K") + _as_normals(c_normals, "graph")
    for a in k_normals:
        for b in c_normals:
            v = a + b
            norm = float(np.linalg.norm(v))
            if norm > HORIZONTAL_TOL:
                normals.append(Normal(v / norm, False, "K+graph"))
    return normals


def _invariance_check(moving_set, field, K, plan, tol, rho, maximize, workers) -> HamiltonianReport:
    if not K.is_static:
        raise ValueError("The candidate invariant set must be time-independent")
    plan = plan or SamplePlan()
    rho = moving_set.lipschitz + field.bound if rho is None else rho
    label = "Hpiu" if maximize else "Hmeno"

    probes: List[Tuple[float, np.ndarray]] = []
    empty_times = 0
    times = _plan_times(moving_set, plan.dt)
    for t in times:
        t = float(t)
        points, meets = _invariant_set_probes(moving_set, K, t, plan)
        if not meets:
            empty_times += 1
            continue
        probes.extend((t, x) for x in points)
    if empty_times == len(times):
        raise EmptyIntersection("K does not meet C(t) at any probed time", {"times": len(times)})
    if empty_times:
        logger.warning(f"K misses C(t) at {empty_times} of {len(times)} probed times; those times are skipped")

    def work(chunk):
        out = []
        for t, x in chunk:
            for normal in _intersection_normals(moving_set, K, t, x):
                p_t, p_x = float(normal.vector[0]), normal.vector[1:]
                value = _state_hamiltonian(moving_set, field, t, x, p_t, p_x, rho, maximize)
                out.append(ProbeRecord(
                    t=t,
                    x=x.tolist(),
                    p=normal.vector.tolist(),
                    inequality=label,
                    value=value,
                    passed=value <= tol,
                    source=normal.source
                ))
        return out

    records = [r for chunk in _run_chunks(work, probes, workers) for r in chunk]
    check = "strong_invariance" if maximize else "weak_invariance"
    report = _summarize(check, records, tol, rho, len(probes), empty_times)
    logger.info(f"{check}: {'pass' if report.passed else 'FAIL'} over {len(records)} normals, max value {report.max_violation:.3e}")
    return report


def weak_invariance_check(
    moving_set: MovingSet,
    field: ControlField,
    K: MovingSet,
    plan: Optional[SamplePlan] = None,
    tol: float = ANALYTIC_HJ_TOL,
    rho: Optional[float] = None,
    workers: int = 1
) -> HamiltonianReport:
    """
    Weak invariance of graph(C) cap ([t0, inf) x K): the G-minimised
    Hamiltonian is <= tol at every sampled normal of the intersection

    Raises:
        EmptyIntersection: if K misses C(t) at every probed time
    """
    return _invariance_check(moving_set, field, K, plan, tol, rho, False, workers)


def strong_invariance_check(
    moving_set: MovingSet,
    field: ControlField,
    K: MovingSet,
    plan: Optional[SamplePlan] = None,
    tol: float = ANALYTIC_HJ_TOL,
    rho: Optional[float] = None,
    workers: int = 1
) -> HamiltonianReport:
    """Strong invariance: as weak_invariance_check with the G-summand maximised"""
    return _invariance_check(moving_set, field, K, plan, tol, rho, True, workers)


def grid_candidate(grid: ValueGrid) -> CandidateValueFunction:
    """
    Interpolated solver values as a candidate; normals come from finite
    differences at twice the grid spacing
    """
    spacing = max(grid.dx) if grid.autonomous else max(max(grid.dx), grid.dt)
    return CandidateValueFunction(
        value=lambda t, x: mintime_at(grid, t, x),
        dim=grid.moving_set.dim,
        autonomous=grid.autonomous,
        fd_step=2.0 * spacing,
        kink_tol=GRID_KINK_TOL,
        name="grid"
    )
