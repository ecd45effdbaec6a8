"""
Module C: Minimum-time solver
Semi-Lagrangian Bellman recursion on graph(C), brute-force oracle and the
controllability diagnostics (Petrov-type decrease condition, continuity
modulus and reach-time bounds)
"""
import logging
import math
import warnings
from dataclasses import dataclass, field as dataclass_field
from enum import IntEnum
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.integrate import IntegrationWarning, quad

from sweepctl.models.report import DescentReport, OracleResult, PetrovPoint, PetrovReport
from sweepctl.models.request import MuSpec
from sweepctl.modules.a_geometry import MovingSet, TargetSet, target_superdifferential
from sweepctl.modules.b_dynamics import ControlField, Policy, constant_policy, simulate
from sweepctl.modules.numerics.interpolation import apply_stencil, build_stencil, interpolate
from sweepctl.utils.constants import (
    BALL_CONTROL_SAMPLES,
    DESCENT_MAX_STEPS,
    HIT_BISECTION_ITERATIONS,
    MEMBERSHIP_TOL,
    MODULUS_K_PRIME,
    ORACLE_BUDGET,
    ORACLE_HORIZON,
    ORACLE_MAX_SEGMENTS,
    ORACLE_STEP,
    PETROV_DELTA,
    PETROV_NEIGHBORS,
    PETROV_SIGMA_LEVELS,
    QUAD_LIMIT,
    TARGET_TOL,
    VALUE_ITERATION_MAX_SWEEPS,
    VALUE_ITERATION_TOL,
)
from sweepctl.utils.exceptions import (
    BudgetExceeded,
    DivergentIntegral,
    EmptyIntersection,
    GridTooCoarse,
    OutsideGraph,
    StepTooLarge,
    TimeOutOfDomain,
)
from sweepctl.utils.validators import PointLike, as_point

logger = logging.getLogger(__name__)

MuLike = Union[MuSpec, Callable[[float], float]]


class NodeStatus(IntEnum):
    TARGET = 0
    REACHED = 1
    UNREACHED = 2
    OUTSIDE_C = 3


@dataclass
class ValueGrid:
    """
    Minimum-time values on a tensor grid over graph(C)

    `values` has shape (len(times), *spatial) for moving constraints and
    `spatial` for static ones (times is None).
    """

    axes: Tuple[np.ndarray, ...]
    times: Optional[np.ndarray]
    values: np.ndarray
    status: np.ndarray
    in_c: np.ndarray
    dx: Tuple[float, ...]
    dt: float
    moving_set: MovingSet
    field: ControlField
    target: TargetSet
    n_controls: int = BALL_CONTROL_SAMPLES
    sweeps: int = 0
    converged: bool = True
    final_change: float = 0.0
    partial_stencils: int = 0

    @property
    def autonomous(self) -> bool:
        return self.times is None

    @property
    def spatial_shape(self) -> Tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    def nodes(self) -> np.ndarray:
        """Spatial nodes in C-order, shape (N, dim)"""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def to_frame(self) -> pd.DataFrame:
        """Columns t, x1..xn, T, status (t is NaN for static constraints)"""
        nodes = self.nodes()
        n_nodes = nodes.shape[0]
        if self.autonomous:
            t = np.full(n_nodes, np.nan)
            X = nodes
            values = self.values.ravel()
            status = self.status.ravel()
        else:
            n_t = self.times.size
            t = np.repeat(self.times, n_nodes)
            X = np.tile(nodes, (n_t, 1))
            values = self.values.reshape(n_t * n_nodes)
            status = self.status.reshape(n_t * n_nodes)
        data = {"t": t}
        for i in range(X.shape[1]):
            data[f"x{i + 1}"] = X[:, i]
        data["T"] = values
        data["status"] = [NodeStatus(s).name for s in status]
        return pd.DataFrame(data)

    def counts(self) -> dict:
        return {s.name: int(np.sum(self.status == s)) for s in NodeStatus}


def _build_axes(lo: np.ndarray, hi: np.ndarray, dx: Sequence[float]) -> Tuple[np.ndarray, ...]:
    """Uniform axes over the box inflated by one cell, spacing exactly dx"""
    axes = []
    for a, b, h in zip(lo, hi, dx):
        start = a - h
        n = int(math.ceil((b + h - start) / h - 1e-9)) + 1
        axes.append(start + h * np.arange(n))
    return tuple(axes)


def _check_resolution(moving_set: MovingSet, field: ControlField, dx: Sequence[float], dt: float) -> None:
    speed = moving_set.lipschitz + field.bound
    if dt * speed < 0.5 * min(dx):
        raise GridTooCoarse(
            f"dt*(L_C+M)={dt * speed:.3g} is below half a cell ({0.5 * min(dx):.3g}); "
            f"the scheme would not leave the interpolation stencil",
            {"dt": dt, "dx": list(dx), "L": speed}
        )
    if max(dx) > 0.5 * moving_set.prox_radius:
        raise GridTooCoarse(
            f"cell size {max(dx):.3g} exceeds half the prox radius {moving_set.prox_radius:.3g}",
            {"dx": list(dx), "r": moving_set.prox_radius}
        )
    if not math.isinf(moving_set.prox_radius) and 2.0 * dt * speed >= moving_set.prox_radius:
        raise StepTooLarge(
            f"dt={dt} violates 2 dt (L_C + M) < r",
            {"dt": dt, "L": speed, "r": moving_set.prox_radius}
        )


def _parallel_map(func: Callable, chunks: List, workers: int) -> List:
    if workers <= 1 or len(chunks) <= 1:
        return [func(c) for c in chunks]
    return Parallel(n_jobs=workers, prefer="threads")(delayed(func)(c) for c in chunks)


def _chunks(n: int, workers: int) -> List[np.ndarray]:
    return [c for c in np.array_split(np.arange(n), max(1, workers)) if c.size]


def _hit_fraction(target: TargetSet, start: np.ndarray, end: np.ndarray) -> np.ndarray:
    """Smallest s in (0, 1] with start + s (end - start) in S, by bisection"""
    lo = np.zeros(start.shape[0])
    hi = np.ones(start.shape[0])
    for _ in range(HIT_BISECTION_ITERATIONS):
        mid = 0.5 * (lo + hi)
        inside = target.contains_many(start + mid[:, None] * (end - start), TARGET_TOL)
        hi = np.where(inside, mid, hi)
        lo = np.where(inside, lo, mid)
    return hi


def _step_targets(
    moving_set: MovingSet,
    field: ControlField,
    target: TargetSet,
    t_next: float,
    X: np.ndarray,
    dt: float,
    u: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Projected one-step images of X under control u, hit flags and hit costs"""
    free = X + dt * (field.drift_many(0.0, X) + u)
    P = moving_set.project_many(t_next, free)
    hit = target.contains_many(P, TARGET_TOL)
    cost = np.full(X.shape[0], dt)
    if np.any(hit):
        cost[hit] = dt * _hit_fraction(target, X[hit], P[hit])
    return P, hit, cost


def solve_mintime(
    moving_set: MovingSet,
    field: ControlField,
    target: TargetSet,
    dx: Union[float, Sequence[float]],
    dt: Optional[float] = None,
    n_controls: int = BALL_CONTROL_SAMPLES,
    tol: float = VALUE_ITERATION_TOL,
    max_sweeps: int = VALUE_ITERATION_MAX_SWEEPS,
    bounds: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    workers: int = 1
) -> ValueGrid:
    """
    Minimum time to reach S on a grid over graph(C)

    Moving constraints use a backward recursion in t from t_max; static
    constraints iterate the one-step operator to a fixed point (double
    buffered, sup-norm change < tol).

    Args:
        moving_set: Constraint C
        field: Velocity set G
        target: Target S
        dx: Spatial spacing (scalar or per axis)
        dt: Time step; defaults to min(dx) / (L_C + M) (moving) or min(dx) (static)
        n_controls: Boundary samples for ball-valued G
        tol: Value-iteration stopping threshold
        max_sweeps: Value-iteration cap
        bounds: Spatial box overriding C's bounding box
        workers: Threads for the node updates

    Returns:
        ValueGrid

    Raises:
        EmptyIntersection: if no grid node lies in S and C(t)
        GridTooCoarse: if the step does not leave the interpolation stencil
    """
    dim = moving_set.dim
    spacing = tuple(float(v) for v in np.broadcast_to(np.asarray(dx, dtype=float), (dim,)))
    if any(h <= 0 for h in spacing):
        raise ValueError("dx must be positive")
    lo, hi = (as_point(bounds[0], dim), as_point(bounds[1], dim)) if bounds else moving_set.bounding_box()
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("Unbounded constraint: pass explicit grid bounds")
    axes = _build_axes(lo, hi, spacing)
    speed = moving_set.lipschitz + field.bound
    if dt is None:
        dt = min(spacing) / speed if not moving_set.is_static else min(spacing)
    _check_resolution(moving_set, field, spacing, dt)

    shape = tuple(a.size for a in axes)
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.column_stack([m.ravel() for m in mesh])
    controls = field.controls(n_controls)
    logger.info(
        f"Solving minimum time on {'x'.join(map(str, shape))} nodes, dx={spacing}, dt={dt:.4g}, "
        f"{controls.shape[0]} controls, {'static' if moving_set.is_static else 'moving'} constraint"
    )

    if moving_set.is_static:
        return _value_iteration(moving_set, field, target, axes, nodes, shape, spacing, dt, controls,
                                n_controls, tol, max_sweeps, workers)
    return _backward_recursion(moving_set, field, target, axes, nodes, shape, spacing, dt, controls,
                               n_controls, workers)


def _status(values: np.ndarray, in_c: np.ndarray, is_target: np.ndarray) -> np.ndarray:
    status = np.full(values.shape, NodeStatus.OUTSIDE_C, dtype=np.int8)
    status[in_c & np.isfinite(values)] = NodeStatus.REACHED
    status[in_c & ~np.isfinite(values)] = NodeStatus.UNREACHED
    status[is_target] = NodeStatus.TARGET
    return status


def _value_iteration(moving_set, field, target, axes, nodes, shape, spacing, dt, controls,
                     n_controls, tol, max_sweeps, workers) -> ValueGrid:
    t0 = moving_set.time_domain[0]
    in_c = moving_set.contains_many(t0, nodes)
    is_target = in_c & target.contains_many(nodes)
    if not np.any(is_target):
        raise EmptyIntersection("No grid node lies in both S and C", {"nodes": int(nodes.shape[0])})
    active = np.flatnonzero(in_c & ~is_target)
    X = nodes[active]

    # stencils are fixed for a static constraint: build them once
    def prepare(chunk: np.ndarray):
        pieces = []
        for u in controls:
            P, hit, cost = _step_targets(moving_set, field, target, t0, X[chunk], dt, u)
            index, weights = build_stencil(axes, P)
            pieces.append((hit, cost, index, weights))
        return pieces

    prepared = _parallel_map(prepare, _chunks(X.shape[0], workers), workers)
    per_control = []
    for j in range(controls.shape[0]):
        per_control.append(tuple(np.concatenate([p[j][k] for p in prepared]) for k in range(4)))

    V = np.full(nodes.shape[0], np.inf)
    V[is_target] = 0.0
    converged, change, sweep, partial = False, math.inf, 0, 0
    for sweep in range(1, max_sweeps + 1):
        best = np.full(active.size, np.inf)
        partial_mask = np.zeros(active.size, dtype=bool)
        for hit, cost, index, weights in per_control:
            cont, part = apply_stencil(V, index, weights)
            cand = np.where(hit, cost, cost + cont)
            better = cand < best
            partial_mask = np.where(better, part & ~hit, partial_mask)
            best = np.minimum(best, cand)
        old = V[active]
        both = np.isfinite(old) & np.isfinite(best)
        newly = int(np.sum(np.isfinite(best) & ~np.isfinite(old)))
        change = float(np.max(np.abs(best[both] - old[both]))) if np.any(both) else 0.0
        V_new = V.copy()
        V_new[active] = best
        V = V_new
        partial = int(np.sum(partial_mask))
        if sweep % 500 == 0:
            logger.debug(f"value iteration sweep {sweep}: change={change:.3e}, new nodes={newly}")
        if newly == 0 and change < tol:
            converged = True
            break

    if converged:
        logger.info(f"Value iteration converged after {sweep} sweeps (sup change {change:.3e})")
    else:
        logger.warning(f"Value iteration stopped after {sweep} sweeps without converging (sup change {change:.3e})")
    if partial:
        logger.debug(f"{partial} nodes used partial interpolation stencils")

    values = V.reshape(shape)
    in_c_grid = in_c.reshape(shape)
    return ValueGrid(
        axes=axes,
        times=None,
        values=values,
        status=_status(values, in_c_grid, is_target.reshape(shape)),
        in_c=in_c_grid,
        dx=spacing,
        dt=dt,
        moving_set=moving_set,
        field=field,
        target=target,
        n_controls=n_controls,
        sweeps=sweep,
        converged=converged,
        final_change=change,
        partial_stencils=partial
    )


def _backward_recursion(moving_set, field, target, axes, nodes, shape, spacing, dt, controls,
                        n_controls, workers) -> ValueGrid:
    t_start, t_end = moving_set.time_domain
    if math.isinf(t_end):
        raise ValueError("Moving constraint needs a finite time domain for the backward recursion")
    n_t = int(round((t_end - t_start) / dt)) + 1
    times = np.linspace(t_start, t_end, n_t)
    step = (t_end - t_start) / (n_t - 1)

    in_c = np.zeros((n_t, nodes.shape[0]), dtype=bool)
    for k, t in enumerate(times):
        in_c[k] = moving_set.contains_many(float(t), nodes)
    on_target = target.contains_many(nodes)
    is_target = in_c & on_target[None, :]
    if not np.any(is_target):
        raise EmptyIntersection("S and C(t) share no grid node at any grid time", {"times": n_t})

    values = np.full((n_t, nodes.shape[0]), np.inf)
    values[-1, is_target[-1]] = 0.0
    partial_total = 0
    for k in range(n_t - 2, -1, -1):
        t_next = float(times[k + 1])
        active = np.flatnonzero(in_c[k] & ~is_target[k])
        X = nodes[active]
        upper = values[k + 1].reshape(shape)

        def update(chunk: np.ndarray, X=X, upper=upper, t_next=t_next):
            best = np.full(chunk.size, np.inf)
            partial = np.zeros(chunk.size, dtype=bool)
            for u in controls:
                P, hit, cost = _step_targets(moving_set, field, target, t_next, X[chunk], step, u)
                cont, part = interpolate(axes, upper, P)
                cand = np.where(hit, cost, cost + cont)
                partial = np.where(cand < best, part & ~hit, partial)
                best = np.minimum(best, cand)
            return best, partial

        results = _parallel_map(update, _chunks(X.shape[0], workers), workers)
        if results:
            values[k, active] = np.concatenate([r[0] for r in results])
            partial_total += int(sum(np.sum(r[1]) for r in results))
        values[k, is_target[k]] = 0.0
        if k % 200 == 0:
            logger.debug(f"slice t={times[k]:.4f}: {int(np.sum(np.isfinite(values[k])))} finite nodes")

    logger.info(f"Backward recursion finished over {n_t} time slices")
    values = values.reshape((n_t,) + shape)
    in_c_grid = in_c.reshape((n_t,) + shape)
    return ValueGrid(
        axes=axes,
        times=times,
        values=values,
        status=_status(values, in_c_grid, is_target.reshape((n_t,) + shape)),
        in_c=in_c_grid,
        dx=spacing,
        dt=step,
        moving_set=moving_set,
        field=field,
        target=target,
        n_controls=n_controls,
        sweeps=n_t - 1,
        partial_stencils=partial_total
    )


def mintime_at(grid: ValueGrid, t0: float, x0: PointLike) -> float:
    """
    Interpolated minimum time at (t0, x0); +inf when every stencil node is unreached

    Raises:
        OutsideGraph: if x0 is not in C(t0) or outside the grid
    """
    moving_set = grid.moving_set
    point = as_point(x0, moving_set.dim)
    try:
        inside = moving_set.contains(t0, point)
    except TimeOutOfDomain as exc:
        raise OutsideGraph(f"t0={t0} is outside the time domain", exc.details) from exc
    if not inside:
        raise OutsideGraph(f"({t0}, {point.tolist()}) is not in graph(C)", {"t": t0, "x": point.tolist()})
    for axis, value in zip(grid.axes, point):
        if value < axis[0] - MEMBERSHIP_TOL or value > axis[-1] + MEMBERSHIP_TOL:
            raise OutsideGraph(f"{point.tolist()} lies outside the grid box", {"x": point.tolist()})
    if grid.target.contains_many(point[None, :])[0]:
        return 0.0
    if grid.autonomous:
        value, _ = interpolate(grid.axes, grid.values, point[None, :])
    else:
        value, _ = interpolate((grid.times,) + grid.axes, grid.values, np.concatenate([[t0], point])[None, :])
    return float(value[0])


def greedy_policy(grid: ValueGrid) -> Policy:
    """
    Feedback selecting the extreme velocity that minimises the one-step
    Bellman cost against the grid values
    """
    moving_set, field, target = grid.moving_set, grid.field, grid.target
    controls = field.controls(grid.n_controls)
    t_last = moving_set.time_domain[1]

    def policy(t: float, x: np.ndarray) -> np.ndarray:
        t_next = t if grid.autonomous else min(t + grid.dt, t_last)
        step = grid.dt if grid.autonomous else max(t_next - t, 0.0)
        best_cost, best_u = math.inf, controls[0]
        if step <= 0.0:
            return field.velocity(t, x, best_u)
        X = x[None, :]
        for u in controls:
            P, hit, cost = _step_targets(moving_set, field, target, t_next, X, step, u)
            if hit[0]:
                total = float(cost[0])
            elif grid.autonomous:
                total = float(cost[0] + interpolate(grid.axes, grid.values, P)[0][0])
            else:
                query = np.concatenate([[t_next], P[0]])[None, :]
                total = float(cost[0] + interpolate((grid.times,) + grid.axes, grid.values, query)[0][0])
            if total < best_cost:
                best_cost, best_u = total, u
        return field.velocity(t, x, best_u)

    return policy


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def _run_schedule(moving_set, field, target, t0, x0, controls, switch_times, horizon, h) -> float:
    """Hit time of a piecewise-constant control schedule (inf when S is not reached)"""
    t, x = t0, as_point(x0, moving_set.dim)
    ends = list(switch_times) + [t0 + horizon]
    for u, t_end in zip(controls, ends):
        duration = t_end - t
        if duration <= 0.0:
            continue
        record = simulate(moving_set, field, constant_policy(field, u), t, x, target, h, duration)
        if record.hit_time is not None:
            return record.hit_time - t0
        if record.status == "DOMAIN_END":
            return math.inf
        t, x = float(record.times[-1]), record.states[-1]
    return math.inf


def oracle_mintime(
    moving_set: MovingSet,
    field: ControlField,
    target: TargetSet,
    t0: float,
    x0: PointLike,
    n_segments: int = ORACLE_MAX_SEGMENTS,
    horizon: Optional[float] = None,
    h: float = ORACLE_STEP,
    budget: int = ORACLE_BUDGET,
    refine: bool = True
) -> OracleResult:
    """
    Exhaustive search over piecewise-constant extreme controls

    Depth-first over n_segments equal segments with pruning against the
    incumbent, then a local search on the incumbent's switch times. The
    result is an upper bound on the true minimum time.

    Raises:
        BudgetExceeded: if k**n_segments candidate schedules exceed the budget
    """
    point = as_point(x0, moving_set.dim)
    controls = field.controls()
    k = controls.shape[0]
    if k ** n_segments > budget:
        raise BudgetExceeded(
            f"{k}^{n_segments} = {k ** n_segments} schedules exceed the budget {budget}",
            {"controls": k, "segments": n_segments, "budget": budget}
        )
    t0 = moving_set.check_time(t0)
    if target.distance(point) <= TARGET_TOL:
        return OracleResult(t0=t0, x0=point.tolist(), best_time=0.0)
    if horizon is None:
        horizon = min(ORACLE_HORIZON, moving_set.time_domain[1] - t0)
    seg = horizon / n_segments

    best = {"time": math.inf, "seq": []}
    evaluated = 0

    def dfs(depth: int, t: float, x: np.ndarray, seq: List[int]) -> None:
        nonlocal evaluated
        if depth == n_segments or t - t0 >= best["time"]:
            return
        duration = min(seg, t0 + horizon - t) if depth < n_segments - 1 else t0 + horizon - t
        if duration <= 0.0:
            return
        for j in range(k):
            record = simulate(moving_set, field, constant_policy(field, controls[j]), t, x, target, h, duration)
            evaluated += 1
            if record.hit_time is not None:
                elapsed = record.hit_time - t0
                if elapsed < best["time"]:
                    best["time"], best["seq"] = elapsed, seq + [j]
                continue
            if record.status == "DOMAIN_END":
                continue
            dfs(depth + 1, float(record.times[-1]), record.states[-1], seq + [j])

    dfs(0, t0, point, [])
    seq = best["seq"]
    switches = [t0 + seg * (i + 1) for i in range(len(seq) - 1)]

    if refine and seq and len(seq) > 1:
        sched = [controls[j] for j in seq]
        shift = seg / 2.0
        while shift >= seg / 8.0:
            for i in range(len(switches)):
                for delta in (-shift, shift):
                    trial = list(switches)
                    trial[i] += delta
                    lower = switches[i - 1] if i > 0 else t0
                    upper = switches[i + 1] if i + 1 < len(switches) else t0 + horizon
                    if not (lower < trial[i] < upper):
                        continue
                    value = _run_schedule(moving_set, field, target, t0, point, sched, trial, horizon, h)
                    evaluated += 1
                    if value < best["time"]:
                        best["time"], switches = value, trial
            shift /= 2.0

    logger.info(f"Oracle at t0={t0}, x0={point.tolist()}: best time {best['time']:.6f} after {evaluated} segment runs")
    return OracleResult(
        t0=t0,
        x0=point.tolist(),
        best_time=best["time"],
        controls=[controls[j].tolist() for j in seq],
        switch_times=switches,
        evaluated=evaluated
    )


# ---------------------------------------------------------------------------
# Controllability diagnostics
# ---------------------------------------------------------------------------

def _mu_value(mu: MuLike, r: float) -> float:
    return float(mu(r))


def _mu_description(mu: MuLike) -> dict:
    if isinstance(mu, MuSpec):
        return mu.model_dump()
    return {"kind": "callable", "repr": repr(mu)}


def petrov_check(
    moving_set: MovingSet,
    field: ControlField,
    target: TargetSet,
    mu: MuLike,
    delta: float = PETROV_DELTA,
    L: Optional[float] = None,
    n_points: int = 50,
    n_neighbors: int = PETROV_NEIGHBORS,
    points: Optional[Sequence[Sequence[float]]] = None,
    seed: int = 0,
    sigma_levels: Sequence[float] = PETROV_SIGMA_LEVELS
) -> PetrovReport:
    """
    Sampled decrease condition min over (v, xi) of max over (s, y, p) of
    (v - p).xi + mu(d_S(x)) at points of graph(C)

    p ranges over sigma * n for unit normals n of C(s) at y, with
    sigma in sigma_levels * L and (s, y) within delta of (t, x).

    Args:
        points: Explicit (t, x...) probes evaluated before the random ones

    Returns:
        PetrovReport with one entry per probe outside S
    """
    L = moving_set.lipschitz + field.bound if L is None else float(L)
    rng = np.random.default_rng(seed)
    dim = moving_set.dim
    probes: List[Tuple[float, np.ndarray]] = []
    for row in points or []:
        row = as_point(row)
        probes.append((float(row[0]), as_point(row[1:], dim)))

    t_lo, t_hi = moving_set.sampling_window()
    for i in range(n_points):
        t = float(rng.uniform(t_lo, t_hi)) if t_hi > t_lo else t_lo
        x = (moving_set.sample_boundary(t, rng, 1) if i % 2 else moving_set.sample_points(t, rng, 1))[0]
        probes.append((t, x))

    entries: List[PetrovPoint] = []
    excluded = 0
    for t, x in probes:
        t = moving_set.check_time(t)
        if not moving_set.contains(t, x):
            x = moving_set.project_many(t, x[None, :])[0]
        d = target.distance(x)
        if d <= TARGET_TOL:
            excluded += 1
            continue

        normals = [np.zeros(dim)]
        neighbourhood = [(t, x)]
        for _ in range(n_neighbors):
            direction = rng.normal(size=dim + 1)
            direction /= np.linalg.norm(direction)
            radius = delta * rng.random() ** (1.0 / (dim + 1))
            s = min(max(t + radius * direction[0], moving_set.time_domain[0]), moving_set.time_domain[1])
            y = moving_set.project_many(s, (x + radius * direction[1:])[None, :])[0]
            if math.hypot(s - t, float(np.linalg.norm(y - x))) <= delta:
                neighbourhood.append((s, y))
        for s, y in neighbourhood:
            for n in moving_set._normals(s, y, MEMBERSHIP_TOL):
                normals.extend(level * L * n for level in sigma_levels if level > 0)
        P = np.vstack(normals)

        mu_d = _mu_value(mu, d)
        best = None
        for xi in target_superdifferential(target, x):
            p_dots = P @ xi
            worst_index = int(np.argmin(p_dots))
            for v in field.extreme_points(t, x):
                margin = float(v @ xi) - float(p_dots[worst_index]) + mu_d
                if best is None or margin < best[0]:
                    best = (margin, v, xi, P[worst_index])
        margin, v, xi, p = best
        entries.append(PetrovPoint(
            t=t,
            x=x.tolist(),
            d_S=d,
            v_bar=v.tolist(),
            xi_bar=xi.tolist(),
            worst_p=p.tolist(),
            margin=margin,
            passed=margin <= 0.0
        ))

    passed = all(e.passed for e in entries)
    worst = max((e.margin for e in entries), default=None)
    logger.info(
        f"Petrov check: {sum(e.passed for e in entries)}/{len(entries)} points pass, "
        f"{excluded} excluded inside S, worst margin {worst}"
    )
    return PetrovReport(
        mu=_mu_description(mu),
        delta=delta,
        L=L,
        sigma_levels=list(sigma_levels),
        points=entries,
        excluded_in_target=excluded,
        passed=passed,
        worst_margin=worst
    )


def _integrate_inverse(mu: MuLike, upper: float) -> float:
    """integral of 2 / mu(r) over [0, upper] by adaptive quadrature"""
    if upper < 0:
        raise ValueError("Upper limit must be nonnegative")
    if upper == 0.0:
        return 0.0
    kwargs = {"limit": QUAD_LIMIT, "epsabs": 1e-13, "epsrel": 1e-12}
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            if isinstance(mu, MuSpec) and mu.kind == "constant":
                value, error = quad(lambda r: 2.0 / mu.c, 0.0, upper, **kwargs)
            elif isinstance(mu, MuSpec) and mu.kind == "power":
                if mu.alpha >= 1.0:
                    raise DivergentIntegral(
                        f"1/mu is not integrable at 0 for mu(r) = {mu.c} r^{mu.alpha}",
                        {"alpha": mu.alpha}
                    )
                # algebraic weight r^(-alpha) handles the endpoint singularity exactly
                value, error = quad(lambda r: 2.0 / mu.c, 0.0, upper, weight="alg", wvar=(-mu.alpha, 0.0), **kwargs)
            elif isinstance(mu, MuSpec):
                if mu.mu_nodes[0] <= 0.0:
                    raise DivergentIntegral("Tabulated mu vanishes at 0 with linear growth; 1/mu is not integrable")
                breaks = [r for r in mu.r_nodes if 0.0 < r < upper]
                value, error = quad(lambda r: 2.0 / mu(r), 0.0, upper, points=breaks or None, **kwargs)
            else:
                value, error = quad(lambda r: 2.0 / mu(r), 0.0, upper, **kwargs)
        except (IntegrationWarning, ZeroDivisionError) as exc:
            raise DivergentIntegral(f"Quadrature of 1/mu failed on [0, {upper}]: {exc}", {"upper": upper}) from exc
    if not math.isfinite(value) or error > 1e-6 * max(1.0, abs(value)):
        raise DivergentIntegral(f"Quadrature of 1/mu did not converge on [0, {upper}]", {"value": value, "error": error})
    return float(value)


def continuity_modulus_bound(
    mu: MuLike,
    K: float,
    K_prime: float,
    dx: float,
    dt: float,
    T_bound: float
) -> float:
    """
    Bound on |T(t2,x2) - T(t1,x1)|: integral of 2/mu over
    [0, exp(K T_bound) dx + K' sqrt(dt)]

    Raises:
        DivergentIntegral: if 1/mu is not integrable near 0
    """
    if dx < 0 or dt < 0:
        raise ValueError("dx and dt must be nonnegative")
    upper = math.exp(K * T_bound) * dx + K_prime * math.sqrt(dt)
    return _integrate_inverse(mu, upper)


def reach_time_upper_bound(mu: MuLike, dS0: float) -> float:
    """A-priori bound 2 * integral_0^{d_S(x0)} ds / mu(s) on the minimum time"""
    return _integrate_inverse(mu, dS0)


def modulus_default_constants(moving_set: MovingSet, field: ControlField) -> Tuple[float, float]:
    """(K, K') defaults: K = n L_G + 1/r, K' = 1"""
    inverse_r = 0.0 if math.isinf(moving_set.prox_radius) else 1.0 / moving_set.prox_radius
    return moving_set.dim * field.lipschitz + inverse_r, MODULUS_K_PRIME


def petrov_descent(
    moving_set: MovingSet,
    field: ControlField,
    target: TargetSet,
    mu: MuLike,
    t0: float,
    x0: PointLike,
    delta: float = PETROV_DELTA,
    L: Optional[float] = None,
    h: float = ORACLE_STEP,
    max_steps: int = DESCENT_MAX_STEPS
) -> DescentReport:
    """
    Inductive descent towards S: over each step of length
    min(delta / (L + 1), mu(d_S) / (2K)) hold the extreme velocity that
    minimises v.xi for xi in the superdifferential of d_S

    K = L_G (L + 1) / 2 + L^2 / r.
    """
    L = moving_set.lipschitz + field.bound if L is None else float(L)
    inverse_r = 0.0 if math.isinf(moving_set.prox_radius) else 1.0 / moving_set.prox_radius
    K = field.lipschitz * (L + 1.0) / 2.0 + L * L * inverse_r
    point = as_point(x0, moving_set.dim)
    t = moving_set.check_time(t0)
    controls = field.controls()
    d = target.distance(point)
    times, distances = [t], [d]
    reached = d <= TARGET_TOL

    for _ in range(max_steps):
        if reached:
            break
        length = delta / (L + 1.0)
        if K > 0.0:
            length = min(length, _mu_value(mu, d) / (2.0 * K))
        length = min(length, moving_set.time_domain[1] - t)
        if length <= 0.0:
            break
        xi = target_superdifferential(target, point)[0]
        velocities = controls + field.drift(t, point)
        u = controls[int(np.argmin(velocities @ xi))]
        record = simulate(moving_set, field, constant_policy(field, u), t, point, target, min(h, length), length)
        if record.hit_time is not None:
            times.append(record.hit_time)
            distances.append(0.0)
            reached = True
            break
        t, point = float(record.times[-1]), record.states[-1]
        d = target.distance(point)
        times.append(t)
        distances.append(d)
        if record.status == "DOMAIN_END":
            break

    try:
        bound = reach_time_upper_bound(mu, distances[0])
    except DivergentIntegral:
        bound = None
    logger.info(f"Petrov descent from t0={t0}: reached={reached}, elapsed={times[-1] - times[0]:.4f}, bound={bound}")
    return DescentReport(
        t0=times[0],
        x0=as_point(x0).tolist(),
        times=times,
        distances=distances,
        elapsed=times[-1] - times[0],
        reached=reached,
        upper_bound=bound,
        K=K
    )
