"""
Multilinear interpolation on uniform tensor grids with unreachable nodes

Nodes holding +inf are dropped from the stencil and the remaining weights
renormalised; a query whose whole stencil is infinite returns +inf.
"""
import itertools
from typing import Sequence, Tuple

import numpy as np


def _axis_stencil(axis: np.ndarray, q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = axis.size
    if n == 1:
        return np.zeros(q.shape, dtype=int), np.zeros(q.shape)
    step = (axis[-1] - axis[0]) / (n - 1)
    pos = (q - axis[0]) / step
    idx = np.clip(np.floor(pos).astype(int), 0, n - 2)
    frac = np.clip(pos - idx, 0.0, 1.0)
    return idx, frac


def build_stencil(axes: Sequence[np.ndarray], queries: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Flat node indices and weights of the 2^d-corner stencil of every query

    Args:
        axes: Uniform coordinate vectors, one per dimension
        queries: (m, d) query coordinates; clamped into the grid box

    Returns:
        (indices, weights), both of shape (m, 2^d)
    """
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    m, d = queries.shape
    shape = tuple(np.asarray(a).size for a in axes)
    stencils = [_axis_stencil(np.asarray(axes[k]), queries[:, k]) for k in range(d)]

    corners = list(itertools.product((0, 1), repeat=d))
    index = np.zeros((m, len(corners)), dtype=np.int64)
    weights = np.ones((m, len(corners)))
    for c, corner in enumerate(corners):
        multi = []
        for k, bit in enumerate(corner):
            idx, frac = stencils[k]
            weights[:, c] *= frac if bit else 1.0 - frac
            multi.append(np.minimum(idx + bit, shape[k] - 1))
        index[:, c] = np.ravel_multi_index(tuple(multi), shape)
    return index, weights


def apply_stencil(flat_values: np.ndarray, index: np.ndarray, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Evaluate a precomputed stencil against flattened node values

    Returns:
        (interpolated values, partial-stencil flags)
    """
    nodes = flat_values[index]
    finite = np.isfinite(nodes)
    active = weights > 0.0
    used = finite & active
    total = np.sum(np.where(used, weights * np.where(finite, nodes, 0.0), 0.0), axis=1)
    weight = np.sum(np.where(used, weights, 0.0), axis=1)

    out = np.full(index.shape[0], np.inf)
    ok = weight > 0.0
    out[ok] = total[ok] / weight[ok]
    partial = np.any(active & ~finite, axis=1) & ok
    return out, partial


def interpolate(
    axes: Sequence[np.ndarray],
    values: np.ndarray,
    queries: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Interpolate `values` (shape = tuple(len(a) for a in axes)) at `queries`

    Args:
        axes: Uniform coordinate vectors, one per dimension
        values: Node values, +inf marks unreachable nodes
        queries: (m, d) query coordinates; clamped into the grid box

    Returns:
        (interpolated values, partial-stencil flags)
    """
    index, weights = build_stencil(axes, queries)
    return apply_stencil(np.asarray(values, dtype=float).ravel(), index, weights)
