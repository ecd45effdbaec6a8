"""
Finitely generated cones: projection and tangent/normal splitting
"""
from typing import Sequence

import numpy as np
from scipy.optimize import nnls


def as_generator_matrix(generators: Sequence[np.ndarray], dim: int) -> np.ndarray:
    """Stack generators as columns of a (dim, k) matrix"""
    if len(generators) == 0:
        return np.zeros((dim, 0))
    return np.column_stack([np.asarray(g, dtype=float).reshape(dim) for g in generators])


def project_onto_cone(q: np.ndarray, generators: Sequence[np.ndarray]) -> np.ndarray:
    """
    Euclidean projection of q onto cone{generators}

    Args:
        q: Vector to project
        generators: Cone generators (any positive scaling)

    Returns:
        The nearest point of the cone to q (zero vector for the trivial cone)
    """
    q = np.asarray(q, dtype=float).ravel()
    A = as_generator_matrix(generators, q.size)
    if A.shape[1] == 0:
        return np.zeros_like(q)
    if A.shape[1] == 1:
        g = A[:, 0]
        gg = float(g @ g)
        if gg == 0.0:
            return np.zeros_like(q)
        return max(float(g @ q), 0.0) / gg * g
    coeffs, _ = nnls(A, q)
    return A @ coeffs


def truncated_cone_min(q: np.ndarray, generators: Sequence[np.ndarray], radius: float) -> float:
    """
    min over v in -cone{generators}, |v| <= radius, of v . q

    Equals -radius * |P(q)| with P the projection onto the cone.
    """
    if radius == 0.0 or len(generators) == 0:
        return 0.0
    return -radius * float(np.linalg.norm(project_onto_cone(q, generators)))


def tangent_component(g: np.ndarray, normal_generators: Sequence[np.ndarray]) -> np.ndarray:
    """Projection of g onto the polar of the normal cone (g minus its normal part)"""
    g = np.asarray(g, dtype=float).ravel()
    return g - project_onto_cone(g, normal_generators)


def in_cone(v: np.ndarray, generators: Sequence[np.ndarray], tol: float) -> bool:
    """Whether v lies in cone{generators} up to an angle tolerance"""
    v = np.asarray(v, dtype=float).ravel()
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return True
    residual = np.linalg.norm(v - project_onto_cone(v, generators))
    return bool(residual <= tol * norm)
