"""
Input validation utilities
"""
from typing import List, Optional, Sequence, Union

import numpy as np

PointLike = Union[float, int, Sequence[float], np.ndarray]


def as_point(x: PointLike, dim: Optional[int] = None) -> np.ndarray:
    """
    Coerce a scalar or sequence into a 1D float array

    Args:
        x: Point as scalar (1D spaces) or sequence
        dim: Expected dimension, checked when given

    Returns:
        Float array of shape (dim,)
    """
    arr = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if dim is not None and arr.size != dim:
        raise ValueError(f"Expected a point of dimension {dim}, got {arr.size}")
    return arr


def parse_vector(text: str) -> List[float]:
    """
    Parse '0,-1' or '0.5' into a list of floats

    Raises:
        ValueError: on an empty or non-numeric entry
    """
    parts = [p.strip() for p in text.split(",")]
    if not parts or any(p == "" for p in parts):
        raise ValueError(f"Invalid vector: {text!r}")
    return [float(p) for p in parts]
