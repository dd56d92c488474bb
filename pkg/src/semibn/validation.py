"""Input validation helpers shared across modules."""

from __future__ import annotations

import numpy as np

__all__ = ["check_data_matrix", "check_node_index", "check_positive_scalar"]


def check_data_matrix(data, n_columns=None, allow_empty=False, name="data") -> np.ndarray:
    """Coerce to a finite 2-D float64 array of shape (n_samples, n_nodes)."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D (n_samples, n_nodes), got shape {arr.shape}")
    if not allow_empty and arr.shape[0] == 0:
        raise ValueError(f"{name} has no rows")
    if n_columns is not None and arr.shape[1] != n_columns:
        raise ValueError(f"{name} has {arr.shape[1]} columns, expected {n_columns}")
    if arr.size and not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_node_index(node, n, name="node") -> int:
    idx = int(node)
    if not 0 <= idx < n:
        raise ValueError(f"{name} index {idx} out of range for {n} nodes")
    return idx


def check_positive_scalar(value, name) -> float:
    val = float(value)
    if not (val > 0.0 and np.isfinite(val)):
        raise ValueError(f"{name} must be finite and > 0, got {value}")
    return val
