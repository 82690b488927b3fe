"""Weighting node vectors with a context vector, and the inverse.

Default mode is elementwise (hadamard): weight multiplies, unweight divides
with a sign-preserving magnitude floor so tiny context components cannot blow
up.  cross3 is the 3-d cross-product variant; its unweighting projection
(v x w) / (v . v) is exact when the node vector is orthogonal to the context.
"""

from __future__ import annotations

import numpy as np

EPS = 1e-8
MODES = ("hadamard", "cross3")


def hadamard_weight(node_vec: np.ndarray, context_vec: np.ndarray) -> np.ndarray:
    return np.asarray(node_vec) * np.asarray(context_vec)


def hadamard_unweight(weighted: np.ndarray, context_vec: np.ndarray) -> np.ndarray:
    v = np.asarray(context_vec)
    sign = np.where(v < 0.0, -1.0, 1.0)          # sign(0) counts as +1
    denom = sign * np.maximum(np.abs(v), EPS)
    return np.asarray(weighted) / denom


def cross3_weight(node_vec: np.ndarray, context_vec: np.ndarray) -> np.ndarray:
    b = np.asarray(node_vec, dtype=np.float64)
    v = np.asarray(context_vec, dtype=np.float64)
    if b.shape != (3,) or v.shape != (3,):
        raise ValueError("cross3 weighting needs 3-d vectors")
    return np.cross(b, v)


def cross3_unweight(weighted: np.ndarray, context_vec: np.ndarray) -> np.ndarray:
    w = np.asarray(weighted, dtype=np.float64)
    v = np.asarray(context_vec, dtype=np.float64)
    if w.shape != (3,) or v.shape != (3,):
        raise ValueError("cross3 unweighting needs 3-d vectors")
    denom = float(v @ v)
    if denom < EPS:
        raise ValueError("context vector too small for cross3 unweighting")
    return np.cross(v, w) / denom


def weight(node_vec: np.ndarray, context_vec: np.ndarray, mode: str = "hadamard") -> np.ndarray:
    if mode == "hadamard":
        return hadamard_weight(node_vec, context_vec)
    if mode == "cross3":
        return cross3_weight(node_vec, context_vec)
    raise ValueError(f"unknown weighting mode {mode!r}")


def unweight(weighted: np.ndarray, context_vec: np.ndarray, mode: str = "hadamard") -> np.ndarray:
    if mode == "hadamard":
        return hadamard_unweight(weighted, context_vec)
    if mode == "cross3":
        return cross3_unweight(weighted, context_vec)
    raise ValueError(f"unknown weighting mode {mode!r}")
