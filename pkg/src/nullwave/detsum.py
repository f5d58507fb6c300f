"""Deterministic floating-point reductions.

All grid reductions go through a fixed-shape pairwise tree: the array is
flattened in C order, summed in fixed 1024-element blocks, and the block
sums are combined pairwise.  The tree shape depends only on the array
shape, never on worker count, so results are bit-identical across runs and
thread pools.  Parallel sections elsewhere in the package distribute whole
tasks (family members, scenario runs) and fold results in index order;
they never split a reduction.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 1024


def tree_sum(a: np.ndarray) -> float:
    """Pairwise-tree sum of all elements; deterministic for a fixed shape."""
    flat = np.asarray(a, dtype=np.float64).reshape(-1)
    if flat.size == 0:
        return 0.0
    pad = (-flat.size) % _BLOCK
    if pad:
        flat = np.concatenate([flat, np.zeros(pad)])
    sums = flat.reshape(-1, _BLOCK).sum(axis=1)
    while sums.size > 1:
        if sums.size % 2:
            sums = np.concatenate([sums, [0.0]])
        sums = sums[0::2] + sums[1::2]
    return float(sums[0])


def l2_norm(f: np.ndarray, volume_element: float, weight: np.ndarray | None = None) -> float:
    """Discrete L2 norm sqrt(sum w * f^2 * dV) via the deterministic tree."""
    sq = np.square(np.asarray(f, dtype=np.float64))
    if weight is not None:
        sq = sq * weight
    return float(np.sqrt(tree_sum(sq) * volume_element))


def sup_norm(f: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Max of |f|, optionally restricted to a boolean mask (order independent)."""
    a = np.abs(np.asarray(f, dtype=np.float64))
    if mask is not None:
        if not mask.any():
            return 0.0
        a = a[mask]
    return float(a.max()) if a.size else 0.0
