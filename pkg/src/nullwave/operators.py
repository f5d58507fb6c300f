"""Discrete differential operators: translations, rotations, scaling, and the
null-frame decomposition adapted to a propagation speed.

Spatial derivatives are second-order centered with one-sided second-order
stencils in the boundary layers; time derivatives consume one history level
from each end of a FieldHistory.  The eight commuting fields are indexed

    0: d_t    1..3: d_xj    4: R12  5: R13  6: R23 (rotations x_i d_j - x_j d_i)
    7: S = t d_t + r d_r

Multi-indexed compositions read right-to-left: apply_gamma_multi(h, (a, b))
applies field b first, then field a.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import FieldHistory, Grid3

GAMMA_NAMES = ("dt", "d1", "d2", "d3", "R12", "R13", "R23", "S")
ROTATION_PAIRS = {4: (1, 2), 5: (1, 3), 6: (2, 3)}
TIME_CONSUMING = {0, 7}


class InsufficientHistoryError(ValueError):
    """Raised when a time derivative is requested with fewer than 3 levels."""


def diff1(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second-order first derivative (centered; one-sided at the two edges)."""
    return np.gradient(values, h, axis=axis, edge_order=2)


def diff2(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Compact second-order second derivative along one axis."""
    out = np.empty_like(values, dtype=float)
    v = np.moveaxis(values, axis, 0)
    o = np.moveaxis(out, axis, 0)
    o[1:-1] = (v[:-2] - 2.0 * v[1:-1] + v[2:]) / h**2
    o[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h**2
    o[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h**2
    return out


def laplacian(values: np.ndarray, h: float, axes=(-3, -2, -1)) -> np.ndarray:
    return sum(diff2(values, h, axis=ax) for ax in axes)


def _require_levels(hist: FieldHistory, what: str) -> None:
    if hist.nlevels < 3:
        raise InsufficientHistoryError(
            f"{what} needs 3 consecutive time levels, have {hist.nlevels}; "
            f"supply 2*|alpha|+1 levels for an order-|alpha| composition")


def apply_partial(hist: FieldHistory, axis: int) -> FieldHistory:
    """d_a for a in 0..3; a=0 consumes one time level from each end."""
    if axis == 0:
        _require_levels(hist, "d_t")
        dt = hist.dt
        vals = (hist.values[2:] - hist.values[:-2]) / (2.0 * dt)
        return FieldHistory(hist.times[1:-1], vals, hist.grid)
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 0..3, got {axis}")
    vals = diff1(hist.values, hist.grid.h, axis=axis)
    return FieldHistory(hist.times, vals, hist.grid)


def apply_partial_t2(hist: FieldHistory) -> FieldHistory:
    """Compact d_t^2 on the interior time levels."""
    _require_levels(hist, "d_t^2")
    dt = hist.dt
    vals = (hist.values[2:] - 2.0 * hist.values[1:-1] + hist.values[:-2]) / dt**2
    return FieldHistory(hist.times[1:-1], vals, hist.grid)


def apply_rotation(hist: FieldHistory, i: int, j: int) -> FieldHistory:
    """R_ij = x_i d_j - x_j d_i for 1 <= i < j <= 3."""
    if not (1 <= i < j <= 3):
        raise ValueError(f"rotation needs 1 <= i < j <= 3, got ({i}, {j})")
    xs = hist.grid.coords
    di = diff1(hist.values, hist.grid.h, axis=i)
    dj = diff1(hist.values, hist.grid.h, axis=j)
    vals = xs[i - 1] * dj - xs[j - 1] * di
    return FieldHistory(hist.times, vals, hist.grid)


def apply_scaling(hist: FieldHistory) -> FieldHistory:
    """S = t d_t + x . grad (the radial part written as x.grad)."""
    _require_levels(hist, "S")
    dt = hist.dt
    dtv = (hist.values[2:] - hist.values[:-2]) / (2.0 * dt)
    inner = hist.values[1:-1]
    xs = hist.grid.coords
    xgrad = sum(xs[j] * diff1(inner, hist.grid.h, axis=j + 1) for j in range(3))
    times = hist.times[1:-1]
    vals = times[:, None, None, None] * dtv + xgrad
    return FieldHistory(times, vals, hist.grid)


def apply_gamma(hist: FieldHistory, idx: int) -> FieldHistory:
    if idx == 0:
        return apply_partial(hist, 0)
    if idx in (1, 2, 3):
        return apply_partial(hist, idx)
    if idx in ROTATION_PAIRS:
        return apply_rotation(hist, *ROTATION_PAIRS[idx])
    if idx == 7:
        return apply_scaling(hist)
    raise ValueError(f"gamma index must be 0..7, got {idx}")


def apply_gamma_multi(hist: FieldHistory, alpha, max_order: int | None = None) -> FieldHistory:
    """Nested composition, rightmost index applied first."""
    alpha = tuple(alpha)
    if max_order is not None and len(alpha) > max_order:
        raise ValueError(f"|alpha|={len(alpha)} exceeds configured max order {max_order}")
    needed = 2 * sum(1 for a in alpha if a in TIME_CONSUMING) + 1
    if hist.nlevels < needed:
        raise InsufficientHistoryError(
            f"composition {alpha} needs {needed} time levels, have {hist.nlevels}")
    for idx in reversed(alpha):
        hist = apply_gamma(hist, idx)
    return hist


def gamma_walk(hist: FieldHistory, max_order: int, visit, ops=range(8)) -> None:
    """Depth-first walk over all compositions with |alpha| <= max_order.

    ``visit(alpha, h)`` is called once per composition with alpha in
    application order (first-applied field first); each node is computed
    exactly once from its parent, and memory stays at one history per depth.
    """
    visit((), hist)

    def rec(alpha, h):
        if len(alpha) == max_order:
            return
        for op in ops:
            child = apply_gamma(h, op)
            visit(alpha + (op,), child)
            rec(alpha + (op,), child)

    rec((), hist)


def dalembertian(hist: FieldHistory, speed: float = 1.0) -> FieldHistory:
    """Discrete box = d_t d_t - c^2 sum_j d_j d_j, composed from the module's
    own centered first differences.

    Composing the same stencils used by the eight fields keeps the
    commutator relations ([box, d] = [box, rot] = 0 and [box, S] = 2 box)
    accurate to O(h^2); a compact second difference would satisfy the
    rotation relation exactly and the scaling one at a different constant.
    Consumes two time levels from each end.
    """
    if hist.nlevels < 5:
        raise InsufficientHistoryError(
            f"box needs 5 consecutive time levels, have {hist.nlevels}")
    dtt = apply_partial(apply_partial(hist, 0), 0)
    out = dtt.values.copy()
    for j in (1, 2, 3):
        out -= speed**2 * apply_partial(apply_partial(hist, j), j).values[2:-2]
    return FieldHistory(dtt.times, out, hist.grid)


def spacetime_gradient(hist: FieldHistory) -> list[np.ndarray]:
    """[d_t u, d_1 u, d_2 u, d_3 u] at the central time."""
    g = hist.grid
    mid = hist.central()
    out = [apply_partial(hist, 0).central()]
    out.extend(diff1(mid, g.h, axis=j) for j in range(3))
    return out


def second_derivatives(hist: FieldHistory) -> dict[tuple[int, int], np.ndarray]:
    """All d_a d_b u at the central time as a symmetric (a <= b) dictionary."""
    g = hist.grid
    out: dict[tuple[int, int], np.ndarray] = {}
    out[(0, 0)] = apply_partial_t2(hist).central()
    dtu_mid = apply_partial(hist, 0).central()
    for j in (1, 2, 3):
        out[(0, j)] = diff1(dtu_mid, g.h, axis=j - 1)
    mid = hist.central()
    for j in (1, 2, 3):
        out[(j, j)] = diff2(mid, g.h, axis=j - 1)
        for k in range(j + 1, 4):
            out[(j, k)] = diff1(diff1(mid, g.h, axis=j - 1), g.h, axis=k - 1)
    return out


@dataclass
class NullFrameParts:
    """Output of the speed-adapted decomposition d = Y^- D^- + R at one time."""

    principal: np.ndarray   # (4, n, n, n): Y^-_a * D^- u
    remainder: np.ndarray   # (4, n, n, n)
    d_minus: np.ndarray     # scalar field D^- u
    gradient: np.ndarray    # (4, n, n, n): the directly differenced d_a u
    mask: np.ndarray        # bool, r >= r_min where the frame is defined
    r_min: float


def null_frame_decompose(hist: FieldHistory, speed: float,
                         r_min: float | None = None) -> NullFrameParts:
    """Split d u into the good derivative along Y^- and the decaying remainder.

    Uses the exact identity
        d = Y^- D^- - ((ct-r)/(ct+r)) Y^+ D^- + (c/(ct+r)) Y^+ S - (0, (x/r^2) ^ Rot)
    with Y^+- = (1, +-x/(cr)) and D^- = (d_t - c d_r)/2.  The rotation term
    carries no 1/c factor; that is what makes the four parts sum back to the
    plain gradient (checked to O(h^2) in the tests).
    """
    g = hist.grid
    c = float(speed)
    if r_min is None:
        r_min = 2.0 * g.h
    _require_levels(hist, "null frame")
    t = hist.t
    x1, x2, x3 = g.coords
    r = g.radius
    mask = r >= r_min
    rs = np.where(r > 0, r, 1.0)  # safe divisor; masked region is excluded anyway

    du = spacetime_gradient(hist)
    dr_u = (x1 * du[1] + x2 * du[2] + x3 * du[3]) / rs
    d_minus = 0.5 * (du[0] - c * dr_u)
    s_u = t * du[0] + (x1 * du[1] + x2 * du[2] + x3 * du[3])

    # rotation vector Rot_i = eps_ijk x_j d_k u, then (x ^ Rot)_i / r^2
    rot1 = x2 * du[3] - x3 * du[2]
    rot2 = x3 * du[1] - x1 * du[3]
    rot3 = x1 * du[2] - x2 * du[1]
    xw1 = (x2 * rot3 - x3 * rot2) / rs**2
    xw2 = (x3 * rot1 - x1 * rot3) / rs**2
    xw3 = (x1 * rot2 - x2 * rot1) / rs**2

    ones = np.ones_like(rs)
    y_minus = np.stack([ones, -x1 / (c * rs), -x2 / (c * rs), -x3 / (c * rs)])
    y_plus = y_minus.copy()
    y_plus[1:] *= -1.0

    principal = y_minus * d_minus[None]
    ct = c * t
    ratio = (ct - r) / (ct + rs)
    coeff = c / (ct + rs)
    remainder = (-ratio[None] * y_plus * d_minus[None]
                 + coeff[None] * y_plus * s_u[None]
                 - np.stack([np.zeros_like(rs), xw1, xw2, xw3]))
    gradient = np.stack(du)
    return NullFrameParts(principal, remainder, d_minus, gradient, mask, r_min)
