"""Quadrature oracle for the forced wave equation with zero Cauchy data.

For (d_t^2 - c^2 Lap) w = F, w(0) = w_t(0) = 0, the spherical-means form of
Duhamel's principle gives

    w(t, x) = int_0^t (t - s) * avg_{|omega|=1} F(s, x + c (t - s) omega) ds.

The sphere average uses a 26-point octahedral rule (exact through degree 7)
at the coarsest level and Gauss-Legendre x trapezoid product rules above it;
the time integral uses Gauss-Legendre nodes.  Levels are refined until two
successive results agree to the requested relative tolerance.  This path is
completely independent of the finite-difference solver and serves as its
oracle in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class QuadratureError(RuntimeError):
    """Raised when successive quadrature refinements fail to agree."""


def lebedev26() -> tuple[np.ndarray, np.ndarray]:
    """26-point octahedral sphere rule; weights sum to 1 (average form)."""
    pts = []
    wts = []
    for i in range(3):
        for s in (1.0, -1.0):
            p = np.zeros(3)
            p[i] = s
            pts.append(p)
            wts.append(1.0 / 21.0)
    inv2 = 1.0 / np.sqrt(2.0)
    for i in range(3):
        j, k = [a for a in range(3) if a != i]
        for si in (1.0, -1.0):
            for sj in (1.0, -1.0):
                p = np.zeros(3)
                p[j] = si * inv2
                p[k] = sj * inv2
                pts.append(p)
                wts.append(4.0 / 105.0)
    inv3 = 1.0 / np.sqrt(3.0)
    for sx in (1.0, -1.0):
        for sy in (1.0, -1.0):
            for sz in (1.0, -1.0):
                pts.append(np.array([sx * inv3, sy * inv3, sz * inv3]))
                wts.append(9.0 / 280.0)
    return np.array(pts), np.array(wts)


def sphere_product_rule(n_theta: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre in cos(theta) x uniform trapezoid in phi; weights sum to 1."""
    mu, wmu = np.polynomial.legendre.leggauss(n_theta)
    n_phi = 2 * n_theta
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    sin_t = np.sqrt(np.clip(1.0 - mu**2, 0.0, None))
    pts = np.empty((n_theta * n_phi, 3))
    wts = np.empty(n_theta * n_phi)
    k = 0
    for i in range(n_theta):
        for j in range(n_phi):
            pts[k] = (sin_t[i] * np.cos(phi[j]), sin_t[i] * np.sin(phi[j]), mu[i])
            wts[k] = wmu[i] / (2.0 * n_phi)
            k += 1
    return pts, wts


# (sphere rule, number of time nodes) refinement ladder
_LEVELS: list[tuple[object, int]] = [
    ("lebedev26", 12),
    (6, 16),
    (10, 24),
    (16, 36),
    (24, 54),
    (34, 80),
]


def _sphere_rule(spec) -> tuple[np.ndarray, np.ndarray]:
    if spec == "lebedev26":
        return lebedev26()
    return sphere_product_rule(int(spec))


@dataclass
class KirchhoffResult:
    value: np.ndarray       # (M,) solution values
    error: float            # last inter-level difference (sup over points)
    level: int
    converged: bool


def kirchhoff_eval(F, speed: float, t: float, x, rtol: float = 1e-8,
                   atol: float = 1e-13) -> KirchhoffResult:
    """Evaluate w(t, x) for one or many points x ((3,) or (M, 3) array)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if t <= 0:
        raise ValueError("Duhamel evaluation needs t > 0")
    c = float(speed)
    prev = None
    err = np.inf
    for level, (sphere_spec, n_time) in enumerate(_LEVELS):
        sp, sw = _sphere_rule(sphere_spec)
        nodes, weights = np.polynomial.legendre.leggauss(n_time)
        s_vals = 0.5 * t * (nodes + 1.0)
        s_wts = 0.5 * t * weights
        total = np.zeros(len(x))
        for s, ws in zip(s_vals, s_wts):
            rad = c * (t - s)
            # evaluation points: (M, nsphere, 3)
            pts = x[:, None, :] + rad * sp[None, :, :]
            vals = F(s, pts[..., 0], pts[..., 1], pts[..., 2])
            vals = np.broadcast_to(np.asarray(vals, dtype=float), pts.shape[:2])
            total += ws * (t - s) * (vals @ sw)
        if prev is not None:
            err = float(np.max(np.abs(total - prev)))
            scale = max(float(np.max(np.abs(total))), atol / rtol)
            if err <= rtol * scale:
                return KirchhoffResult(total, err, level, True)
        prev = total
    return KirchhoffResult(prev, err, len(_LEVELS) - 1, False)


def kirchhoff_solve(F, speed: float, t: float, x, rtol: float = 1e-8):
    """Solution value(s) of box w = F with zero data; raises on non-convergence."""
    res = kirchhoff_eval(F, speed, t, x, rtol=rtol)
    if not res.converged:
        raise QuadratureError(
            f"sphere/time quadrature did not reach rtol={rtol}; "
            f"last inter-level difference {res.error:.3e}")
    x = np.asarray(x)
    return float(res.value[0]) if x.ndim == 1 else res.value
