"""Uniform cubic grids and the field containers shared by operators and solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid3:
    """Uniform grid on [-L, L]^3 with n points per axis, spacing h = 2L/(n-1)."""

    L: float
    n: int
    ghost: int = 2

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"need n >= 8 points per axis, got {self.n}")
        if self.ghost < 2:
            raise ValueError("stencil halo must be at least 2")
        if self.L <= 0:
            raise ValueError("domain half-width must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.n - 1)

    @cached_property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable coordinate arrays (x1, x2, x3)."""
        ax = self.axis
        return ax[:, None, None], ax[None, :, None], ax[None, None, :]

    @cached_property
    def radius(self) -> np.ndarray:
        x1, x2, x3 = self.coords
        return np.sqrt(x1 * x1 + x2 * x2 + x3 * x3)

    def zeros(self, D: int | None = None) -> np.ndarray:
        shape = (self.n,) * 3 if D is None else (D, self.n, self.n, self.n)
        return np.zeros(shape)

    def integrate(self, f: np.ndarray) -> float:
        """Discrete volume integral with element h^3 (deterministic reduction)."""
        from .detsum import tree_sum
        return tree_sum(f) * self.h**3

    def interior_mask(self, layers: int | None = None) -> np.ndarray:
        """True away from the outermost `layers` points (default: ghost width)."""
        layers = self.ghost if layers is None else layers
        m = np.zeros((self.n,) * 3, dtype=bool)
        m[layers:-layers, layers:-layers, layers:-layers] = True
        return m


@dataclass
class GridState:
    """One time level of a D-family system: u and its time derivative."""

    t: float
    u: np.ndarray    # (D, n, n, n)
    ut: np.ndarray   # (D, n, n, n)
    grid: Grid3

    def __post_init__(self):
        if self.u.shape != self.ut.shape:
            raise ValueError("u and ut shapes differ")
        if self.u.ndim != 4 or self.u.shape[1:] != (self.grid.n,) * 3:
            raise ValueError(f"field shape {self.u.shape} does not match grid n={self.grid.n}")

    @property
    def D(self) -> int:
        return self.u.shape[0]


@dataclass
class FieldHistory:
    """A scalar field sampled at equally spaced times t_0 < ... < t_{k-1}.

    Space-time operators consume a time level from each end; spatial
    operators keep all levels.  The central level (index k//2, k odd) is
    where diagnostics are read off.
    """

    times: np.ndarray    # (k,)
    values: np.ndarray   # (k, n, n, n)
    grid: Grid3

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or len(self.times) != self.values.shape[0]:
            raise ValueError("times/values length mismatch")
        if len(self.times) >= 2:
            steps = np.diff(self.times)
            if not np.allclose(steps, steps[0], rtol=1e-10, atol=1e-14):
                raise ValueError("history requires equally spaced times")

    @property
    def nlevels(self) -> int:
        return len(self.times)

    @property
    def dt(self) -> float:
        if self.nlevels < 2:
            raise ValueError("need at least two levels for a time step")
        return float(self.times[1] - self.times[0])

    @property
    def center(self) -> int:
        return self.nlevels // 2

    @property
    def t(self) -> float:
        """Central time."""
        return float(self.times[self.center])

    def central(self) -> np.ndarray:
        """Field values at the central time."""
        return self.values[self.center]

    @classmethod
    def from_function(cls, grid: Grid3, fn, t: float, dt: float, nlevels: int) -> "FieldHistory":
        """Sample fn(t, x1, x2, x3) on `nlevels` levels centered at t."""
        if nlevels % 2 == 0:
            raise ValueError("need an odd number of levels to center the history")
        half = nlevels // 2
        times = t + dt * np.arange(-half, half + 1)
        x1, x2, x3 = grid.coords
        vals = np.stack([np.broadcast_to(fn(tl, x1, x2, x3), (grid.n,) * 3).astype(float)
                         for tl in times])
        return cls(times, vals, grid)


@dataclass
class RadialState:
    """Radial profile state: v = r*u and its time derivative on r_i = i*rmax/(m-1)."""

    t: float
    rmax: float
    v: np.ndarray    # (m,)
    vt: np.ndarray   # (m,)

    def __post_init__(self):
        if self.v.shape != self.vt.shape or self.v.ndim != 1:
            raise ValueError("v and vt must be equal-length 1-d arrays")

    @property
    def m(self) -> int:
        return len(self.v)

    @property
    def h(self) -> float:
        return self.rmax / (self.m - 1)

    @cached_property
    def r(self) -> np.ndarray:
        return np.linspace(0.0, self.rmax, self.m)
