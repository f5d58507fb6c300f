"""Analytic and solver-generated test fields for the inequality harness.

Analytic members are closures fn(t, x1, x2, x3) sampled onto FieldHistory
stacks; outgoing and incoming pulses are exact free waves of the form
(G(r + ct) - G(ct - r))/r, regular at the origin, so the d'Alembertian
bracket terms they feed are discretization-level small.  All parameters are
fixed numbers: the standard families contain no randomness, which keeps
estimate reports bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import FieldHistory, Grid3

GENERATORS = ("gaussian-bump", "outgoing-pulse", "incoming-pulse",
              "two-speed-pair", "polynomial-windowed", "simulated-run-snapshot")


@dataclass(frozen=True)
class AnalyticField:
    """A smooth space-time field with known support growth."""

    fn: object                  # fn(t, x1, x2, x3) -> ndarray
    name: str
    speed: float = 1.0          # natural propagation speed (for brackets)
    support0: float = 6.0       # spatial support radius at t = 0
    grows: bool = True          # support grows like speed * t

    def support(self, t: float) -> float:
        return self.support0 + (self.speed * abs(t) if self.grows else 0.0)

    def history(self, grid: Grid3, t: float, dt: float, nlevels: int = 7) -> FieldHistory:
        return FieldHistory.from_function(grid, self.fn, t, dt, nlevels)


def gaussian_bump(amp=1.0, width=1.5, center=(0.0, 0.0, 0.0), rate=0.6) -> AnalyticField:
    """Bump with a gentle exponential-in-time envelope (so h' != 0)."""
    cx, cy, cz = center

    def fn(t, x1, x2, x3):
        q = ((x1 - cx) ** 2 + (x2 - cy) ** 2 + (x3 - cz) ** 2) / width**2
        return amp * np.exp(-q) * np.exp(-rate * t)

    sup = float(np.linalg.norm(center)) + 8.5 * width
    return AnalyticField(fn, f"gaussian-bump(w={width})", speed=0.0,
                         support0=sup, grows=False)


def _pulse(c, amp, width, s0, sign):
    def fn(t, x1, x2, x3):
        r = np.sqrt(x1 * x1 + x2 * x2 + x3 * x3)
        rs = np.where(r < 1e-12, 1e-12, r)
        ct = sign * c * t
        G = lambda s: amp * np.exp(-((s - s0) / width) ** 2)
        return (G(rs + ct) - G(ct - rs)) / rs
    return fn


def outgoing_pulse(c=1.0, amp=1.0, width=1.5, s0=0.0) -> AnalyticField:
    """Exact free wave at speed c whose main shell moves outward (r ~ ct - s0)."""
    return AnalyticField(_pulse(c, amp, width, s0, +1),
                         f"outgoing-pulse(c={c},w={width})", speed=c,
                         support0=abs(s0) + 8.5 * width)


def incoming_pulse(c=1.0, amp=1.0, width=1.5, t_focus=6.0) -> AnalyticField:
    """Time reflection of an outgoing pulse; the shell sits at r ~ c(t_focus - t)."""
    out = _pulse(c, amp, width, 0.0, +1)

    def fn(t, x1, x2, x3):
        return out(t_focus - t, x1, x2, x3)

    return AnalyticField(fn, f"incoming-pulse(c={c})", speed=c,
                         support0=c * t_focus + 8.5 * width)


def polynomial_windowed(amp=1.0, width=2.0, powers=(1, 0, 1), rate=0.4) -> AnalyticField:
    p1, p2, p3 = powers

    def fn(t, x1, x2, x3):
        q = (x1 * x1 + x2 * x2 + x3 * x3) / width**2
        poly = (x1 / width) ** p1 * (x2 / width) ** p2 * (x3 / width) ** p3
        return amp * poly * np.exp(-q) * np.cos(rate * t)

    return AnalyticField(fn, f"polynomial-windowed{powers}", speed=0.0,
                         support0=(8.5 + 0.5 * sum(powers)) * width, grows=False)


def shell_snapshot(amp=1.0, radius=4.0, width=0.8) -> AnalyticField:
    """Static thin shell |x| ~ radius (exercises the polar Sobolev branch)."""

    def fn(t, x1, x2, x3):
        r = np.sqrt(x1 * x1 + x2 * x2 + x3 * x3)
        return amp * np.exp(-((r - radius) / width) ** 2) + 0.0 * t

    return AnalyticField(fn, f"shell(R={radius})", speed=0.0,
                         support0=radius + 8.5 * width, grows=False)


def two_speed_pair(c1=1.0, c2=2.0, amp=1.0, width=2.0) -> tuple[AnalyticField, AnalyticField]:
    return outgoing_pulse(c1, amp, width), outgoing_pulse(c2, amp, width)


def simulated_run_snapshot(system, components, grid: Grid3, t_snap: float,
                           nlevels: int = 7, cfl: float = 0.35):
    """Run the 3D solver and return per-family FieldHistories around t_snap."""
    from .initialdata import sample_initial
    from .solver3d import Solver3D, SolverConfig

    cfg = SolverConfig(t_end=t_snap, cfl=cfl, history_levels=max(5, nlevels))
    solver = Solver3D(system, grid, cfg)
    u0, ut0 = sample_initial(components, grid, system.D)
    solver.set_initial(u0, ut0)
    # integrate past t_snap by half a history so the stack centers near it
    extra = (nlevels // 2) * solver.dt
    cfg2 = type(cfg)(**{**cfg.__dict__, "t_end": t_snap + extra})
    solver.config = cfg2
    res = solver.run()
    if res.status not in ("completed", "smallness-violated"):
        raise RuntimeError(f"snapshot run ended early: {res.status}")
    return solver.history(nlevels)
