"""Leapfrog time integration of the quasilinear multi-speed system in full 3D.

The update is

    u^{n+1} = 2 u^n - u^{n-1} + dt^2 (c_I^2 Lap_h u^I + N^I + forcing)

with the second time derivative inside N resolved by lagged Picard
iteration: pass 0 uses (u^n - 2u^{n-1} + u^{n-2})/dt^2 (backward estimates
for the first derivatives), passes 1..picard_iters re-evaluate with the
freshly computed u^{n+1}.  The time step is dt = cfl * h / max_I c_I, fixed
for the whole run.  Compact 3-point second differences drive the update;
the wider Gamma-calculus stencils live in operators.py.

Blowup is declared when sup |du| exceeds the configured threshold; NaN or
Inf anywhere aborts the run.  When the quasilinear metric perturbation gets
too large for the perturbed energy to stay coercive (more than the allowed
fraction of points), the run carries a warning status.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .detsum import sup_norm
from .grid import FieldHistory, Grid3, GridState
from .operators import diff1, diff2
from .systems import WaveSystem

COMPLETED = "completed"
BLOWUP = "blowup"
SMALLNESS_VIOLATED = "smallness-violated"
ABORTED_NAN = "aborted-nan"


@dataclass
class SolverConfig:
    cfl: float = 0.4
    picard_iters: int = 2
    t_end: float = 10.0
    blowup_threshold: float = 1e6
    dump_every: int = 10
    smallness_fraction: float = 1e-3  # tolerated fraction of non-coercive points
    history_levels: int = 5           # time levels retained for diagnostics

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise ValueError(f"cfl must be in (0,1), got {self.cfl}")
        if self.picard_iters < 1:
            raise ValueError("need at least one Picard pass")
        if self.history_levels < 3 or self.history_levels % 2 == 0:
            raise ValueError("history_levels must be an odd number >= 3")


@dataclass
class BlowupRecord:
    t: float
    location: tuple[float, float, float]
    sup: float


@dataclass
class RunResult:
    status: str
    t_final: float
    steps: int
    blowup: BlowupRecord | None = None
    smallness_warned: bool = False


@dataclass
class MetricPerturbation:
    """gamma^{IK,ab} = -sum_{J,c} C^{IJK}_{abc} d_c u^J, with the coercivity data."""

    gamma: dict[tuple[int, int, int, int], np.ndarray]  # (I, K, a, b), 1-based I, K
    abs_sum: np.ndarray     # pointwise sum of |gamma| over all indices
    threshold: float        # (1/2) min(1, min_I c_I^2)

    @property
    def small_everywhere(self) -> bool:
        return bool((self.abs_sum <= self.threshold).all())

    def violation_fraction(self) -> float:
        return float(np.mean(self.abs_sum > self.threshold))


def _float_entries(sys: WaveSystem):
    c_entries = [(I, J, K, a, b, c, float(v))
                 for (I, J, K, a, b, c), v in sorted(sys.C.items())]
    b_entries = [(I, J, K, a, b, float(v))
                 for (I, J, K, a, b), v in sorted(sys.B.items())]
    return c_entries, b_entries


def smallness_threshold(sys: WaveSystem) -> float:
    cmin = min(float(c) for c in sys.speeds)
    return 0.5 * min(1.0, cmin * cmin)


def metric_perturbation(sys: WaveSystem, first: dict[int, np.ndarray]) -> MetricPerturbation:
    """Assemble gamma from the quasilinear tensor and first derivatives.

    ``first[a]`` holds d_a u as a (D, n, n, n) array.
    """
    shape = first[0].shape[1:]
    gamma: dict[tuple[int, int, int, int], np.ndarray] = {}
    for (I, J, K, a, b, c), v in sys.C.items():
        key = (I, K, a, b)
        g = gamma.get(key)
        contrib = -float(v) * first[c][J - 1]
        gamma[key] = contrib if g is None else g + contrib
    abs_sum = np.zeros(shape)
    for g in gamma.values():
        abs_sum += np.abs(g)
    return MetricPerturbation(gamma, abs_sum, smallness_threshold(sys))


def nonlinear_rhs(sys: WaveSystem, first: dict[int, np.ndarray],
                  second: dict[tuple[int, int], np.ndarray]) -> np.ndarray:
    """N^I = C^{IJK}_{abc} d_c u^J d_a d_b u^K + B^{IJK}_{ab} d_a u^J d_b u^K.

    ``first[a]`` and ``second[(a, b)]`` (a <= b) are (D, ...) arrays.
    """
    out = np.zeros_like(first[0])
    for (I, J, K, a, b, c), v in sys.C.items():
        ab = (a, b) if a <= b else (b, a)
        out[I - 1] += float(v) * first[c][J - 1] * second[ab][K - 1]
    for (I, J, K, a, b), v in sys.B.items():
        out[I - 1] += float(v) * first[a][J - 1] * first[b][K - 1]
    return out


def nonlinear_rhs_from_states(sys: WaveSystem, states: list[GridState]) -> np.ndarray:
    """Evaluate N at the middle of three consecutive equally spaced states."""
    if len(states) != 3:
        raise ValueError("need exactly three consecutive states")
    sm, s0, sp = states
    g = s0.grid
    dt = sp.t - s0.t
    first = {0: (sp.u - sm.u) / (2 * dt)}
    for j in (1, 2, 3):
        first[j] = diff1(s0.u, g.h, axis=j)
    second = {(0, 0): (sp.u - 2 * s0.u + sm.u) / dt**2}
    for j in (1, 2, 3):
        second[(0, j)] = diff1(first[0], g.h, axis=j)
        second[(j, j)] = diff2(s0.u, g.h, axis=j)
        for k in range(j + 1, 4):
            second[(j, k)] = diff1(diff1(s0.u, g.h, axis=j), g.h, axis=k)
    return nonlinear_rhs(sys, first, second)


class Solver3D:
    """Fixed-step leapfrog integrator over a Grid3 domain.

    forcing, if given, is called as forcing(t, x1, x2, x3) and must
    broadcast to (D, n, n, n); it is added to the right-hand side (an
    external source used by the linear estimate harness).
    """

    def __init__(self, system: WaveSystem, grid: Grid3, config: SolverConfig,
                 forcing=None):
        self.system = system
        self.grid = grid
        self.config = config
        self.forcing = forcing
        self.D = system.D
        self.speeds = np.array([float(c) for c in system.speeds])
        self.dt = config.cfl * grid.h / self.speeds.max()
        self._c_sq = (self.speeds**2)[:, None, None, None]
        self._needs_quasi = bool(system.C)
        self._needs_nl = bool(system.C) or bool(system.B)
        self.levels: deque[np.ndarray] = deque(maxlen=max(4, config.history_levels + 2))
        self.times: deque[float] = deque(maxlen=self.levels.maxlen)
        self.ut: np.ndarray | None = None
        self.steps_taken = 0
        self.smallness_warned = False
        self._ut0 = None
        self._a0 = None
        self._blowup: BlowupRecord | None = None

    # -- setup ---------------------------------------------------------------

    def set_initial(self, u0: np.ndarray, ut0: np.ndarray) -> None:
        shape = (self.D,) + (self.grid.n,) * 3
        u0 = np.asarray(u0, dtype=float).reshape(shape)
        ut0 = np.asarray(ut0, dtype=float).reshape(shape)
        a0 = self._initial_accel(u0, ut0)
        dt = self.dt
        ghost = u0 - dt * ut0 + 0.5 * dt * dt * a0  # Taylor level at t = -dt
        self.levels.clear()
        self.times.clear()
        self.levels.append(ghost)
        self.times.append(-dt)
        self.levels.append(u0)
        self.times.append(0.0)
        self.ut = ut0.copy()
        self._ut0 = ut0
        self._a0 = a0
        self.steps_taken = 0
        self.smallness_warned = False

    def _initial_accel(self, u0, ut0):
        """a0 = c^2 Lap u0 + N0 (+forcing), with N0's d_t^2 term Picard-iterated."""
        g = self.grid
        lin = self._c_sq * self._laplacian(u0)
        if self.forcing is not None:
            lin = lin + self._eval_forcing(0.0)
        if not self._needs_nl:
            return lin
        first = {0: ut0}
        for j in (1, 2, 3):
            first[j] = diff1(u0, g.h, axis=j)
        second = {}
        for j in (1, 2, 3):
            second[(0, j)] = diff1(ut0, g.h, axis=j)
            second[(j, j)] = diff2(u0, g.h, axis=j)
            for k in range(j + 1, 4):
                second[(j, k)] = diff1(diff1(u0, g.h, axis=j), g.h, axis=k)
        accel = lin
        for _ in range(self.config.picard_iters + 1):
            second[(0, 0)] = accel
            accel = lin + nonlinear_rhs(self.system, first, second)
        return accel

    # -- helpers -------------------------------------------------------------

    def _laplacian(self, u):
        h = self.grid.h
        return diff2(u, h, axis=1) + diff2(u, h, axis=2) + diff2(u, h, axis=3)

    def _eval_forcing(self, t):
        x1, x2, x3 = self.grid.coords
        f = np.asarray(self.forcing(t, x1, x2, x3), dtype=float)
        return np.broadcast_to(f, (self.D,) + (self.grid.n,) * 3)

    @property
    def t(self) -> float:
        return self.times[-1]

    def state(self) -> GridState:
        """Most recent level with a centered time derivative available.

        After a step the newest level has no centered d_t u yet, so the
        state lags the front by one level (at t=0 it is the initial data).
        """
        if len(self.levels) >= 2 and self.steps_taken > 0:
            return GridState(self.times[-2], self.levels[-2].copy(),
                             self.ut.copy(), self.grid)
        return GridState(self.t, self.levels[-1].copy(), self.ut.copy(), self.grid)

    def history(self, nlevels: int | None = None) -> list[FieldHistory]:
        """Per-family FieldHistory over the most recent `nlevels` levels."""
        nlevels = nlevels or min(len(self.levels), self.config.history_levels)
        if len(self.levels) < nlevels:
            raise ValueError(f"only {len(self.levels)} levels available, need {nlevels}")
        times = np.array(list(self.times)[-nlevels:])
        stacked = np.stack(list(self.levels)[-nlevels:])  # (k, D, n, n, n)
        return [FieldHistory(times, stacked[:, i], self.grid) for i in range(self.D)]

    # -- stepping ------------------------------------------------------------

    def step(self) -> str | None:
        """Advance one leapfrog step; returns a terminal status or None."""
        if not self.levels:
            raise RuntimeError("call set_initial before stepping")
        cfg = self.config
        dt = self.dt
        g = self.grid
        cur = self.levels[-1]
        prev = self.levels[-2]

        lin = self._c_sq * self._laplacian(cur)
        if self.forcing is not None:
            lin = lin + self._eval_forcing(self.t)

        if self._needs_nl:
            first = {j: diff1(cur, g.h, axis=j) for j in (1, 2, 3)}
            second_sp = {}
            for j in (1, 2, 3):
                second_sp[(j, j)] = diff2(cur, g.h, axis=j)
                for k in range(j + 1, 4):
                    second_sp[(j, k)] = diff1(diff1(cur, g.h, axis=j), g.h, axis=k)
            if self.steps_taken == 0:
                # the analytic data at t=0 is exact; no lagging needed
                first[0] = self._ut0
                d00 = self._a0
            else:
                first[0] = (3 * cur - 4 * prev + self.levels[-3]) / (2 * dt)
                d00 = (cur - 2 * prev + self.levels[-3]) / dt**2
            u_new = None
            for it in range(cfg.picard_iters + 1):
                if it > 0:
                    first[0] = (u_new - prev) / (2 * dt)
                    d00 = (u_new - 2 * cur + prev) / dt**2
                second = dict(second_sp)
                second[(0, 0)] = d00
                for j in (1, 2, 3):
                    second[(0, j)] = diff1(first[0], g.h, axis=j)
                rhs = nonlinear_rhs(self.system, first, second)
                u_new = 2 * cur - prev + dt * dt * (lin + rhs)
        else:
            u_new = 2 * cur - prev + dt * dt * lin

        if not np.isfinite(u_new).all():
            return ABORTED_NAN

        self.ut = (u_new - prev) / (2 * dt)
        self.levels.append(u_new)
        self.times.append(self.t + dt)
        self.steps_taken += 1

        # post-step guards on the committed level
        first_now = {0: self.ut}
        for j in (1, 2, 3):
            first_now[j] = diff1(u_new, self.grid.h, axis=j)
        sup_du = max(sup_norm(first_now[a]) for a in range(4))
        if sup_du > cfg.blowup_threshold or not np.isfinite(sup_du):
            self._blowup = self._locate_blowup(first_now)
            return BLOWUP
        if self._needs_quasi:
            pert = metric_perturbation(self.system, first_now)
            if pert.violation_fraction() > cfg.smallness_fraction:
                self.smallness_warned = True
        return None

    def _locate_blowup(self, first_now) -> BlowupRecord:
        mags = sum(np.abs(first_now[a]) for a in range(4))
        flat = np.nanargmax(mags)
        _, i, j, k = np.unravel_index(flat, mags.shape)
        ax = self.grid.axis
        sup = float(np.nanmax([np.abs(first_now[a]).max() for a in range(4)]))
        return BlowupRecord(self.t, (float(ax[i]), float(ax[j]), float(ax[k])), sup)

    def run(self, on_dump=None) -> RunResult:
        """Integrate to t_end or a terminal event; on_dump(solver) fires every
        dump_every steps once enough history has accumulated."""
        cfg = self.config
        nsteps = int(round(cfg.t_end / self.dt))
        for n in range(nsteps):
            status = self.step()
            if status == BLOWUP:
                return RunResult(BLOWUP, self.t, self.steps_taken,
                                 blowup=self._blowup,
                                 smallness_warned=self.smallness_warned)
            if status == ABORTED_NAN:
                return RunResult(ABORTED_NAN, self.t, self.steps_taken,
                                 smallness_warned=self.smallness_warned)
            if on_dump is not None and self.steps_taken % cfg.dump_every == 0 \
                    and len(self.levels) >= cfg.history_levels:
                on_dump(self)
        status = SMALLNESS_VIOLATED if self.smallness_warned else COMPLETED
        return RunResult(status, self.t, self.steps_taken,
                         smallness_warned=self.smallness_warned)
