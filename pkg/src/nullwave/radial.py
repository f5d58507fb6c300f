"""Spherically symmetric reduction: v = r u turns the 3D scalar wave operator
into d_t^2 v - c^2 d_r^2 v on [0, rmax] with v(0) = 0.

Only scalar semilinear systems qualify (no quasilinear tensor), and the
semilinear form must be rotation invariant: a (d_t u)^2 coefficient plus an
isotropic gradient-squared coefficient.  Classical null-form Q0 and the
blowup model (d_t u)^2 both reduce this way; the source is mapped through
u = v/r, d_t u = v_t/r, d_r u = (d_r v - v/r)/r and multiplied by r.

The same leapfrog / lagged-Picard scheme as the 3D solver is used, with a
pinned axis value and either a domain-of-dependence boundary (v(rmax) = 0)
or a first-order outgoing condition for long runs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .detsum import sup_norm, tree_sum
from .diagnostics import DiagnosticsSeries, DiagnosticsSpec
from .solver3d import (
    ABORTED_NAN,
    BLOWUP,
    COMPLETED,
    BlowupRecord,
    RunResult,
    SolverConfig,
)
from .systems import WaveSystem


@dataclass(frozen=True)
class RadialSemilinear:
    """Isotropic reduction of a scalar semilinear tensor: N = b_tt u_t^2 + b_rr u_r^2."""

    b_tt: float
    b_rr: float

    @classmethod
    def from_system(cls, sys: WaveSystem) -> "RadialSemilinear":
        if sys.D != 1:
            raise ValueError("radial mode is for scalar (D=1) systems")
        if sys.C:
            raise ValueError("radial mode supports semilinear systems only (C must vanish)")
        b_tt = 0.0
        diag = {}
        for (I, J, K, a, b), v in sys.B.items():
            v = float(v)
            if a == 0 and b == 0:
                b_tt += v
            elif a == 0 or b == 0:
                raise ValueError("time-space semilinear coupling is not rotation invariant")
            elif a == b:
                diag[a] = diag.get(a, 0.0) + v
            else:
                # antisymmetric pairs annihilate on self-interaction
                if float(sys.B.get((I, J, K, b, a), 0)) != -v:
                    raise ValueError("anisotropic spatial semilinear coupling")
        vals = {diag.get(j, 0.0) for j in (1, 2, 3)}
        if len(vals) > 1:
            raise ValueError("spatial diagonal must be isotropic for the radial mode")
        return cls(b_tt, vals.pop() if vals else 0.0)


def radial_integral(f: np.ndarray, r: np.ndarray) -> float:
    """Trapezoidal integral of 4 pi r^2 f over the radial grid (deterministic)."""
    g = 4.0 * np.pi * r * r * f
    h = r[1] - r[0]
    return tree_sum(0.5 * (g[:-1] + g[1:])) * h


def radial_l2(f: np.ndarray, r: np.ndarray) -> float:
    return float(np.sqrt(max(radial_integral(f * f, r), 0.0)))


class RadialSolver:
    """1D leapfrog on v = r u with axis pin and optional outgoing boundary."""

    def __init__(self, system: WaveSystem, rmax: float, m: int, config: SolverConfig,
                 forcing=None, outgoing: bool = False):
        self.system = system
        self.form = RadialSemilinear.from_system(system)
        self.c = float(system.speeds[0])
        self.rmax = float(rmax)
        self.m = int(m)
        self.config = config
        self.forcing = forcing
        self.outgoing = outgoing
        self.r = np.linspace(0.0, self.rmax, self.m)
        self.h = self.r[1] - self.r[0]
        self.dt = config.cfl * self.h / self.c
        self.levels: deque[np.ndarray] = deque(maxlen=max(4, config.history_levels + 2))
        self.times: deque[float] = deque(maxlen=self.levels.maxlen)
        self.vt: np.ndarray | None = None
        self.steps_taken = 0
        self._blowup: BlowupRecord | None = None

    # -- setup ----------------------------------------------------------------

    def set_initial(self, u0: np.ndarray, ut0: np.ndarray) -> None:
        v0 = self.r * np.asarray(u0, dtype=float)
        vt0 = self.r * np.asarray(ut0, dtype=float)
        a0 = self._accel(v0, vt0, 0.0)
        dt = self.dt
        ghost = v0 - dt * vt0 + 0.5 * dt * dt * a0
        ghost[0] = 0.0
        self.levels.clear()
        self.times.clear()
        self.levels.append(ghost)
        self.times.append(-dt)
        self.levels.append(v0)
        self.times.append(0.0)
        self.vt = vt0.copy()
        self._vt0 = vt0
        self.steps_taken = 0

    # -- pieces ---------------------------------------------------------------

    def _d_rr(self, v):
        out = np.zeros_like(v)
        out[1:-1] = (v[:-2] - 2.0 * v[1:-1] + v[2:]) / self.h**2
        return out

    def _dr(self, v):
        return np.gradient(v, self.h, edge_order=2)

    def _source(self, v, vt_est, t):
        """r * (N + forcing) with N mapped through the radial reduction."""
        r = self.r
        rs = np.where(r > 0, r, 1.0)
        u = v / rs
        ut = vt_est / rs
        ur = (self._dr(v) - u) / rs
        N = self.form.b_tt * ut * ut + self.form.b_rr * ur * ur
        if self.forcing is not None:
            N = N + self.forcing(t, r)
        src = r * N
        src[0] = 0.0
        return src

    def _accel(self, v, vt, t):
        return self.c**2 * self._d_rr(v) + self._source(v, vt, t)

    @property
    def t(self) -> float:
        return self.times[-1]

    def u_profiles(self):
        """(u, ut, ur) at the current level, with L'Hopital values on the axis."""
        v = self.levels[-1]
        vt = self.vt
        r = self.r
        rs = np.where(r > 0, r, 1.0)
        u = v / rs
        u[0] = (4.0 * v[1] - v[2]) / (2.0 * self.h)  # lim v/r = dv/dr(0), v(0)=0
        ur = (self._dr(v) - u) / rs
        ur[0] = 0.0
        ut = vt / rs
        ut[0] = (4.0 * vt[1] - vt[2]) / (2.0 * self.h)
        return u, ut, ur

    # -- stepping ---------------------------------------------------------------

    def step(self) -> str | None:
        cfg = self.config
        dt = self.dt
        cur = self.levels[-1]
        prev = self.levels[-2]
        t = self.t

        if self.steps_taken == 0:
            vt_est = self._vt0
        else:
            vt_est = (3 * cur - 4 * prev + self.levels[-3]) / (2 * dt)
        lin = self.c**2 * self._d_rr(cur)
        v_new = None
        for it in range(cfg.picard_iters + 1):
            if it > 0:
                vt_est = (v_new - prev) / (2 * dt)
            v_new = 2 * cur - prev + dt * dt * (lin + self._source(cur, vt_est, t))
            v_new[0] = 0.0
            if self.outgoing:
                v_new[-1] = cur[-1] - self.c * dt / self.h * (cur[-1] - cur[-2])
            else:
                v_new[-1] = 0.0

        if not np.isfinite(v_new).all():
            return ABORTED_NAN
        self.vt = (v_new - prev) / (2 * dt)
        self.levels.append(v_new)
        self.times.append(t + dt)
        self.steps_taken += 1

        u, ut, ur = self.u_profiles()
        sup_du = max(sup_norm(ut), sup_norm(ur))
        if sup_du > cfg.blowup_threshold or not np.isfinite(sup_du):
            mags = np.abs(ut) + np.abs(ur)
            idx = int(np.nanargmax(mags))
            self._blowup = BlowupRecord(self.t, (float(self.r[idx]), 0.0, 0.0),
                                        float(sup_du))
            return BLOWUP
        return None

    def run(self, on_dump=None) -> RunResult:
        cfg = self.config
        nsteps = int(round(cfg.t_end / self.dt))
        for _ in range(nsteps):
            status = self.step()
            if status == BLOWUP:
                return RunResult(BLOWUP, self.t, self.steps_taken, blowup=self._blowup)
            if status == ABORTED_NAN:
                return RunResult(ABORTED_NAN, self.t, self.steps_taken)
            if on_dump is not None and self.steps_taken % cfg.dump_every == 0 \
                    and len(self.levels) >= cfg.history_levels:
                on_dump(self)
        return RunResult(COMPLETED, self.t, self.steps_taken)


# -- reduced vector-field calculus on radial profiles --------------------------

RADIAL_OPS = ("dt", "dr", "S")


@dataclass
class RadialHistory:
    times: np.ndarray    # (k,)
    values: np.ndarray   # (k, m)
    r: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def center(self) -> int:
        return len(self.times) // 2

    def central(self) -> np.ndarray:
        return self.values[self.center]

    @property
    def t(self) -> float:
        return float(self.times[self.center])


def rapply(hist: RadialHistory, op: str) -> RadialHistory:
    h = hist.r[1] - hist.r[0]
    if op == "dr":
        vals = np.gradient(hist.values, h, axis=1, edge_order=2)
        return RadialHistory(hist.times, vals, hist.r)
    if op == "dt":
        dtv = (hist.values[2:] - hist.values[:-2]) / (2 * hist.dt)
        return RadialHistory(hist.times[1:-1], dtv, hist.r)
    if op == "S":
        dtv = (hist.values[2:] - hist.values[:-2]) / (2 * hist.dt)
        inner = hist.values[1:-1]
        drv = np.gradient(inner, h, axis=1, edge_order=2)
        times = hist.times[1:-1]
        vals = times[:, None] * dtv + hist.r[None, :] * drv
        return RadialHistory(times, vals, hist.r)
    raise ValueError(f"unknown radial op {op!r}")


def rgamma_walk(hist: RadialHistory, max_order: int, visit) -> None:
    """All compositions of {dt, dr, S} up to max_order (rotations vanish on
    radial profiles and are omitted)."""
    visit((), hist)

    def rec(alpha, h):
        if len(alpha) == max_order:
            return
        for op in RADIAL_OPS:
            child = rapply(h, op)
            visit(alpha + (op,), child)
            rec(alpha + (op,), child)

    rec((), hist)


class RadialDiagnosticsCollector:
    """Radial analogue of the 3D collector, over the reduced operator set."""

    def __init__(self, sys: WaveSystem, spec: DiagnosticsSpec):
        self.sys = sys
        self.form = RadialSemilinear.from_system(sys)
        self.spec = spec
        self.series = DiagnosticsSeries(spec.budget, spec.sobolev_m)
        self.sup_du: list[float] = []
        self._last_du = None
        self._last_u = None

    def _u_history(self, solver: RadialSolver, nlevels: int) -> RadialHistory:
        times = np.array(list(solver.times)[-nlevels:])
        vals = np.stack(list(solver.levels)[-nlevels:])
        r = solver.r
        rs = np.where(r > 0, r, 1.0)
        u = vals / rs[None, :]
        u[:, 0] = (4.0 * vals[:, 1] - vals[:, 2]) / (2.0 * solver.h)
        return RadialHistory(times, u, r)

    def __call__(self, solver: RadialSolver) -> None:
        spec = self.spec
        need = spec.history_levels
        hist = self._u_history(solver, need)
        r = solver.r
        c = solver.c
        t = hist.t

        ut_h = rapply(hist, "dt")
        ur_h = rapply(hist, "dr")
        ut = ut_h.central()
        ur = ur_h.central()
        e_density = ut * ut + c * c * ur * ur
        E = float(np.sqrt(max(radial_integral(e_density, r), 0.0)))
        margin = float((e_density - 0.5 * min(1.0, c * c) * (ut * ut + ur * ur)).min())

        u_mid = hist.central()
        h_norms = []
        w = np.sqrt(1.0 + r * r)
        gfield = u_mid
        total = radial_l2(gfield, r)
        for m in range(1, spec.sobolev_m + 1):
            gfield = w * np.gradient(gfield, solver.h, edge_order=2)
            total += radial_l2(gfield, r)
            h_norms.append(total)

        sq_du: dict[tuple, np.ndarray] = {}
        sq_u: dict[tuple, np.ndarray] = {}

        def add(store, alpha, hh):
            f = hh.central()
            if alpha in store:
                store[alpha] += f * f
            else:
                store[alpha] = f * f

        for comp in (ut_h, ur_h):
            rgamma_walk(comp, spec.budget, lambda al, hh: add(sq_du, al, hh))
        rgamma_walk(hist, spec.budget, lambda al, hh: add(sq_u, al, hh))

        w2 = 1.0 + r * r
        sup_g = 0.0
        q1 = 0.0
        du_int = 0.0
        for sq in sq_du.values():
            mag = np.sqrt(sq)
            sup_g += sup_norm(mag)
            q1 += radial_l2(mag, r)
            du_int += radial_integral(sq / w2, r)
        u_int = 0.0
        for sq in sq_u.values():
            u_int += radial_integral(sq / w2**2, r)

        N = self.form.b_tt * ut * ut + self.form.b_rr * ur * ur
        if solver.forcing is not None:
            N = N + solver.forcing(t, r)
        f_norm = radial_l2(N, r)

        s = self.series
        if s.times:
            dtd = t - s.times[-1]
            acc_du = s.acc_du[-1] + 0.5 * (du_int + self._last_du) * dtd
            acc_u = s.acc_u[-1] + 0.5 * (u_int + self._last_u) * dtd
        else:
            acc_du = 0.0
            acc_u = 0.0
        self._last_du = du_int
        self._last_u = u_int

        s.times.append(t)
        s.e_flat.append(E)
        s.e_pert.append(E)  # no quasilinear perturbation in radial mode
        s.h_norms.append(tuple(h_norms))
        s.sup_gamma.append(sup_g)
        s.q0.append((1.0 + t) * sup_g)
        s.q1.append(q1)
        s.acc_du.append(acc_du)
        s.acc_u.append(acc_u)
        s.f_norm.append(f_norm)
        s.dgamma_sup.append(0.0)
        s.positivity_margin.append(margin)
        self.sup_du.append(float(max(sup_norm(ut), sup_norm(ur))))
