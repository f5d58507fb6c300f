"""Weighted norms, the perturbed energy form, and the bootstrap monitor.

All reductions go through the deterministic pairwise tree in detsum, so a
rerun with the same configuration reproduces every recorded number bit for
bit.  Sup norms exclude the outermost ghost-adjacent layers where one-sided
stencils pollute nested derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .detsum import l2_norm, sup_norm, tree_sum
from .grid import FieldHistory, Grid3
from .operators import apply_partial, diff1, gamma_walk, second_derivatives
from .solver3d import MetricPerturbation, metric_perturbation, smallness_threshold
from .systems import WaveSystem


def weighted_sobolev_norm(f: np.ndarray, grid: Grid3, m: int) -> float:
    """Sum over derivative sequences up to length m of || (<x> grad)^alpha f ||_2.

    f may carry leading component axes; the L2 norm runs over components
    and space together.  Nested applications multiply by <x> then
    differentiate, in sequence order.
    """
    if m < 0:
        raise ValueError("norm order must be nonnegative")
    w = np.sqrt(1.0 + grid.radius**2)
    total = 0.0

    def rec(g, depth):
        nonlocal total
        total += l2_norm(g, grid.h**3)
        if depth == m:
            return
        for ax in (-3, -2, -1):
            rec(w * diff1(g, grid.h, axis=ax), depth + 1)

    rec(np.asarray(f, dtype=float), 0)
    return total


def energy_form(sys: WaveSystem, first: dict[int, np.ndarray],
                gamma: MetricPerturbation | None = None):
    """Pointwise perturbed energy density, its integral E, and the coercivity margin.

    e = sum_I [(d_0 u^I)^2 + c_I^2 |grad u^I|^2]
        + sum_{I,J} [2 sum_{k=0..3} g^{IJ,0k} d_0 u^I d_k u^J
                     - sum_{j,k=0..3} g^{IJ,jk} d_j u^I d_k u^J]

    With gamma=None the flat form is returned (bitwise the same accumulation
    path as a zero perturbation).  The margin is the minimum over points of
    e - (1/2) min(1, c^2) |du|^2, nonnegative whenever the smallness bound
    holds.  Returns (e0, margin).
    """
    D = first[0].shape[0]
    speeds = np.array([float(c) for c in sys.speeds])
    e0 = np.zeros(first[0].shape[1:])
    grad_sq = np.zeros_like(e0)
    for I in range(D):
        e0 += first[0][I] ** 2
        grad_sq += first[0][I] ** 2
        for j in (1, 2, 3):
            e0 += speeds[I] ** 2 * first[j][I] ** 2
            grad_sq += first[j][I] ** 2
    if gamma is not None:
        for (I, J, a, b), g in gamma.gamma.items():
            if a == 0:
                e0 += 2.0 * g * first[0][I - 1] * first[b][J - 1]
            e0 -= g * first[a][I - 1] * first[b][J - 1]
    margin = float((e0 - smallness_threshold(sys) * grad_sq).min())
    return e0, margin


def energy_integral(sys: WaveSystem, first, grid: Grid3,
                    gamma: MetricPerturbation | None = None):
    """(E, margin) with the proper volume element, E = sqrt(integral of e0)."""
    e0, margin = energy_form(sys, first, gamma)
    return math.sqrt(max(tree_sum(e0) * grid.h**3, 0.0)), margin


@dataclass
class DiagnosticsSpec:
    budget: int = 2          # Gamma order M
    sobolev_m: int = 2       # weighted Sobolev orders reported (H1..Hm)

    @property
    def history_levels(self) -> int:
        # d_a u plus M more fields, each possibly consuming two levels
        return 2 * (self.budget + 1) + 1


@dataclass
class DiagnosticsSeries:
    """Time series of energies, weighted norms, and bootstrap quantities."""

    budget: int
    sobolev_m: int
    times: list[float] = field(default_factory=list)
    e_flat: list[float] = field(default_factory=list)
    e_pert: list[float] = field(default_factory=list)
    h_norms: list[tuple[float, ...]] = field(default_factory=list)
    sup_gamma: list[float] = field(default_factory=list)
    q0: list[float] = field(default_factory=list)
    q1: list[float] = field(default_factory=list)
    acc_du: list[float] = field(default_factory=list)
    acc_u: list[float] = field(default_factory=list)
    f_norm: list[float] = field(default_factory=list)
    dgamma_sup: list[float] = field(default_factory=list)
    positivity_margin: list[float] = field(default_factory=list)

    def energy_residual_ratios(self) -> list[float]:
        return energy_inequality_residual(self.times, self.e_pert,
                                          self.f_norm, self.dgamma_sup)

    def csv_rows(self):
        header = ["t", "E_flat", "E_pert"]
        header += [f"H{m}" for m in range(1, self.sobolev_m + 1)]
        header += [f"supGamma_{self.budget}", "Q0", "Q1", "acc_du", "acc_u",
                   "Cemp_energy"]
        cemp = self.energy_residual_ratios()
        rows = [header]
        for i, t in enumerate(self.times):
            row = [t, self.e_flat[i], self.e_pert[i], *self.h_norms[i],
                   self.sup_gamma[i], self.q0[i], self.q1[i],
                   self.acc_du[i], self.acc_u[i], cemp[i]]
            rows.append([repr(float(v)) for v in row])
        return rows

    def write_csv(self, path) -> None:
        rows = self.csv_rows()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(rows[0]) + "\n")
            for row in rows[1:]:
                fh.write(",".join(row) + "\n")


def energy_inequality_residual(times, energies, f_norms, dgamma_sups,
                               floor: float = 1e-30) -> list[float]:
    """Empirical constants C(t) = max(dE/dt, 0) / (||F||_2 + E sum ||d gamma||_inf).

    dE/dt comes from centered differences of the recorded series (one-sided
    second order at the ends).  A positive dE/dt over a vanishing bracket is
    reported as inf: an inequality-violation candidate.
    """
    n = len(times)
    if n == 0:
        return []
    if n == 1:
        return [0.0]
    t = np.asarray(times)
    E = np.asarray(energies)
    dEdt = np.gradient(E, t, edge_order=2 if n > 2 else 1)
    out = []
    for i in range(n):
        bracket = f_norms[i] + E[i] * dgamma_sups[i]
        num = max(dEdt[i], 0.0)
        if bracket < floor:
            out.append(0.0 if num == 0.0 else math.inf)
        else:
            out.append(num / bracket)
    return out


class DiagnosticsCollector:
    """on_dump callback assembling the 3D DiagnosticsSeries from a solver."""

    def __init__(self, sys: WaveSystem, grid: Grid3, spec: DiagnosticsSpec):
        self.sys = sys
        self.grid = grid
        self.spec = spec
        self.series = DiagnosticsSeries(spec.budget, spec.sobolev_m)
        self.mask = grid.interior_mask()
        w2 = 1.0 + grid.radius**2
        self._w_m2 = 1.0 / w2         # <x>^-2
        self._w_m4 = 1.0 / w2**2      # <x>^-4
        self._last_du_integrand = None
        self._last_u_integrand = None

    def __call__(self, solver) -> None:
        spec = self.spec
        hists = solver.history(spec.history_levels)
        g = self.grid
        t = hists[0].t
        D = len(hists)

        first = {0: np.stack([apply_partial(h, 0).central() for h in hists])}
        for j in (1, 2, 3):
            first[j] = np.stack([diff1(h.central(), g.h, axis=j - 1) for h in hists])

        gamma = metric_perturbation(self.sys, first) if self.sys.C else None
        e_flat, _ = energy_integral(self.sys, first, g, None)
        e_pert, margin = energy_integral(self.sys, first, g, gamma)

        u_mid = np.stack([h.central() for h in hists])
        h_norms = tuple(weighted_sobolev_norm(u_mid, g, m)
                        for m in range(1, spec.sobolev_m + 1))

        # Gamma walk over u' components and over u itself
        sq_du: dict[tuple, np.ndarray] = {}
        sq_u: dict[tuple, np.ndarray] = {}

        def add(store, alpha, h):
            f = h.central()
            if alpha in store:
                store[alpha] += f * f
            else:
                store[alpha] = f * f

        for hist in hists:
            for a in range(4):
                ha = apply_partial(hist, a)
                gamma_walk(ha, spec.budget, lambda al, hh: add(sq_du, al, hh))
            gamma_walk(hist, spec.budget, lambda al, hh: add(sq_u, al, hh))

        sup_g = 0.0
        q1 = 0.0
        du_integrand = 0.0
        for alpha, sq in sq_du.items():
            mag = np.sqrt(sq)
            sup_g += sup_norm(mag, self.mask)
            q1 += l2_norm(mag, g.h**3)
            du_integrand += tree_sum(sq * self._w_m2) * g.h**3
        u_integrand = 0.0
        for alpha, sq in sq_u.items():
            u_integrand += tree_sum(sq * self._w_m4) * g.h**3

        s = self.series
        # trapezoidal space-time accumulation between dumps
        if s.times:
            dt_dump = t - s.times[-1]
            acc_du = s.acc_du[-1] + 0.5 * (du_integrand + self._last_du_integrand) * dt_dump
            acc_u = s.acc_u[-1] + 0.5 * (u_integrand + self._last_u_integrand) * dt_dump
        else:
            acc_du = 0.0
            acc_u = 0.0
        self._last_du_integrand = du_integrand
        self._last_u_integrand = u_integrand

        # semilinear F and the gamma-derivative sup bracket
        f_norm = 0.0
        if self.sys.B:
            F = np.zeros_like(first[0])
            for (I, J, K, a, b), v in self.sys.B.items():
                F[I - 1] += float(v) * first[a][J - 1] * first[b][K - 1]
            f_norm = l2_norm(F, g.h**3)
        dg_sup = 0.0
        if self.sys.C:
            secs = [second_derivatives(h) for h in hists]
            seen = {}
            for (I, J, K, a, b, c), v in self.sys.C.items():
                for l in range(4):
                    key = (I, K, a, b, l)
                    lc = (l, c) if l <= c else (c, l)
                    contrib = -float(v) * secs[J - 1][lc]
                    seen[key] = seen.get(key, 0) + contrib
            for key, fld in seen.items():
                dg_sup += sup_norm(fld, self.mask)

        s.times.append(t)
        s.e_flat.append(e_flat)
        s.e_pert.append(e_pert)
        s.h_norms.append(h_norms)
        s.sup_gamma.append(sup_g)
        s.q0.append((1.0 + t) * sup_g)
        s.q1.append(q1)
        s.acc_du.append(acc_du)
        s.acc_u.append(acc_u)
        s.f_norm.append(f_norm)
        s.dgamma_sup.append(dg_sup)
        s.positivity_margin.append(margin)


@dataclass
class MonitorReport:
    a0_emp: float
    a1_emp: float
    a2_emp: float
    finite: bool
    sup_misfit: float


def bootstrap_monitor(series: DiagnosticsSeries, eps: float, budget: int | None = None) -> MonitorReport:
    """Empirical bootstrap constants.

    A0_emp = sup_t Q0(t)/eps, and (A1, A2) minimize the sup-norm misfit of
    log(Q1(t)/Q1(t0)) ~ log A1 + (A2 eps) log(1+t); the fit is the exact
    Chebyshev line through the data (linear program).
    """
    if budget is not None and budget != series.budget:
        raise ValueError(f"series was collected at budget {series.budget}")
    if not series.times:
        return MonitorReport(0.0, 0.0, 0.0, True, 0.0)
    q0 = np.asarray(series.q0)
    q1 = np.asarray(series.q1)
    finite = bool(np.isfinite(q0).all() and np.isfinite(q1).all())
    a0 = float(q0.max() / eps) if eps > 0 else 0.0
    if q1[0] <= 0 or len(q1) < 2 or not finite:
        return MonitorReport(a0, 0.0, 0.0, finite, 0.0)
    y = np.log(q1 / q1[0])
    x = np.log1p(np.asarray(series.times))
    # minimize e subject to |y - a - b x| <= e
    n = len(x)
    A_ub = np.zeros((2 * n, 3))
    b_ub = np.zeros(2 * n)
    A_ub[:n, 0] = -1.0
    A_ub[:n, 1] = -x
    A_ub[:n, 2] = -1.0
    b_ub[:n] = -y
    A_ub[n:, 0] = 1.0
    A_ub[n:, 1] = x
    A_ub[n:, 2] = -1.0
    b_ub[n:] = y
    res = linprog(c=[0.0, 0.0, 1.0], A_ub=A_ub, b_ub=b_ub,
                  bounds=[(None, None), (None, None), (0, None)],
                  method="highs")
    if not res.success:
        return MonitorReport(a0, float("nan"), float("nan"), finite, float("nan"))
    a_fit, b_fit, misfit = res.x
    a2 = b_fit / eps if eps > 0 else 0.0
    return MonitorReport(a0, float(np.exp(a_fit)), float(a2), finite, float(misfit))
