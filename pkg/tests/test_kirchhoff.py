"""Tests for the spherical-means quadrature oracle."""

import numpy as np
import pytest

from nullwave.kirchhoff import (
    QuadratureError,
    kirchhoff_eval,
    kirchhoff_solve,
    lebedev26,
    sphere_product_rule,
)


class TestSphereRules:
    def test_lebedev26_weights_normalized(self):
        pts, wts = lebedev26()
        assert len(pts) == 26
        assert wts.sum() == pytest.approx(1.0, abs=1e-14)
        assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-14)

    @pytest.mark.parametrize("moment,exact", [
        (lambda p: p[:, 0] ** 2, 1.0 / 3.0),
        (lambda p: p[:, 0] ** 4, 1.0 / 5.0),
        (lambda p: p[:, 0] ** 2 * p[:, 1] ** 2, 1.0 / 15.0),
        (lambda p: p[:, 0] ** 2 * p[:, 1] ** 2 * p[:, 2] ** 2, 1.0 / 105.0),
        (lambda p: p[:, 0] ** 6, 1.0 / 7.0),
        (lambda p: p[:, 2] ** 3, 0.0),
    ])
    def test_lebedev26_degree_seven_moments(self, moment, exact):
        pts, wts = lebedev26()
        assert moment(pts) @ wts == pytest.approx(exact, abs=1e-14)

    def test_product_rule_matches_lebedev_on_smooth(self):
        f = lambda p: np.exp(p[:, 0] - 0.5 * p[:, 1] + 0.25 * p[:, 2] ** 2)
        pts, wts = sphere_product_rule(20)
        ref = f(pts) @ wts
        pts2, wts2 = sphere_product_rule(28)
        assert f(pts2) @ wts2 == pytest.approx(ref, rel=1e-12)


class TestKirchhoff:
    def test_zero_source(self):
        w = kirchhoff_solve(lambda s, x, y, z: 0.0 * x, 1.0, 2.0, np.zeros(3))
        assert w == 0.0

    def test_linear_time_source_cubic_solution(self):
        # box w = 6 s with zero data -> w = s^3 (spatially constant reduction)
        for c in (1.0, 2.0):
            for t in (0.5, 1.7):
                w = kirchhoff_solve(lambda s, x, y, z: 6.0 * s + 0.0 * x,
                                    c, t, np.array([0.3, -1.0, 0.2]))
                assert w == pytest.approx(t**3, rel=1e-10)

    def test_linearity(self):
        F1 = lambda s, x, y, z: np.exp(-(x**2 + y**2 + z**2)) * s
        F2 = lambda s, x, y, z: np.cos(x) * np.exp(-(x**2 + 2 * y**2 + z**2))
        x0 = np.array([0.5, 0.0, -0.25])
        t = 1.2
        wa = kirchhoff_solve(F1, 1.0, t, x0)
        wb = kirchhoff_solve(F2, 1.0, t, x0)
        wc = kirchhoff_solve(lambda s, x, y, z: 2.0 * F1(s, x, y, z) - 3.0 * F2(s, x, y, z),
                             1.0, t, x0)
        assert wc == pytest.approx(2 * wa - 3 * wb, rel=1e-7, abs=1e-12)

    def test_batch_points(self):
        F = lambda s, x, y, z: 6.0 * s + 0.0 * x
        xs = np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]])
        w = kirchhoff_solve(F, 1.0, 1.5, xs)
        assert np.allclose(w, 1.5**3, rtol=1e-10)

    def test_manufactured_separable_solution(self):
        # w = sin(x) * t^2 solves box w = 2 sin(x) + c^2 sin(x) t^2
        c = 1.3
        F = lambda s, x, y, z: (2.0 + c * c * s * s) * np.sin(x)
        for pt in ([0.2, 0.0, 0.0], [-0.7, 1.0, 0.4]):
            t = 0.9
            w = kirchhoff_solve(F, c, t, np.array(pt))
            assert w == pytest.approx(np.sin(pt[0]) * t**2, rel=1e-7)

    def test_nonconvergence_flagged(self):
        # oscillation far beyond what any ladder level resolves
        F = lambda s, x, y, z: np.cos(85.0 * (x + 0.7 * y - 0.3 * z)) * (1 + s)
        res = kirchhoff_eval(F, 1.0, 2.0, np.zeros(3), rtol=1e-12)
        assert not res.converged
        with pytest.raises(QuadratureError):
            kirchhoff_solve(F, 1.0, 2.0, np.zeros(3), rtol=1e-12)

    def test_requires_positive_time(self):
        with pytest.raises(ValueError):
            kirchhoff_solve(lambda s, x, y, z: 0 * x, 1.0, 0.0, np.zeros(3))
