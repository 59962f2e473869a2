import math

import numpy as np
import pytest

from conepid.cone import (
    BoundaryPoint,
    ConePoint,
    DualConePoint,
    barrier,
    barrier_batch,
    in_dual_exp_cone,
    in_exp_cone,
)


def sample_interior(rng, n):
    """Strictly interior points via r = q ln(p/q) - s with s > 0."""
    pts = np.empty((n, 3))
    pts[:, 1] = np.exp(rng.uniform(-1.0, 1.0, n))
    pts[:, 2] = pts[:, 1] * np.exp(-rng.uniform(0.0, 2.0, n))
    slack = np.exp(rng.uniform(-2.0, 0.5, n))
    pts[:, 0] = pts[:, 2] * np.log(pts[:, 1] / pts[:, 2]) - slack
    return pts


def sample_dual_interior(rng, n):
    """Strictly interior dual points: u < 0 and -u e^{w/u} < e v."""
    pts = np.empty((n, 3))
    pts[:, 0] = -np.exp(rng.uniform(-1.0, 1.0, n))
    pts[:, 2] = rng.uniform(-2.0, 2.0, n)
    floor = -pts[:, 0] * np.exp(pts[:, 2] / pts[:, 0]) / math.e
    pts[:, 1] = floor * np.exp(rng.uniform(0.05, 1.0, n))
    return pts


class TestMembership:
    def test_boundary_exponential(self):
        assert in_exp_cone(ConePoint(0.0, 1.0, 1.0), 0.0)

    def test_ray_branch(self):
        assert in_exp_cone(ConePoint(-1.0, 0.5, 0.0), 0.0)

    def test_outside(self):
        assert not in_exp_cone(ConePoint(1.0, 1.0, 1.0), 0.0)

    def test_dual_ray_branch(self):
        assert in_dual_exp_cone(DualConePoint(0.0, 1.0, 1.0), 0.0)

    def test_dual_inside(self):
        # -u e^{w/u} = 1 <= e * 0.40 ~ 1.0873
        assert in_dual_exp_cone(DualConePoint(-1.0, 0.40, 0.0), 0.0)

    def test_dual_outside(self):
        # 1 > e * 0.30 ~ 0.8155
        assert not in_dual_exp_cone(DualConePoint(-1.0, 0.30, 0.0), 0.0)

    def test_tolerance_is_additive(self):
        assert in_exp_cone(ConePoint(1e-9, 1.0, 1.0), 1e-8)
        assert not in_exp_cone(ConePoint(1e-7, 1.0, 1.0), 1e-8)

    def test_membership_duality(self):
        rng = np.random.default_rng(42)
        a = sample_interior(rng, 1000)
        b = sample_dual_interior(rng, 1000)
        dots = a @ b.T
        assert np.all(dots >= 0.0)


class TestBarrier:
    def test_value_at_reference_point(self):
        # q ln(p/q) - r = 1, p = q = 1 so all three logs vanish
        assert barrier(ConePoint(-1.0, 1.0, 1.0)).value == pytest.approx(0.0, abs=1e-15)

    def test_boundary_raises(self):
        with pytest.raises(BoundaryPoint):
            barrier(ConePoint(0.0, 1.0, 1.0))

    def test_nonpositive_q_raises(self):
        with pytest.raises(BoundaryPoint):
            barrier(ConePoint(-1.0, 1.0, 0.0))

    def test_gradient_reference_point(self):
        ev = barrier(ConePoint(-1.0, 1.0, 1.0))
        fd = _fd_gradient(np.array([-1.0, 1.0, 1.0]))
        assert np.allclose(ev.gradient, fd, rtol=1e-5, atol=1e-8)

    def test_log_homogeneity_degree_three(self):
        rng = np.random.default_rng(7)
        pts = sample_interior(rng, 25)
        base = barrier_batch(pts)[0]
        for scale in (0.5, 2.0, 10.0):
            scaled = barrier_batch(scale * pts)[0]
            assert scaled == pytest.approx(base - 3 * pts.shape[0] * math.log(scale), abs=1e-10)

    def test_derivatives_match_finite_differences(self):
        rng = np.random.default_rng(3)
        pts = sample_interior(rng, 100)
        for row in pts:
            ev = barrier(ConePoint(*row))
            fd_g = _fd_gradient(row)
            denom = np.maximum(np.abs(fd_g), 1e-8)
            assert np.max(np.abs(ev.gradient - fd_g) / denom) <= 1e-5
            fd_h = _fd_hessian(row)
            denom = np.maximum(np.abs(fd_h), 1e-4)
            assert np.max(np.abs(ev.hessian - fd_h) / denom) <= 1e-5

    def test_hessian_positive_definite(self):
        rng = np.random.default_rng(11)
        pts = sample_interior(rng, 100)
        _, _, hess = barrier_batch(pts)
        eigenvalues = np.linalg.eigvalsh(hess)
        assert np.all(eigenvalues > 0.0)


def _value(x):
    return barrier_batch(x[None, :])[0]


def _fd_gradient(x, h=1e-6):
    g = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        g[i] = (_value(x + e) - _value(x - e)) / (2 * h)
    return g


def _fd_hessian(x, h=1e-6):
    out = np.empty((3, 3))
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        gp = barrier_batch((x + e)[None, :])[1][0]
        gm = barrier_batch((x - e)[None, :])[1][0]
        out[i] = (gp - gm) / (2 * h)
    return 0.5 * (out + out.T)
