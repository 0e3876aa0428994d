import numpy as np
import pytest

from dcone.curves import (Curve3, bending_energy, curvature, fd_open,
                          fornberg_weights)
from dcone.grid import PeriodicField, PeriodicGrid
from dcone.recovery import frame_integrate, frame_start

TWO_PI = 2 * np.pi


def unit_circle(n, z_height=0.0, radius=1.0):
    t = np.linspace(0.0, TWO_PI, n + 1)
    return Curve3(np.stack([radius * np.cos(t), radius * np.sin(t),
                            np.full_like(t, z_height)], axis=1))


def test_fornberg_reproduces_centered_stencils():
    w1 = fornberg_weights(np.arange(-2, 3), 1)
    assert np.allclose(w1, np.array([1, -8, 0, 8, -1]) / 12.0)
    w2 = fornberg_weights(np.arange(-2, 3), 2)
    assert np.allclose(w2, np.array([-1, 16, -30, 16, -1]) / 12.0)
    w4 = fornberg_weights(np.arange(-3, 4), 4)
    assert np.allclose(w4, np.array([-1, 12, -39, 56, -39, 12, -1]) / 6.0)


def test_fd_open_polynomial_exactness():
    n = 64
    x = np.linspace(0.0, TWO_PI, n + 1)
    vals = 0.3 * x**4 - x**2 + 2.0
    d1 = fd_open(vals, x[1] - x[0], 1)
    d2 = fd_open(vals, x[1] - x[0], 2)
    assert np.abs(d1 - (1.2 * x**3 - 2 * x)).max() <= 1e-9
    assert np.abs(d2 - (3.6 * x**2 - 2)).max() <= 1e-7


def test_fd_open_fourth_order():
    errs = []
    ns = [64, 128, 256]
    for n in ns:
        x = np.linspace(0.0, TWO_PI, n + 1)
        d = fd_open(np.sin(x), x[1] - x[0], 2)
        errs.append(np.abs(d + np.sin(x)).max())
    slope = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert slope == pytest.approx(4.0, abs=0.4)


def test_curvature_equator():
    kap = curvature(unit_circle(2048))
    assert kap.max_abs() <= 1e-8


def test_curvature_latitude_circle():
    # unit-speed circle at height c: gamma(t) = (r cos(t/r), r sin(t/r), c);
    # open curve (ends do not meet), exercising the one-sided stencils; the
    # geodesic curvature is -c/r
    r_, c = 0.8, 0.6
    n = 2048
    t = np.linspace(0.0, TWO_PI, n + 1)
    g = np.stack([r_ * np.cos(t / r_), r_ * np.sin(t / r_), np.full_like(t, c)], axis=1)
    kap = curvature(Curve3(g)).values
    assert np.abs(kap + c / r_).max() <= 1e-6 * (c / r_)


def test_curvature_of_lift_is_bounded(stage_result_01):
    kap = curvature(stage_result_01.stage4)
    assert kap.max_abs() <= 10.0


def test_bending_energy_equator():
    rep = bending_energy(unit_circle(2048))
    assert rep.energy <= 1e-10
    assert rep.sphere_defect <= 1e-12


def test_bending_energy_planar_circle_at_height():
    c = 0.6
    r_ = np.sqrt(1 - c * c)
    rep = bending_energy(unit_circle(2048, z_height=c, radius=r_))
    assert rep.energy == pytest.approx(TWO_PI * c * c, abs=1e-8)
    assert rep.speed_defect == pytest.approx(1 - r_, abs=1e-10)  # flagged


def test_frame_integrate_geodesic_recovers_equator():
    n = 2048
    eq = unit_circle(n)
    F0 = frame_start(eq)
    zero = PeriodicField(PeriodicGrid(n), np.zeros(n))
    fr = frame_integrate(zero, F0, n)
    assert np.abs(fr.curve.samples - eq.samples).max() <= 1e-10
    assert fr.ortho_defect <= 1e-9


def test_frame_integrate_self_consistency(fold4096):
    # extract curvature from the lifted curve, re-integrate the frame ODE,
    # and land back on the curve
    from dcone.recovery import build_stages, triple_from_w
    st = build_stages(triple_from_w(fold4096.candidate.w), 0.1)
    curve = st.stage4
    kap = curvature(curve)
    fr = frame_integrate(kap, frame_start(curve), curve.n)
    assert np.abs(fr.curve.samples - curve.samples).max() <= 1e-6
    assert fr.ortho_defect <= 1e-9
