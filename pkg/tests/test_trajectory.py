"""World lines and the induced light-cone scattering maps."""

import math

import numpy as np
import pytest

from cavrad.errors import RootBracketError
from cavrad.homography import HomographicMap
from cavrad.trajectory import MirrorTrajectory, homographic_position

from oracles import fd_derivative


def test_constant_mirror_maps():
    c = MirrorTrajectory.constant(0.4)
    assert c.v_of_u(1.0) == pytest.approx(1.8, abs=1e-12)
    assert c.u_of_v(1.8) == pytest.approx(1.0, abs=1e-12)


def test_sinusoid_close_to_homographic():
    beta = 1e-3
    h = HomographicMap(math.cosh(math.atanh(beta)), 1j * math.sinh(math.atanh(beta)), 1.0)
    traj = MirrorTrajectory.sinusoidal(0.0, beta, 1.0, math.pi / 2)
    u = np.linspace(0, 2 * math.pi, 801)
    assert np.abs(traj.v_of_u(u) - h.apply(u)).max() <= 10 * beta**3


def test_monotone_on_random_pairs():
    rng = np.random.default_rng(11)
    traj = MirrorTrajectory.sinusoidal(0.3, 0.7, 1.0, 0.9)
    u1 = rng.uniform(-5, 5, 1000)
    u2 = u1 + rng.uniform(1e-6, 3.0, 1000)
    assert np.all(traj.v_of_u(u2) > traj.v_of_u(u1))


def test_inverse_roundtrip():
    traj = MirrorTrajectory.sinusoidal(-0.2, 0.5, 2.0, 0.3)
    u = np.linspace(-3, 3, 101)
    assert np.abs(traj.u_of_v(traj.v_of_u(u)) - u).max() < 1e-10


def test_map_derivative_within_rapidity_bounds():
    beta = 0.6
    alpha = math.atanh(beta)
    traj = MirrorTrajectory.sinusoidal(0.0, beta, 1.0, math.pi / 2)
    for u in (0.0, 0.8, 2.9, 5.5):
        fd = fd_derivative(traj.v_of_u, u, 1e-5)
        assert math.exp(-2 * alpha) - 1e-6 <= fd <= math.exp(2 * alpha) + 1e-6


def test_homographic_position_closed_form():
    assert homographic_position(HomographicMap(np.exp(0.25j), 0j, 1.0), 1.1) \
        == pytest.approx(0.25, abs=1e-13)
    beta = 0.5
    a = 1.0 / math.sqrt(1 - beta**2)
    h = HomographicMap(a, 1j * beta * a, 1.0)
    assert homographic_position(h, math.pi / 2) == pytest.approx(0.0, abs=1e-13)
    beta = 0.3
    a = 1.0 / math.sqrt(1 - beta**2)
    h = HomographicMap(a, 1j * beta * a, 1.0)
    assert homographic_position(h, 0.0) == pytest.approx(0.2914567944778671, abs=1e-12)
    u = np.linspace(0, 2 * math.pi, 64)
    ref = np.arctan2(beta * np.cos(u), 1 + beta * np.sin(u))
    assert np.abs(homographic_position(h, u) - ref).max() < 1e-12


def test_lightcone_consistency():
    traj = MirrorTrajectory.sinusoidal(0.1, 0.4, 1.3, 0.6)
    u = np.linspace(-4, 4, 301)
    v = traj.v_of_u(u)
    t, x = 0.5 * (v + u), 0.5 * (v - u)
    assert np.abs(x - traj.position(t)).max() < 1e-10


@pytest.mark.parametrize("beta", [1e-2, 1e-3, 1e-4])
def test_small_beta_equivalence_constant(beta):
    alpha = math.atanh(beta)
    h = HomographicMap(math.cosh(alpha), 1j * math.sinh(alpha), 1.0)
    traj = MirrorTrajectory.sinusoidal(0.0, beta, 1.0, math.pi / 2)
    u = np.linspace(0, 2 * math.pi, 401)
    assert np.abs(traj.v_of_u(u) - h.apply(u)).max() / beta**3 <= 10.0


def test_custom_needs_declared_bound_and_derivatives():
    with pytest.raises(ValueError):
        MirrorTrajectory.custom(lambda t: 0 * t, velocity_bound=1.0)
    traj = MirrorTrajectory.custom(lambda t: 0.1 * np.sin(t), velocity_bound=0.1)
    v = traj.v_of_u(0.7)
    t_star = 0.5 * (v + 0.7)
    assert 0.5 * (v - 0.7) == pytest.approx(0.1 * math.sin(t_star), abs=1e-10)
    with pytest.raises(ValueError):
        traj.forward_eval(0.7)


def test_wrong_velocity_bound_is_caught():
    # actual peak velocity 0.8 but a declared bound of 0.05 breaks bracketing
    lying = MirrorTrajectory.custom(lambda t: 0.8 * np.sin(t), velocity_bound=0.05)
    with pytest.raises(RootBracketError):
        lying.v_of_u(np.linspace(0, 6, 50))


def test_uniform_velocity_radiates_nothing():
    v = 0.3
    traj = MirrorTrajectory.custom(
        lambda t: v * t, velocity_bound=v,
        velocity=lambda t: v + 0 * t,
        acceleration=lambda t: 0 * t, jerk=lambda t: 0 * t)
    val, der, sch = traj.forward_eval(1.7)
    assert der == pytest.approx((1 + v) / (1 - v), abs=1e-12)
    assert abs(sch) < 1e-12
