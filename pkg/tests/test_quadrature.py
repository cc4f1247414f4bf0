"""Periodic quadrature, point splitting, arch integration."""

import math

import numpy as np
import pytest

from cavrad.homography import HomographicMap, identity_map
from cavrad.iteration import CavityConfig, closed_f
from cavrad.quadrature import (GridSpec, integrate_period, integrate_spectrum,
                               point_split_density)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(points_per_period=1000)  # not a power of two
    with pytest.raises(ValueError):
        GridSpec(eps_levels=(1e-3, 1e-2))  # not decreasing


def test_integrate_period_constant_and_sine():
    assert integrate_period(lambda u: np.full_like(u, 3.0), 2.0) \
        == pytest.approx(3.0 * math.pi, rel=1e-14)
    assert abs(integrate_period(np.sin, 1.0)) < 1e-14
    # accepts pre-sampled values too
    grid = GridSpec()
    vals = np.cos(grid.period_nodes(1.0)) ** 2
    assert integrate_period(vals, 1.0, grid) == pytest.approx(math.pi, rel=1e-13)


def test_integrate_period_ray_derivative():
    cfg = CavityConfig.symmetric(2, alpha=0.3, rho=0.2)
    grid = GridSpec(points_per_period=1 << 15)
    val = integrate_period(lambda u: closed_f(cfg, 5, u)[1], cfg.Omega, grid)
    assert val == pytest.approx(2 * math.pi, rel=1e-10)


def test_trapezoid_doubling_converged():
    h = HomographicMap(math.cosh(0.5), 1j * math.sinh(0.5), 1.0)
    a = integrate_period(h.derivative, 1.0, GridSpec(points_per_period=4096))
    b = integrate_period(h.derivative, 1.0, GridSpec(points_per_period=8192))
    assert abs(b - a) < 1e-12 * abs(b)


def test_point_split_identity_and_translation():
    ident = identity_map(1.0)
    res = point_split_density(ident.apply, ident.derivative, 0.3)
    assert abs(res.value) < 1e-10
    shift = HomographicMap(np.exp(0.25j), 0j, 1.0)
    res = point_split_density(shift.apply, shift.derivative, 1.1)
    assert abs(res.value) < 1e-10


def test_point_split_uniform_velocity():
    v = 0.4
    a = (1 + v) / (1 - v)
    res = point_split_density(lambda u: a * np.asarray(u) + 0.2,
                              lambda u: np.full_like(np.asarray(u, float), a), 0.9)
    assert abs(res.value) < 1e-9


def test_point_split_matches_schwarzian():
    alpha = 0.4
    h = HomographicMap(math.cosh(alpha), 1j * math.sinh(alpha), 1.0)
    for u in (0.3, 1.2, 2.8, 4.9):
        res = point_split_density(h.apply, h.derivative, u)
        ref = -h.schwarzian(u) / (24 * math.pi)
        assert res.value == pytest.approx(ref, rel=1e-5)


def test_point_split_rejects_decreasing_map():
    with pytest.raises(ValueError):
        point_split_density(lambda u: -np.asarray(u),
                            lambda u: np.full_like(np.asarray(u, float), -1.0), 0.5)


def test_point_split_error_estimate_coverage():
    rng = np.random.default_rng(3)
    covered = 0
    n = 200
    for _ in range(n):
        alpha = float(rng.uniform(0.05, 1.0))
        u = float(rng.uniform(0, 2 * math.pi))
        h = HomographicMap(math.cosh(alpha), 1j * math.sinh(alpha), 1.0)
        res = point_split_density(h.apply, h.derivative, u)
        ref = -h.schwarzian(u) / (24 * math.pi)
        if abs(res.value - ref) <= res.error:
            covered += 1
    assert covered >= 0.95 * n


def test_integrate_spectrum_trivial_and_polynomial():
    res = integrate_spectrum(lambda nu: np.zeros_like(nu), nu_max=3.0)
    assert res.photon_number == 0.0 and res.energy_moment == 0.0
    res = integrate_spectrum(lambda nu: nu * (1 - nu) * (nu < 1), nu_max=1.0)
    assert res.photon_number == pytest.approx(1.0 / 6.0, abs=1e-14)
    assert res.energy_moment == pytest.approx(1.0 / 12.0, abs=1e-14)
    assert not res.tail_warning


def test_integrate_spectrum_adaptive_and_warning():
    # geometric arches: adaptive cut after the tail falls below tolerance
    def n_of_nu(nu):
        return 0.5 ** np.floor(nu) * np.sin(math.pi * nu) ** 2

    res = integrate_spectrum(n_of_nu)
    assert res.nu_max >= 20
    exact = 0.5 * sum(0.5**k for k in range(60))
    assert res.photon_number == pytest.approx(exact, rel=1e-7)
    truncated = integrate_spectrum(n_of_nu, nu_max=3.0)
    assert truncated.tail_warning
