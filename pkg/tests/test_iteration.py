"""Iterated ray maps, periodic orbits, threshold classification."""

import math

import numpy as np
import pytest

from cavrad.errors import DensityDivergenceError, EnergyDivergenceError
from cavrad.homography import compose, mirror_matrices
from cavrad.iteration import (CavityConfig, RayFamily, ThresholdStatus,
                              closed_f, closed_map_matrix, iterate_f,
                              periodic_orbits, threshold_status)
from cavrad.quadrature import GridSpec, integrate_period


def test_rest_cavity_maps():
    cfg = CavityConfig.symmetric(3, alpha=0.0, r=0.9)
    fam = RayFamily.composed(cfg)
    for p in (-1, 0, 1, 2, 3):
        v, d, s = fam.evaluate(p, 0.77)
        assert v == pytest.approx(0.77 - p * cfg.L, abs=1e-11)
        assert d == pytest.approx(1.0, abs=1e-12)
        assert abs(s) < 1e-12


def test_composed_matches_closed_small_beta():
    beta = 1e-3
    for K in (2, 3):
        cfg = CavityConfig(K=K, alpha=math.atanh(beta), R1=0.9, R2=0.9)
        fam = RayFamily.composed(cfg)
        u = np.linspace(0, 2 * math.pi, 201)
        for p in (1, 7, 40):
            v, _, _ = iterate_f(fam, p, u)
            vc, _, _ = closed_f(cfg, p, u)
            assert np.abs(v - vc).max() <= 100 * beta**2


def test_chain_rule_matches_direct_product():
    cfg = CavityConfig(K=2, alpha=0.1, R1=0.9, R2=0.9)
    fam = RayFamily.composed(cfg)
    u0 = 1.3
    v1, d1, _ = fam.mirror1.forward_eval(u0)
    _, d2, _ = fam.mirror2.inverse_eval(v1)
    _, d, _ = iterate_f(fam, 2, u0)
    assert d == pytest.approx(d1 * d2, abs=1e-10)


def test_closed_f_identity_and_first_map():
    cfg = CavityConfig.symmetric(3, alpha=0.2, rho=0.1)
    v, d, s = closed_f(cfg, 0, 1.9)
    assert (v, d, s) == (1.9, 1.0, 0.0)
    # p = 1 matrix equals the mirror map: i^(2K+1) (-i)^K = i^(K+1)
    h, _ = mirror_matrices(cfg.K, cfg.alpha)
    m1 = closed_map_matrix(cfg, 1)
    assert abs(m1.a - h.a) < 1e-15 and abs(m1.b - h.b) < 1e-15


def test_closed_matrix_against_sevenfold_product():
    cfg = CavityConfig.symmetric(2, alpha=0.15, rho=0.1)
    h, g = mirror_matrices(cfg.K, cfg.alpha)
    f = h
    for _ in range(3):
        f = compose(h, compose(g.inverse(), f))
    ref = closed_map_matrix(cfg, 7)
    assert abs(f.a - ref.a) < 1e-12 and abs(f.b - ref.b) < 1e-12


def test_periodic_orbit_power_laws():
    cfg = CavityConfig.symmetric(2, alpha=0.2, rho=0.3)
    fam = RayFamily.closed(cfg)
    rep = periodic_orbits(fam)
    assert not rep.degenerate
    attract, repel = rep.orbits
    assert attract.stability == "attractive"
    assert attract.phase == pytest.approx(1.5 * math.pi)  # sin = -1 for even K
    ut = attract.phase / cfg.Omega
    _, d3, _ = closed_f(cfg, 3, ut)
    assert d3 == pytest.approx(math.exp(6 * cfg.alpha), rel=1e-12)
    ur = repel.phase / cfg.Omega
    for p in (1, 4, 9):
        _, d, _ = closed_f(cfg, p, ur)
        assert d == pytest.approx(math.exp(-2 * p * cfg.alpha), rel=1e-12)
    _, _, s1 = closed_f(cfg, 1, ut)
    for p in range(1, 7):
        _, _, sp = closed_f(cfg, p, ut)
        ratio = (1 - math.exp(4 * p * cfg.alpha)) / (1 - math.exp(4 * cfg.alpha))
        assert sp / s1 == pytest.approx(ratio, rel=1e-10)


def test_periodic_orbit_phase_odd_K():
    cfg = CavityConfig.symmetric(3, alpha=0.1, rho=0.3)
    rep = periodic_orbits(RayFamily.closed(cfg))
    assert rep.orbits[0].phase == pytest.approx(0.5 * math.pi)
    ut = rep.orbits[0].phase
    _, d, _ = closed_f(cfg, 5, ut)
    assert d == pytest.approx(math.exp(10 * cfg.alpha), rel=1e-12)


def test_degenerate_orbits_at_rest():
    rep = periodic_orbits(RayFamily.closed(CavityConfig.symmetric(2, alpha=0.0, r=0.9)))
    assert rep.degenerate and rep.orbits == ()


def test_threshold_classification():
    rho = 0.005
    assert threshold_status(CavityConfig.symmetric(3, alpha=rho / 200, rho=rho)) \
        is ThresholdStatus.LINEAR
    cfg9 = CavityConfig.from_alpha_eff(3, 0.9, rho=rho)
    assert threshold_status(cfg9) is ThresholdStatus.NONLINEAR_BELOW_THRESHOLD
    assert cfg9.beta_eff == pytest.approx(0.7163, abs=5e-5)
    cfg1 = CavityConfig.from_alpha_eff(3, 1.0, rho=rho)
    assert threshold_status(cfg1) is ThresholdStatus.DENSITY_DIVERGENT
    assert math.tanh(1.0) == pytest.approx(0.7616, abs=5e-5)
    assert threshold_status(CavityConfig.symmetric(3, alpha=rho, rho=rho)) \
        is ThresholdStatus.ENERGY_DIVERGENT
    # r e^{4 alpha} >= 1 is the same line as alpha_eff >= 1
    assert cfg1.r * math.exp(4 * cfg1.alpha) == pytest.approx(1.0, abs=1e-12)


def test_threshold_guards_raise_distinct_errors():
    cfg = CavityConfig.from_alpha_eff(2, 1.05, r=0.99)
    with pytest.raises(DensityDivergenceError):
        cfg.require_density_convergent()
    cfg2 = CavityConfig.symmetric(2, alpha=0.01, rho=0.009)
    with pytest.raises(EnergyDivergenceError):
        cfg2.require_energy_convergent()


def test_power_law_everywhere_up_to_100():
    cfg = CavityConfig.symmetric(3, alpha=0.05, rho=0.2)
    ut = periodic_orbits(RayFamily.closed(cfg)).orbits[0].phase
    for p in (1, 10, 50, 100):
        _, d, _ = closed_f(cfg, p, ut)
        assert d == pytest.approx(math.exp(2 * p * cfg.alpha), rel=1e-10)


def test_period_mean_of_derivative_is_one():
    cfg = CavityConfig.symmetric(2, alpha=0.15, rho=0.2)
    grid = GridSpec(points_per_period=1 << 16)
    for p in (1, 5, 12):
        mean = integrate_period(lambda u: closed_f(cfg, p, u)[1], cfg.Omega, grid) \
            / (2 * math.pi / cfg.Omega)
        assert mean == pytest.approx(1.0, rel=1e-10)


def test_composed_vs_closed_deep_iteration():
    # the discrepancy stays O(beta^2) with a p-independent constant
    beta = 1e-3
    cfg = CavityConfig(K=2, alpha=math.atanh(beta), R1=0.9, R2=0.9)
    fam = RayFamily.composed(cfg)
    u = np.linspace(0, 2 * math.pi, 33)
    for p in (400, 4000):
        v, _, _ = iterate_f(fam, p, u)
        vc, _, _ = closed_f(cfg, p, u)
        assert np.abs(v - vc).max() <= 100 * beta**2


def test_schwarzian_geometric_growth():
    cfg = CavityConfig.symmetric(2, alpha=0.3, rho=0.2)
    ut = periodic_orbits(RayFamily.closed(cfg)).orbits[0].phase
    vals = []
    for p in (8, 10, 12):
        _, _, s = closed_f(cfg, p, ut)
        vals.append(abs(s))
    for (p1, s1), (p2, s2) in (((8, vals[0]), (10, vals[1])), ((10, vals[1]), (12, vals[2]))):
        assert s2 / s1 == pytest.approx(math.exp(4 * (p2 - p1) * cfg.alpha), rel=0.01)


def test_config_validation():
    with pytest.raises(ValueError):
        CavityConfig(K=0, alpha=0.1, R1=0.9, R2=0.9)
    with pytest.raises(ValueError):
        CavityConfig(K=2, alpha=-0.1, R1=0.9, R2=0.9)
    with pytest.raises(ValueError):
        CavityConfig(K=2, alpha=0.1, R1=1.0, R2=1.0)  # closed cavity
    with pytest.raises(ValueError):
        CavityConfig.symmetric(2, alpha=0.1, r=0.9, rho=0.05)
    cfg = CavityConfig.from_alpha_eff(2, 0.5, rho=0.01)
    assert cfg.alpha_eff == pytest.approx(0.5, rel=1e-12)
    assert cfg.L == pytest.approx(2 * math.pi / cfg.Omega)
    assert cfg.r == pytest.approx(math.exp(-2 * cfg.rho), rel=1e-12)
