"""Single-mirror observables: density, per-period energy, spectrum."""

import math

import numpy as np
import pytest

from cavrad.quadrature import integrate_spectrum, point_split_density
from cavrad.single_mirror import (SingleMirrorConfig, energy_density,
                                  energy_per_period, sample_spectrum, spectrum)


def test_density_vanishes_at_rest():
    cfg = SingleMirrorConfig(R=1.0, alpha=0.0)
    u = np.linspace(0, 2 * math.pi, 50)
    assert np.abs(energy_density(cfg, u)).max() == 0.0


def test_density_sign_oscillates_mean_positive():
    cfg = SingleMirrorConfig(R=1.0, alpha=0.5)
    u = np.linspace(0, 2 * math.pi, 512, endpoint=False)
    e = energy_density(cfg, u)
    assert e.min() < 0 < e.max()
    assert e.mean() > 0


def test_energy_per_period_closed_form():
    for alpha in (0.05, 0.5):
        pair = energy_per_period(SingleMirrorConfig(R=1.0, alpha=alpha))
        assert pair.quadrature == pytest.approx(pair.closed_form, rel=1e-10)
    pair = energy_per_period(SingleMirrorConfig(R=1.0, alpha=0.1))
    assert pair.closed_form == pytest.approx(8.361148174615e-4, rel=1e-10)
    assert pair.closed_form == pytest.approx(math.sinh(0.1) ** 2 / 12.0, rel=1e-15)


def test_energy_does_not_saturate():
    for alpha in (1.0, 1.5, 2.0):
        e1 = energy_per_period(SingleMirrorConfig(R=1.0, alpha=alpha)).closed_form
        e2 = energy_per_period(SingleMirrorConfig(R=1.0, alpha=2 * alpha)).closed_form
        assert e2 > 4.0 * e1


def test_omega_scaling_of_density():
    # dimensionless density depends only on the phase Omega*u
    c1 = SingleMirrorConfig(R=1.0, alpha=0.4, Omega=1.0)
    c2 = SingleMirrorConfig(R=1.0, alpha=0.4, Omega=2.5)
    u = np.linspace(0, 2 * math.pi, 17)
    assert np.allclose(energy_density(c1, u), energy_density(c2, u / 2.5), atol=1e-15)
    assert energy_per_period(c2).closed_form == energy_per_period(c1).closed_form


def test_spectrum_zeros_at_integers():
    cfg = SingleMirrorConfig(R=1.0, alpha=math.atanh(0.6))
    assert spectrum(cfg, np.array([1.0, 2.0, 3.0])).tolist() == [0.0, 0.0, 0.0]


def test_spectrum_parabolic_at_small_velocity():
    beta = 1e-3
    cfg = SingleMirrorConfig(R=0.8, alpha=math.atanh(beta))
    nu = np.array([0.1, 0.5, 0.9])
    ref = 0.8 * beta**2 * nu * (1 - nu)
    assert np.abs(spectrum(cfg, nu) / ref - 1).max() < 1e-3


def test_up_conversion_beyond_first_arch():
    cfg = SingleMirrorConfig(R=1.0, alpha=math.atanh(0.6))
    nu = np.linspace(1.05, 1.95, 10)
    assert np.all(spectrum(cfg, nu) > 0)


def test_spectrum_nonnegative_and_linear_in_R():
    nu = np.linspace(0.05, 3.0, 60)
    full = spectrum(SingleMirrorConfig(R=1.0, alpha=0.7), nu)
    part = spectrum(SingleMirrorConfig(R=0.3, alpha=0.7), nu)
    assert np.all(full >= 0)
    assert np.allclose(part, 0.3 * full, rtol=0, atol=1e-18)


def test_spectral_moment_recovers_energy():
    ratios = []
    for alpha in (0.2, 0.5, 0.8):
        cfg = SingleMirrorConfig(R=1.0, alpha=alpha)
        res = integrate_spectrum(lambda nu: spectrum(cfg, nu))
        ratios.append(res.energy_moment / energy_per_period(cfg).closed_form)
    assert abs(ratios[0] - 1.0) < 1e-4
    assert max(ratios) - min(ratios) < 1e-4


def test_density_matches_point_splitting():
    rng = np.random.default_rng(5)
    for _ in range(20):
        alpha = float(rng.uniform(0.1, 1.0))
        u = float(rng.uniform(0, 2 * math.pi))
        cfg = SingleMirrorConfig(R=0.6, alpha=alpha)
        hmap = cfg.ray_map()
        res = point_split_density(hmap.apply, hmap.derivative, u)
        ref = energy_density(cfg, u)
        scale = max(abs(ref), 0.6 * (math.exp(4 * alpha) - 1) / (48 * math.pi))
        assert abs(cfg.R * res.value - ref) <= 1e-5 * scale


def test_sample_spectrum_metadata():
    s = sample_spectrum(SingleMirrorConfig(R=1.0, alpha=0.3), nu_max=2.0, points=100)
    assert s.nu.shape == (100,) and s.values.shape == (100,)
    assert s.nu[-1] == pytest.approx(2.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SingleMirrorConfig(R=0.0, alpha=0.1)
    with pytest.raises(ValueError):
        SingleMirrorConfig(R=0.5, alpha=-0.2)
    with pytest.raises(ValueError):
        spectrum(SingleMirrorConfig(R=1.0, alpha=0.1), -0.5)
