"""Single oscillating mirror: energy density, per-period energy, spectrum.

All outputs are dimensionless: densities in units of hbar*Omega^2,
energies in hbar*Omega, spectra as photon-number densities per reduced
frequency nu = omega/Omega.  Everything scales exactly linearly with the
intensity reflectivity R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .homography import HomographicMap
from .quadrature import GridSpec, integrate_period
from .specfun import SeriesControl, hyper_G, _h_table

_FOURPI = 4.0 * math.pi


@dataclass(frozen=True)
class SingleMirrorConfig:
    """Mirror with intensity reflectivity R oscillating at rapidity alpha.

    The canonical motion is the homographic trajectory (peak velocity
    tanh(alpha)); a sinusoidal mirror differs only at cubic order in the
    velocity and is reachable through the composed/numeric machinery when
    that difference is the object of study.
    """

    R: float
    alpha: float
    Omega: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.R <= 1.0:
            raise ValueError(f"R must be in (0, 1], got {self.R}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.Omega <= 0:
            raise ValueError(f"Omega must be positive, got {self.Omega}")

    @property
    def beta(self) -> float:
        return math.tanh(self.alpha)

    def ray_map(self) -> HomographicMap:
        """Canonical homographic scattering map (phases 0 and pi/2)."""
        return HomographicMap(math.cosh(self.alpha),
                              1j * math.sinh(self.alpha), self.Omega)


def energy_density(cfg: SingleMirrorConfig, u):
    """Radiated energy density e_u(u) in units of hbar*Omega^2.

    e_u = -R * (Schwarzian of the ray map) / (24 pi)
        = (R/(48 pi)) (V'(u)^2 - 1);
    oscillates in sign, averages to something nonnegative.
    """
    d = cfg.ray_map().derivative(u)
    return (cfg.R / (12.0 * _FOURPI)) * (d * d - 1.0)


@dataclass(frozen=True)
class EnergyPerPeriod:
    closed_form: float
    quadrature: float


def energy_per_period(cfg: SingleMirrorConfig, grid: GridSpec = GridSpec()) -> EnergyPerPeriod:
    """E_u per oscillation period in units of hbar*Omega.

    Closed form (R/12) sinh^2(alpha); the trapezoid value of the density
    is carried along for cross-checks.
    """
    closed = cfg.R / 12.0 * math.sinh(cfg.alpha) ** 2
    quad = cfg.Omega * integrate_period(lambda u: energy_density(cfg, u), cfg.Omega, grid)
    return EnergyPerPeriod(closed, quad)


def spectrum(cfg: SingleMirrorConfig, nu, ctl: SeriesControl = SeriesControl()):
    """Photon-number spectral density n_nu (dimensionless), nu > 0.

    n_nu = R (sin^2 pi nu / pi^2) sum_{m > nu} nu (m - nu) G_m(nu, beta)^2.

    Exactly zero at every integer nu; the m sum is stopped after three
    consecutive terms contribute less than ctl.rel_tol of the partial sum
    (single early terms can be non-monotone at large beta).
    """
    nu_arr = np.atleast_1d(np.asarray(nu, dtype=float))
    if np.any(nu_arr <= 0):
        raise ValueError("nu must be positive")
    out = np.zeros_like(nu_arr)
    beta = cfg.beta
    if beta > 0.0:
        interior = nu_arr != np.round(nu_arr)
        if interior.any():
            out[interior] = _spectrum_interior(nu_arr[interior], beta, ctl)
    out *= cfg.R
    return out if np.ndim(nu) else float(out[0])


def _spectrum_interior(nu: np.ndarray, beta: float, ctl: SeriesControl) -> np.ndarray:
    z = np.array([beta * beta])
    omz = np.array([1.0 - beta * beta])
    sin2 = (np.sin(np.pi * nu) / np.pi) ** 2
    total = np.zeros_like(nu)
    quiet = np.zeros_like(nu, dtype=int)
    m = 1
    while m <= ctl.max_terms:
        sel = nu < m
        if sel.any():
            g = _h_table(m, nu[sel], z, omz, ctl)[:, 0] * beta**m
            term = sin2[sel] * nu[sel] * (m - nu[sel]) * g * g
            total[sel] += term
            small = term <= ctl.rel_tol * total[sel]
            quiet[sel] = np.where(small, quiet[sel] + 1, 0)
            if np.all(quiet[sel] >= 3):
                break
        m += 1
    return total


@dataclass(frozen=True)
class SpectrumSamples:
    """Sampled spectrum with truncation metadata."""

    nu: np.ndarray
    values: np.ndarray
    envelope: np.ndarray | None
    m_max_used: int
    n_roundtrips: int
    tail_bound: float
    units: str = "photon number per unit nu per period"


@dataclass(frozen=True)
class DensitySamples:
    """Sampled energy density over one period with truncation metadata."""

    u: np.ndarray
    values: np.ndarray
    n_roundtrips: int
    m_max_used: int
    tail_bound: float
    units: str = "hbar Omega^2"


def sample_density(cfg: SingleMirrorConfig, grid: GridSpec = GridSpec()) -> DensitySamples:
    u = grid.period_nodes(cfg.Omega)
    return DensitySamples(u, energy_density(cfg, u), 0, 0, 0.0)


def sample_spectrum(cfg: SingleMirrorConfig, nu_max: float, points: int,
                    ctl: SeriesControl = SeriesControl()) -> SpectrumSamples:
    nu = np.linspace(nu_max / points, nu_max, points)
    return SpectrumSamples(nu, spectrum(cfg, nu, ctl), None, 0, 0, 0.0)
