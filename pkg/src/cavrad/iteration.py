"""Iterated ray maps of the open cavity and threshold classification.

The field leaving the cavity after p reflections sees the composed map
f_p: f_0 is the identity, f_{-1} the direct bounce off the entry mirror,
f_{2n} the n-fold composition of (exit mirror)^-1 then (far mirror), and
f_{2n+1} one more far-mirror reflection.  For resonant homographic motion
every f_p has closed-form value, derivative and Schwarzian derivative; for
arbitrary trajectories the same quantities are accumulated through the
composition chain rules, never by finite differences.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DensityDivergenceError, EnergyDivergenceError
from .homography import HomographicMap, mirror_matrices
from .trajectory import MirrorTrajectory

LINEAR_REPORTING_BOUNDARY = 0.1  # alpha_eff below this is reported as linear


class ThresholdStatus(enum.Enum):
    LINEAR = "linear"
    NONLINEAR_BELOW_THRESHOLD = "nonlinear_below_threshold"
    DENSITY_DIVERGENT = "density_divergent"
    ENERGY_DIVERGENT = "energy_divergent"


@dataclass(frozen=True)
class CavityConfig:
    """Geometry and optics of the oscillating cavity.

    The resonance condition ties the flight time to the mechanical
    frequency: L = K*pi/Omega exactly.  Losses are encoded by
    r = sqrt(R1*R2) = exp(-2*rho) with rho > 0, so at least one mirror
    must be partly transmitting.  alpha is the per-reflection rapidity;
    the finesse-amplified alpha_eff = 2*alpha/rho controls every
    divergence in this package.
    """

    K: int
    alpha: float
    R1: float
    R2: float
    Omega: float = 1.0

    def __post_init__(self):
        if self.K != int(self.K) or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.Omega <= 0:
            raise ValueError(f"Omega must be positive, got {self.Omega}")
        for name, R in (("R1", self.R1), ("R2", self.R2)):
            if not 0.0 < R <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {R}")
        if self.R1 * self.R2 >= 1.0:
            raise ValueError("perfectly closed cavity (R1 = R2 = 1) is out of scope")

    @classmethod
    def symmetric(cls, K: int, alpha: float, r: float | None = None,
                  rho: float | None = None, Omega: float = 1.0) -> "CavityConfig":
        """Equal mirrors with round-trip reflection r = exp(-2*rho)."""
        r = cls._resolve_r(r, rho)
        return cls(K=K, alpha=alpha, R1=r, R2=r, Omega=Omega)

    @classmethod
    def from_alpha_eff(cls, K: int, alpha_eff: float, r: float | None = None,
                       rho: float | None = None, R1: float | None = None,
                       R2: float | None = None, Omega: float = 1.0) -> "CavityConfig":
        """Parametrize by the finesse-amplified rapidity alpha_eff = 2*alpha/rho."""
        if R1 is not None or R2 is not None:
            if R1 is None or R2 is None or r is not None or rho is not None:
                raise ValueError("give either both R1 and R2, or one of r/rho")
            rr = math.sqrt(R1 * R2)
        else:
            rr = cls._resolve_r(r, rho)
            R1 = R2 = rr
        rho_val = -0.5 * math.log(rr)
        return cls(K=K, alpha=0.5 * alpha_eff * rho_val, R1=R1, R2=R2, Omega=Omega)

    @staticmethod
    def _resolve_r(r, rho) -> float:
        if (r is None) == (rho is None):
            raise ValueError("exactly one of r or rho is required")
        if rho is not None:
            if rho <= 0:
                raise ValueError(f"rho must be positive, got {rho}")
            return math.exp(-2.0 * rho)
        if not 0.0 < r < 1.0:
            raise ValueError(f"r must be in (0, 1), got {r}")
        return r

    # -- derived optics ------------------------------------------------

    @property
    def T1(self) -> float:
        return 1.0 - self.R1

    @property
    def T2(self) -> float:
        return 1.0 - self.R2

    @property
    def r(self) -> float:
        return math.sqrt(self.R1 * self.R2)

    @property
    def rho(self) -> float:
        return -0.5 * math.log(self.r)

    @property
    def L(self) -> float:
        return self.K * math.pi / self.Omega

    @property
    def alpha_eff(self) -> float:
        return 2.0 * self.alpha / self.rho

    @property
    def beta_eff(self) -> float:
        return math.tanh(self.alpha_eff)

    def beta_p(self, p) -> float:
        """Harmonic amplitude of the p-reflection map: (-1)^K tanh(p*alpha)."""
        return (-1.0) ** self.K * np.tanh(np.asarray(p, dtype=float) * self.alpha)

    def swapped(self) -> "CavityConfig":
        """Mirror-exchanged cavity (for left-radiated quantities)."""
        return CavityConfig(self.K, self.alpha, self.R2, self.R1, self.Omega)

    def require_density_convergent(self):
        if self.alpha_eff >= 1.0:
            raise DensityDivergenceError(
                f"alpha_eff = {self.alpha_eff:.6g} >= 1 (r e^(4 alpha) >= 1): the energy "
                f"density diverges; the effective velocity is capped at tanh(1) "
                f"~ {math.tanh(1.0):.4f} just below threshold"
            )

    def require_energy_convergent(self):
        # a relative band absorbs float round trips through r = e^{-2 rho};
        # within it the pole term 1/(rho - alpha) is pure rounding noise
        if self.alpha >= self.rho * (1.0 - 1e-12):
            raise EnergyDivergenceError(
                f"alpha = {self.alpha:.6g} >= rho = {self.rho:.6g}: the period-"
                "integrated radiated energy diverges at alpha = rho"
            )


def threshold_status(config: CavityConfig) -> ThresholdStatus:
    """Classify the drive strength; classification never raises.

    The 0.1 boundary between linear and nonlinear is a reporting
    convention only and gates nothing.
    """
    if config.alpha >= config.rho * (1.0 - 1e-12):
        return ThresholdStatus.ENERGY_DIVERGENT
    if config.alpha_eff >= 1.0:
        return ThresholdStatus.DENSITY_DIVERGENT
    if config.alpha_eff < LINEAR_REPORTING_BOUNDARY:
        return ThresholdStatus.LINEAR
    return ThresholdStatus.NONLINEAR_BELOW_THRESHOLD


def closed_map_matrix(config: CavityConfig, p: int) -> HomographicMap:
    """The map of f_p as a homographic matrix (valid for p >= -1)."""
    K, alpha = config.K, config.alpha
    a = (-1j) ** (K * p) * math.cosh(p * alpha)
    b = 1j ** (2 * K + 1) * (-1j) ** (K * p) * math.sinh(p * alpha)
    return HomographicMap(a, b, config.Omega)


@dataclass(frozen=True)
class RayFamily:
    """Evaluators for the iterated maps f_p.

    mode 'closed_form' uses the resonant homographic algebra; 'composed'
    chains two mirror trajectories through the functional iteration.
    Instances are immutable and evaluation is pure.
    """

    config: CavityConfig
    mode: str
    mirror1: Optional[MirrorTrajectory] = None
    mirror2: Optional[MirrorTrajectory] = None

    @classmethod
    def closed(cls, config: CavityConfig) -> "RayFamily":
        return cls(config, "closed_form")

    @classmethod
    def composed(cls, config: CavityConfig, mirror1: MirrorTrajectory | None = None,
                 mirror2: MirrorTrajectory | None = None) -> "RayFamily":
        """Default mirrors are the resonant sinusoids matching the config."""
        if mirror1 is None or mirror2 is None:
            beta = math.tanh(config.alpha)
            m1, m2 = MirrorTrajectory.sinusoidal_pair(config.K, beta, config.Omega)
            mirror1 = mirror1 or m1
            mirror2 = mirror2 or m2
        return cls(config, "composed", mirror1, mirror2)

    def evaluate(self, p: int, u):
        """(f_p(u), f_p'(u), S f_p(u)) for p >= -1."""
        if p < -1 or p != int(p):
            raise ValueError(f"p must be an integer >= -1, got {p}")
        if self.mode == "closed_form":
            return closed_f(self.config, p, u)
        return iterate_f(self, p, u)


def closed_f(config: CavityConfig, p: int, u):
    """Closed-form (value, derivative, Schwarzian) of f_p.

    f_p(u) = u - p L + 2 Q_p(u) with Omega Q_p = atan(beta_p cos / (1 + beta_p sin)),
    f_p'(u) = 1 / (cosh 2p alpha + (-1)^K sinh 2p alpha sin Omega u),
    S f_p = (Omega^2 / 2)(1 - f_p'^2).

    The value branch is the physical one (continuous in u, exact rest
    limit u - p L), not the principal branch of the matrix action.
    """
    u = np.asarray(u, dtype=float)
    omega, K, alpha = config.Omega, config.K, config.alpha
    beta_p = float(config.beta_p(p))
    s = np.sin(omega * u)
    q_p = np.arctan2(beta_p * np.cos(omega * u), 1.0 + beta_p * s) / omega
    value = u - p * config.L + 2.0 * q_p
    deriv = _stable_fp_deriv(2.0 * p * alpha, (-1.0) ** K * s)
    schw = 0.5 * omega**2 * (1.0 - deriv * deriv)
    if u.ndim:
        return value, deriv, schw
    return float(value), float(deriv), float(schw)


def _stable_fp_deriv(q, s):
    """1/(cosh q + s sinh q) without overflow for large |q| (|s| <= 1)."""
    q = np.asarray(q, dtype=float)
    s = np.asarray(s, dtype=float)
    aq = np.abs(q)
    sg = np.where(q >= 0, s, -s)
    return 2.0 * np.exp(-aq) / ((1.0 + sg) + (1.0 - sg) * np.exp(-2.0 * aq))


def iterate_f(family: RayFamily, p: int, u):
    """(value, derivative, Schwarzian) of f_p by functional iteration.

    f_{-1} = g, f_0 = I, f_{2n} = g^{-1} o f_{2n-1}, f_{2n+1} = h o f_{2n};
    derivative and Schwarzian accumulate through
      (m o F)'  = F' * m' o F
      S(m o F)  = S F + F'^2 * (S m) o F.
    """
    if family.mode != "composed":
        raise ValueError("iterate_f needs a composed-mode family")
    g = family.mirror2
    h = family.mirror1
    if p == -1:
        return g.forward_eval(u)
    u = np.asarray(u, dtype=float)
    value = u.copy().astype(float)
    deriv = np.ones_like(value)
    schw = np.zeros_like(value)
    for step in range(1, p + 1):
        if step % 2:  # odd step applies the far mirror h
            m_val, m_der, m_sch = h.forward_eval(value)
        else:  # even step applies g^{-1}
            m_val, m_der, m_sch = g.inverse_eval(value)
        schw = schw + deriv * deriv * np.asarray(m_sch)
        deriv = deriv * np.asarray(m_der)
        value = np.asarray(m_val)
    if u.ndim:
        return value, deriv, schw
    return float(value), float(deriv), float(schw)


@dataclass(frozen=True)
class PeriodicOrbit:
    phase: float  # Omega * u_tilde, in [0, 2 pi)
    stability: str  # "attractive" or "repulsive"


@dataclass(frozen=True)
class OrbitReport:
    orbits: tuple
    degenerate: bool  # alpha = 0: every phase is trivially periodic


def periodic_orbits(family: RayFamily) -> OrbitReport:
    """The two per-period ray phases with f_p(u~) = u~ - p L.

    They sit where (-1)^K sin(Omega u~) = -+1.  At the attractive one
    ((-1)^K sin = -1) the derivatives follow the power law
    f_p'(u~) = e^{2 p alpha} and the Schwarzian the geometric ratio
    (1 - e^{4 p alpha}) / (1 - e^{4 alpha}).  The attractive/repulsive
    assignment is confirmed numerically by the density-peak test in the
    verification suite rather than assumed.
    """
    if family.mode != "closed_form":
        raise ValueError("periodic_orbits needs a closed-form family")
    cfg = family.config
    if cfg.alpha == 0.0:
        return OrbitReport((), degenerate=True)
    if cfg.K % 2 == 0:
        attract, repel = 1.5 * math.pi, 0.5 * math.pi  # sin = -1 / +1
    else:
        attract, repel = 0.5 * math.pi, 1.5 * math.pi
    return OrbitReport(
        (PeriodicOrbit(attract, "attractive"), PeriodicOrbit(repel, "repulsive")),
        degenerate=False,
    )
