"""Mirror world lines and the light-cone scattering maps they induce.

A mirror at x = q(t) maps an incoming ray u = t - x to the outgoing ray
v = t + x through the intersection with its world line: v = V(u) where
t solves t - q(t) = u.  With |q'| < 1 that equation is strictly monotone,
so the root is unique and bracketed bisection is safe; a Newton polish is
used once the bracket is tight when the velocity is available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import RootBracketError
from .homography import HomographicMap

_ROOT_TOL = 1e-12  # time-root residual, in units of 1/Omega
_NEWTON_BRACKET = 1e-3


@dataclass(frozen=True)
class MirrorTrajectory:
    """One mirror's world line plus enough derivatives for chain rules.

    position must be defined for all t and satisfy sup|q'(t)| <= velocity_bound < 1.
    The bound is declared, never estimated numerically: it guarantees the
    root bracketing below.  velocity/acceleration/jerk are optional
    callables; they are needed only for derivative and Schwarzian
    evaluation along composed ray maps.  Custom position functions must be
    safe for concurrent evaluation.
    """

    kind: str
    position: Callable[[np.ndarray], np.ndarray]
    velocity_bound: float
    omega: float = 1.0
    velocity: Optional[Callable] = None
    acceleration: Optional[Callable] = None
    jerk: Optional[Callable] = None
    hmap: Optional[HomographicMap] = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.velocity_bound < 1.0:
            raise ValueError(
                f"velocity_bound must be in [0, 1), got {self.velocity_bound}"
            )

    # -- factories ---------------------------------------------------------

    @staticmethod
    def sinusoidal(mean: float, beta: float, omega: float, phase: float) -> "MirrorTrajectory":
        """q(t) = mean - (beta/omega) sin(omega t - phase), |q'| <= beta."""
        if not 0.0 <= beta < 1.0:
            raise ValueError(f"beta must be in [0, 1), got {beta}")

        def q(t):
            return mean - (beta / omega) * np.sin(omega * t - phase)

        def qd(t):
            return -beta * np.cos(omega * t - phase)

        def qdd(t):
            return beta * omega * np.sin(omega * t - phase)

        def qddd(t):
            return beta * omega**2 * np.cos(omega * t - phase)

        return MirrorTrajectory("sinusoidal", q, beta, omega, qd, qdd, qddd)

    @staticmethod
    def constant(q0: float, omega: float = 1.0) -> "MirrorTrajectory":
        zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))
        return MirrorTrajectory(
            "sinusoidal", lambda t: np.full_like(np.asarray(t, dtype=float), q0),
            0.0, omega, zero, zero, zero,
        )

    @staticmethod
    def from_homographic(hmap: HomographicMap) -> "MirrorTrajectory":
        """Wrap a homographic map; scattering evaluations bypass root finding."""

        def q(t):
            # invert (u + h(u))/2 = t, then q = (h(u) - u)/2
            u = _solve_monotone(
                lambda x: 0.5 * (x + hmap.apply(x)), t, hmap.velocity_amplitude,
                hmap.omega, deriv=lambda x: 0.5 * (1.0 + hmap.derivative(x)),
            )
            return 0.5 * (hmap.apply(u) - u)

        return MirrorTrajectory(
            "homographic", q, hmap.velocity_amplitude, hmap.omega, hmap=hmap
        )

    @staticmethod
    def custom(position, velocity_bound, omega=1.0, velocity=None,
               acceleration=None, jerk=None) -> "MirrorTrajectory":
        return MirrorTrajectory(
            "custom", position, velocity_bound, omega, velocity, acceleration, jerk
        )

    @staticmethod
    def sinusoidal_pair(K: int, beta: float, omega: float = 1.0):
        """The two resonant mirrors: mean positions -+ K*pi/(2*omega) and the
        relative phases that make even K a breathing mode, odd K a translation."""
        half = K * math.pi / (2.0 * omega)
        phase = (K + 1) * math.pi / 2.0
        m1 = MirrorTrajectory.sinusoidal(-half, beta, omega, phase)
        m2 = MirrorTrajectory.sinusoidal(half, beta, omega, -phase)
        return m1, m2

    # -- scattering maps ---------------------------------------------------

    def v_of_u(self, u):
        """Outgoing ray v for incoming ray u (solves t - q(t) = u)."""
        if self.hmap is not None:
            return self.hmap.apply(u)
        t = self._time_from_u(u)
        out = t + self.position(t)
        return out if np.ndim(u) else float(out)

    def u_of_v(self, v):
        """Incoming ray u for outgoing ray v (solves t + q(t) = v)."""
        if self.hmap is not None:
            return _solve_monotone(
                self.hmap.apply, v, self.velocity_bound, self.omega,
                deriv=self.hmap.derivative,
            )
        t = self._time_from_v(v)
        out = t - self.position(t)
        return out if np.ndim(v) else float(out)

    def forward_eval(self, u):
        """(v, v', Schwarzian) of the map u -> v = V(u).

        Derivatives follow from the reflection kinematics: with s = q'(t*),
        V' = (1+s)/(1-s), V'' = 2 q''/(1-s)^3,
        V''' = 2 q'''/(1-s)^4 + 6 q''^2/(1-s)^5.
        """
        if self.hmap is not None:
            return (self.hmap.apply(u), self.hmap.derivative(u), self.hmap.schwarzian(u))
        self._require_derivatives()
        t = self._time_from_u(u)
        s = self.velocity(t)
        one = 1.0 - s
        d1 = (1.0 + s) / one
        d2 = 2.0 * self.acceleration(t) / one**3
        d3 = 2.0 * self.jerk(t) / one**4 + 6.0 * self.acceleration(t) ** 2 / one**5
        return t + self.position(t), d1, d3 / d1 - 1.5 * (d2 / d1) ** 2

    def inverse_eval(self, v):
        """(u, u', Schwarzian) of the inverse map v -> u."""
        if self.hmap is not None:
            u = self.u_of_v(v)
            d = 1.0 / self.hmap.derivative(u)
            # S(h^-1)(v) = -S(h)(u) / h'(u)^2
            return u, d, -self.hmap.schwarzian(u) * d * d
        self._require_derivatives()
        t = self._time_from_v(v)
        s = self.velocity(t)
        one = 1.0 + s
        d1 = (1.0 - s) / one
        d2 = -2.0 * self.acceleration(t) / one**3
        d3 = -2.0 * self.jerk(t) / one**4 + 6.0 * self.acceleration(t) ** 2 / one**5
        return t - self.position(t), d1, d3 / d1 - 1.5 * (d2 / d1) ** 2

    # -- internals ---------------------------------------------------------

    def _require_derivatives(self):
        if self.velocity is None or self.acceleration is None or self.jerk is None:
            raise ValueError(
                "trajectory derivatives (velocity/acceleration/jerk) are required "
                "for map-derivative evaluation; supply them to MirrorTrajectory.custom"
            )

    def _time_from_u(self, u):
        return _solve_monotone(
            lambda t: t - self.position(t), u, self.velocity_bound, self.omega,
            deriv=(lambda t: 1.0 - self.velocity(t)) if self.velocity else None,
        )

    def _time_from_v(self, v):
        return _solve_monotone(
            lambda t: t + self.position(t), v, self.velocity_bound, self.omega,
            deriv=(lambda t: 1.0 + self.velocity(t)) if self.velocity else None,
        )


def _solve_monotone(f, target, velocity_bound, omega, deriv=None):
    """Solve f(t) = target for strictly increasing f with f' >= 1 - bound.

    Vectorized bracketed bisection, switched to Newton once the bracket is
    below 1e-3/omega when a derivative is available.  Residual tolerance
    1e-12/omega on the time root.
    """
    target = np.asarray(target, dtype=float)
    scalar = target.ndim == 0
    t = np.atleast_1d(target).astype(float).copy()
    slope = 1.0 - velocity_bound
    r = np.atleast_1d(f(t)) - np.atleast_1d(target)
    # guaranteed bracket: |root - t| <= |residual| / min slope
    span = np.abs(r) / slope + 1e-9 / omega
    lo, hi = t - span, t + span
    flo = np.atleast_1d(f(lo)) - np.atleast_1d(target)
    fhi = np.atleast_1d(f(hi)) - np.atleast_1d(target)
    if np.any(flo > 0) or np.any(fhi < 0):
        raise RootBracketError(
            "failed to bracket the trajectory intersection; "
            "check that the declared velocity_bound is correct"
        )
    tol = _ROOT_TOL / omega
    stop_width = (_NEWTON_BRACKET if deriv is not None else 2.0 * _ROOT_TOL) / omega
    for _ in range(200):
        if np.all(hi - lo < stop_width):
            break
        mid = 0.5 * (lo + hi)
        neg = (np.atleast_1d(f(mid)) - np.atleast_1d(target)) < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    t = 0.5 * (lo + hi)
    if deriv is not None:
        r = np.atleast_1d(f(t)) - np.atleast_1d(target)
        for _ in range(60):
            if np.all(np.abs(r) < tol * slope):
                break
            t = t - r / np.atleast_1d(deriv(t))
            r = np.atleast_1d(f(t)) - np.atleast_1d(target)
        if not np.all(np.abs(r) < 1e3 * tol):
            raise RootBracketError("trajectory root refinement failed to converge")
    return float(t[0]) if scalar else t


def homographic_position(hmap: HomographicMap, u):
    """Mirror position sampled along light cones: Q(u) = (h(u) - u)/2.

    For the canonical phases (arg a = 0, arg b = pi/2) this equals
    atan(beta cos(Omega u) / (1 + beta sin(Omega u))) / Omega.
    """
    return 0.5 * (hmap.apply(u) - np.asarray(u, dtype=float))
