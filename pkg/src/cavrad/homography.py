"""Exact algebra of homographic trajectory maps.

A map acts on the phase circle exp(i*Omega*u) as a Moebius transformation
with matrix [[a, b], [b*, a*]] of unit determinant.  Composition of maps is
matrix multiplication, which is what makes many-round-trip cavity algebra
exact: rapidities add, and first/Schwarzian derivatives have closed forms.

Conventions: |a| = cosh(alpha), |b| = sinh(alpha) where alpha is the
rapidity; the mirror's peak velocity is tanh(alpha).  The induced time map
u -> h(u) is strictly increasing and commutes with translation by one
period 2*pi/Omega.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import FrequencyMismatchError

_DET_TOL = 1e-12


@dataclass(frozen=True)
class HomographicMap:
    """Unit-determinant phase-circle map exp(i*Omega*h(u)) = (a z + b)/(b* z + a*).

    Immutable; all evaluation methods are pure and safe to call from any
    number of threads.
    """

    a: complex
    b: complex
    omega: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        det = abs(self.a) ** 2 - abs(self.b) ** 2
        # the determinant of a high-rapidity map is a difference of large
        # squares, so the acceptance window scales with the entry size
        if abs(det - 1.0) > 1e-9 * (1.0 + abs(self.a) ** 2 + abs(self.b) ** 2):
            raise ValueError(f"matrix determinant {det!r} too far from 1")

    @property
    def rapidity(self) -> float:
        """alpha = asinh|b|; |a| = cosh(alpha), |b| = sinh(alpha)."""
        return math.asinh(abs(self.b))

    @property
    def velocity_amplitude(self) -> float:
        """Peak mirror velocity tanh(alpha), always < 1."""
        return math.tanh(self.rapidity)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [np.conj(self.b), np.conj(self.a)]])

    def apply(self, u):
        """Evaluate h(u) on the continuous branch.

        h(u) - u = (2/Omega) * arg(a + b exp(-i Omega u)) is continuous and
        periodic because |b/a| < 1 keeps the argument inside a half-turn of
        arg(a); no unwrapping step is needed.  The overall branch is fixed
        by the principal argument of a (the map is only defined modulo one
        period of translation).
        """
        u = np.asarray(u, dtype=float)
        phase = np.exp(-1j * self.omega * u)
        # arg(a + b z) = arg(a) + arg(1 + (b/a) z); second term is in
        # (-pi/2, pi/2) since |b/a| = tanh(alpha) < 1.
        shift = np.angle(self.a) + np.angle(1.0 + (self.b / self.a) * phase)
        out = u + 2.0 * shift / self.omega
        return out if out.ndim else float(out)

    def derivative(self, u):
        """h'(u) = 1/|a + b exp(-i Omega u)|^2, bounded by exp(+-2 alpha)."""
        u = np.asarray(u, dtype=float)
        s = self.a + self.b * np.exp(-1j * self.omega * u)
        out = 1.0 / (s.real**2 + s.imag**2)
        return out if out.ndim else float(out)

    def schwarzian(self, u):
        """Schwarzian derivative (Omega^2/2)(1 - h'(u)^2), units 1/time^2."""
        d = self.derivative(u)
        return 0.5 * self.omega**2 * (1.0 - d * d)

    def inverse(self) -> "HomographicMap":
        # [[a, b], [b*, a*]]^-1 = [[a*, -b], [-b*, a]] at unit determinant
        return HomographicMap(np.conj(self.a), -self.b, self.omega)


def identity_map(omega: float) -> HomographicMap:
    return HomographicMap(1.0 + 0.0j, 0.0j, omega)


def compose(h: HomographicMap, g: HomographicMap) -> HomographicMap:
    """Map of h∘g, i.e. matrix product A(h).A(g).

    The determinant is renormalized when rounding drift exceeds 1e-12 so
    that chains of hundreds of round trips stay on the unit-determinant
    manifold.
    """
    if h.omega != g.omega:
        raise FrequencyMismatchError(
            f"cannot compose maps with omega {h.omega} and {g.omega}"
        )
    a = h.a * g.a + h.b * np.conj(g.b)
    b = h.a * g.b + h.b * np.conj(g.a)
    det = abs(a) ** 2 - abs(b) ** 2
    if abs(det - 1.0) > _DET_TOL:
        scale = cmath.sqrt(det)
        a /= scale
        b /= scale
    return HomographicMap(a, b, h.omega)


def mirror_matrices(K: int, alpha: float, omega: float = 1.0):
    """Maps (h, g) of the two cavity mirrors oscillating on resonance.

    K is the resonance order (Omega*L = K*pi); even K is a breathing mode,
    odd K a global translation mode.  The phase factors (-i)^K etc. place
    the mirrors at -L/2 and +L/2 with the relative oscillation phases of
    the resonant motion.
    """
    if K < 1 or K != int(K):
        raise ValueError(f"K must be a positive integer, got {K}")
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    ch, sh = math.cosh(alpha), math.sinh(alpha)
    ik = 1j**K
    mik = (-1j) ** K
    h = HomographicMap(mik * ch, 1j * ik * sh, omega)
    g = HomographicMap(ik * ch, -1j * mik * sh, omega)
    return h, g
