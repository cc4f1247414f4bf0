"""Independent numerical oracles used by the test suite.

These deliberately avoid the library's own evaluation paths: the gamma
oracle is a shifted Stirling series, Fourier coefficients come from an
FFT of the dephasing factor, and derivatives come from finite-difference
stencils.
"""

import math

import numpy as np


def stirling_log_gamma(x: float, shift: int = 40) -> float:
    """ln Gamma via the Bernoulli/Stirling series after lifting x above 40."""
    acc = 0.0
    while x < shift:
        acc -= math.log(x)
        x += 1.0
    bern = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
            5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0)
    s = (x - 0.5) * math.log(x) - x + 0.5 * math.log(2.0 * math.pi)
    for j, b in enumerate(bern, start=1):
        s += b / (2 * j * (2 * j - 1) * x ** (2 * j - 1))
    return s + acc


def fourier_dephasing_coeff(m: int, nubar: float, beta: float,
                            points: int = 8192) -> complex:
    """gamma_m of exp(2 i nubar Omega Q(u)) by FFT on the canonical motion."""
    theta = 2.0 * math.pi * np.arange(points) / points
    q = np.arctan2(beta * np.cos(theta), 1.0 + beta * np.sin(theta))
    f = np.exp(2j * nubar * q)
    return complex(np.fft.fft(f)[(-int(m)) % points] / points)


def fd_derivative(f, u: float, step: float) -> float:
    """Fourth-order central first derivative."""
    pts = np.array([-2.0, -1.0, 1.0, 2.0]) * step + u
    v = [float(f(p)) for p in pts]
    return (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * step)


def fd_schwarzian(f, u: float, step: float) -> float:
    """Schwarzian derivative from fourth-order stencils of f', f'', f'''."""
    pts = np.array([-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]) * step + u
    v = [float(f(p)) for p in pts]
    d1 = (v[1] - 8.0 * v[2] + 8.0 * v[4] - v[5]) / (12.0 * step)
    d2 = (-v[1] + 16.0 * v[2] - 30.0 * v[3] + 16.0 * v[4] - v[5]) / (12.0 * step**2)
    d3 = (-v[6] + 8.0 * v[5] - 13.0 * v[4] + 13.0 * v[2] - 8.0 * v[1] + v[0]) / (8.0 * step**3)
    return d3 / d1 - 1.5 * (d2 / d1) ** 2
