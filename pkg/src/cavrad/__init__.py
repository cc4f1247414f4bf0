"""Vacuum radiation of oscillating mirrors and high-finesse cavities.

Time-resolved emitted energy densities, period-integrated and intracavity
energies, photon-number spectra, and parametric-threshold detection, all
in units hbar = c = 1 (energies in hbar*Omega, densities in hbar*Omega^2,
frequencies as nu = omega/Omega).
"""

from .cavity import (DensitySamples, EnergyReport, SpectrumSamples,
                     approx_energies, balance_check, energy_density_cavity,
                     intracavity_energy, radiated_energy,
                     radiated_energy_from_density, spectrum_cavity)
from .errors import (CavradError, DensityDivergenceError,
                     EnergyDivergenceError, FrequencyMismatchError,
                     RootBracketError, SeriesConvergenceError)
from .homography import HomographicMap, compose, identity_map, mirror_matrices
from .iteration import (CavityConfig, OrbitReport, RayFamily, ThresholdStatus,
                        closed_f, closed_map_matrix, iterate_f,
                        periodic_orbits, threshold_status)
from .quadrature import (GridSpec, PointSplitResult, SpectrumIntegral,
                         integrate_period, integrate_spectrum,
                         point_split_density)
from .single_mirror import (SingleMirrorConfig, energy_density,
                            energy_per_period, sample_density,
                            sample_spectrum, spectrum)
from .specfun import (SeriesControl, digamma, gamma_coeff, gamma_coeff_p,
                      hyper_G, log_gamma, xi, zeta_u)
from .trajectory import MirrorTrajectory, homographic_position

__version__ = "0.1.0"
