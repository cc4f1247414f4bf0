"""Exception hierarchy shared by all modules.

Divergence guards are split in two: the energy density blows up first
(effective rapidity reaching 1), the period-integrated energy only later
(rapidity reaching the loss parameter).  The two regimes are reported with
distinct exception types so callers and the CLI can tell them apart.
"""


class CavradError(Exception):
    """Base class for all library errors."""


class FrequencyMismatchError(CavradError, ValueError):
    """Two maps with different mechanical frequencies were combined."""


class RootBracketError(CavradError, ValueError):
    """The trajectory root finder could not bracket a solution.

    In practice this means the supplied world line is not timelike
    (velocity bound >= 1) or the position callable is inconsistent with
    its declared bound.
    """


class DensityDivergenceError(CavradError, ValueError):
    """Energy density diverges: effective rapidity at or above threshold.

    Raised when 2*alpha/rho >= 1, equivalently r*exp(4*alpha) >= 1.  The
    effective reduced velocity saturates at tanh(1) ~ 0.7616 just below
    this point.
    """


class EnergyDivergenceError(CavradError, ValueError):
    """Integrated radiated energy diverges: alpha >= rho."""


class SeriesConvergenceError(CavradError, RuntimeError):
    """A series did not converge within the configured term budget."""
