"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """Invalid scenario or command configuration."""


class NumericalError(RuntimeError):
    """A numerical routine could not produce a trustworthy result."""


class SvdConvergenceError(NumericalError):
    """SVD iteration did not converge."""


class RankDeficientError(NumericalError):
    """Matrix is singular or too ill-conditioned to invert reliably."""
