"""Exception hierarchy shared by the library and the CLI exit-code mapping."""
from __future__ import annotations

import numpy as np


class SpreadwaveError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class InvalidInputError(SpreadwaveError, ValueError):
    """Argument outside the documented domain (non-positive rate, bad shape...)."""

    exit_code = 3


class SpectralGapError(SpreadwaveError, ArithmeticError):
    """Principal eigenpair not found, or its eigenvector is not strictly positive.

    The last iterate is kept on ``self.iterate`` for inspection.
    """

    def __init__(self, message: str, iterate=None, psi: float | None = None):
        super().__init__(message)
        self.iterate = None if iterate is None else np.asarray(iterate, dtype=float)
        self.psi = psi


class HypothesisViolation(SpreadwaveError):
    """A structural assumption on the model fails (e.g. non-positive principal eigenvalue)."""


class OutOfRangeError(SpreadwaveError, ValueError):
    """Requested wave speed is not above the minimal speed."""

    def __init__(self, message: str, c_star: float):
        super().__init__(message)
        self.c_star = c_star


class ConfigurationError(SpreadwaveError):
    """Solver constants (beta, gamma, q...) could not be chosen."""


class ResolutionError(SpreadwaveError, ValueError):
    """Grid too coarse for the exponential kernels."""

    exit_code = 3


class DomainError(SpreadwaveError, ValueError):
    """Simulation domain too small for the requested observation window."""

    exit_code = 3


class InternalConsistencyError(SpreadwaveError):
    """An invariant the algorithm guarantees was observed to fail."""

    exit_code = 2


class ConvergenceError(SpreadwaveError):
    exit_code = 2


class InvarianceAlarm(SpreadwaveError):
    """A PDE trajectory left the invariant box or produced NaN."""

    exit_code = 2

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class ConfigError(SpreadwaveError, ValueError):
    """Malformed configuration file; ``line`` is 1-based when known."""

    exit_code = 3

    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line
