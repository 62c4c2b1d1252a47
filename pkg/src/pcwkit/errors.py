"""Exception types shared across the package."""


class PcwError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(PcwError, ValueError):
    """Invalid physical or numerical parameter."""


class NumericalError(PcwError, RuntimeError):
    """A numerical procedure failed (singular matrix, non-convergence, ...)."""


class NoGapError(PcwError):
    """The bulk band structure has no gap between the requested bands."""


class NoGuidedModeError(PcwError):
    """No localized band inside the gap was found in the supercell bands."""


class OutOfBandError(PcwError, ValueError):
    """Requested frequency lies outside the guided branch."""


class NotCoupledError(PcwError, ValueError):
    """Measured rate does not exceed the uncoupled mean; beta undefined."""


class FitFailureError(PcwError, RuntimeError):
    """Decay fit did not converge or is unusable."""


class EstimationError(PcwError):
    """A campaign-level estimate cannot be formed (e.g. no uncoupled records)."""


class EmptyCampaignError(PcwError):
    """No valid histogram files were found."""
