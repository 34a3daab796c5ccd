"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, NumericalError -> 3,
CacheError -> 4.
"""


class CouetteSpectrumError(Exception):
    """Base class for all package errors."""


class ConfigError(CouetteSpectrumError):
    """Invalid configuration, out-of-domain argument, or unsupported geometry."""


class NumericalError(CouetteSpectrumError):
    """A solver failed or produced results outside its contract."""


class EigensolverError(NumericalError):
    """Eigenvalue solve failed or returned no usable candidate."""


class RegimeError(NumericalError):
    """Leading eigenvalue is complex beyond tolerance: outside the
    non-oscillatory regime the theory assumes."""


class BranchTrackingError(NumericalError):
    """Mode continuity along the wavenumber grid broke down."""

    def __init__(self, k, message=""):
        self.k = k
        super().__init__(f"branch tracking failed at k={k}: {message}")


class SingularSolveError(NumericalError):
    """Linear system singular to working precision without a border constraint."""


class StepFailureError(NumericalError):
    """Nonlinear iteration of the implicit time step did not converge."""


class DependencyError(CouetteSpectrumError):
    """A required precomputed quantity (mode, adjoint, table entry) is missing."""


class CacheError(CouetteSpectrumError):
    """Cache file missing, corrupt, or inconsistent with the requested config."""
