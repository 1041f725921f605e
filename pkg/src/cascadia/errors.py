"""Exception types shared across solvers."""


class CascadiaError(Exception):
    """Base class for all package-specific errors."""


class NumericalInstability(CascadiaError):
    """Integration produced NaN/Inf state — parameters are outside the
    stable regime of the chosen solver, or tolerances are too loose."""


class NonConvergence(CascadiaError):
    """A steady state was not reached within the time/iteration budget.

    ``site`` is set when a site-sequential solve can pinpoint the first
    emitter whose equations failed to settle.
    """

    def __init__(self, message: str, site: int | None = None):
        super().__init__(message)
        self.site = site


class NoPhysicalRoot(CascadiaError):
    """Root finding produced no admissible solution (e.g. all candidate
    saturation roots negative or complex)."""


class DimensionCap(CascadiaError):
    """Requested system size exceeds a hard solver limit (exact solver
    Hilbert-space cap, cumulant pair-state cap)."""
