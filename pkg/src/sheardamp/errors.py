"""Exception types shared across the package."""


class ShearDampError(Exception):
    """Base class for all package errors."""


class NonMonotone(ShearDampError):
    """Velocity profile violates the monotonicity bounds c < U' < 1/c."""


class InversionFailure(ShearDampError):
    """Root-finding for U^{-1} failed to converge."""


class SingularSystem(ShearDampError):
    """Discrete shifted elliptic operator is (near-)singular; resolution too low for (k, t)."""


class SchemeInstability(ShearDampError):
    """A mode run breached the L2 safety ceiling; the time stepper, not the PDE, is suspect."""


class InsufficientSpan(ShearDampError):
    """Time series does not span enough decades for the requested fit."""


class InsufficientSamples(ShearDampError):
    """Not enough samples inside the fit window."""


class NonPositiveValues(ShearDampError):
    """Power-law fitting requires strictly positive values."""


class InsufficientTimeResolution(ShearDampError):
    """Stored wall-trace series is too coarse for the requested time quadrature."""


class ScheduleMismatch(ShearDampError):
    """Runs in a bundle were not produced on matching grids/snapshot schedules."""


class ConfigError(ShearDampError):
    """Run configuration failed validation."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
