class VerificationError(ValueError):
    """Base class for numerical preconditions that do not hold."""


class StructureError(VerificationError):
    """A matrix fails the complex-structure or quaternion identities."""


class NotCommutingError(VerificationError):
    """A map is not complex-linear for the given complex structure."""


class AliasingError(VerificationError):
    """A sampled loop is too coarse to resolve its winding."""


class NotContactError(VerificationError):
    """A pointwise solve met a non-contact configuration."""


class ConventionError(VerificationError):
    """A sign or orientation convention check failed."""


class ConvergenceError(VerificationError):
    """An extrapolated limit did not converge."""


class ConfigError(VerificationError):
    """Invalid suite configuration."""
