"""Exception and warning types raised by superholo."""


class ConfigurationError(ValueError):
    """Invalid protocol, schedule or run configuration."""


class DomainError(ValueError):
    """A time or parameter argument lies outside the schedule's domain."""


class SingularityError(ArithmeticError):
    """A correction formula hit a division by zero (e.g. vanishing amplitude)."""


class IntegrationDivergedError(RuntimeError):
    """Integrator invariants drifted beyond tolerance; retry with a smaller dt."""


class BoundaryResidualWarning(UserWarning):
    """Dressing angle does not vanish at the protocol endpoints within tolerance."""


class DispersiveValidityWarning(UserWarning):
    """Effective Raman coupling is not small compared with the detuning."""


class LeakageWarning(UserWarning):
    """Population left the computational subspace at the end of a gate."""
