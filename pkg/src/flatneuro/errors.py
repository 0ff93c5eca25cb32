"""Exception hierarchy shared by all modules."""


class FlatneuroError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(FlatneuroError, ValueError):
    """A parameter or option violates its declared invariant."""


class DomainError(FlatneuroError, ValueError):
    """An argument lies outside the domain of a function (e.g. a sigmoid inverse).

    ``channel`` names the equation or signal that failed, when known.
    """

    def __init__(self, message, channel=None, time=None):
        super().__init__(message)
        self.channel = channel
        self.time = time


class UnsupportedOperation(FlatneuroError, NotImplementedError):
    """The requested operation is not defined for this family or kind."""


class IntegrationError(FlatneuroError, RuntimeError):
    """Base class for failures raised while integrating an ODE."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class StiffnessError(IntegrationError):
    """The adaptive step size collapsed below the underflow threshold."""


class DivergenceError(IntegrationError):
    """The vector field or the state became non-finite (or escaped a bound)."""


class SingularityError(FlatneuroError, RuntimeError):
    """A matrix that must be inverted is (numerically) singular."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class SaturationError(FlatneuroError, RuntimeError):
    """A sigmoid slope vanished, so the control has no authority left."""


class ReachabilityError(FlatneuroError, ValueError):
    """An end-effector target lies outside the reachable annulus."""


class AmbiguityError(FlatneuroError, ValueError):
    """Inverse kinematics has infinitely many solutions for this target."""


class NumericalError(FlatneuroError, RuntimeError):
    """A numerical routine (quadrature, refinement study) did not converge."""
