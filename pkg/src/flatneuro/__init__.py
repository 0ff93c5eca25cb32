"""Differential-flatness parametrizations, open-loop synthesis and tracking
control for neural mass models and a two-link arm, with a neural-field
kernel catalog.

Submodules: ``sigmoids``, ``integrate``, ``neural_mass``, ``jansen_rit``,
``arm``, ``trajectory``, ``kernels`` and the ``cli`` scenario runner.
"""
from .errors import (AmbiguityError, ConfigurationError, DivergenceError, DomainError,
                     FlatneuroError, IntegrationError, NumericalError, ReachabilityError,
                     SaturationError, SingularityError, StiffnessError, UnsupportedOperation)

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError", "ConfigurationError", "DivergenceError", "DomainError", "FlatneuroError",
    "IntegrationError", "NumericalError", "ReachabilityError", "SaturationError",
    "SingularityError", "StiffnessError", "UnsupportedOperation", "__version__",
]
