"""Error taxonomy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1,
feasibility or boundedness guard trips exit 2, numerical failures exit 3.
"""


class ExtrusimError(Exception):
    """Base class for all package errors."""


class ParameterError(ExtrusimError, ValueError):
    """A physical parameter or option is out of its admissible range."""


class DomainError(ExtrusimError, ValueError):
    """A state or input left the domain where the model is defined."""


class ConfigError(ExtrusimError, ValueError):
    """A config file or run configuration is malformed or inconsistent."""


class NoPositiveRootError(ExtrusimError, ValueError):
    """The commanded slope admits no positive controller gain."""


class SolverFailure(ExtrusimError, RuntimeError):
    """A root bracket could not be established within the search budget."""


class FeasibilityViolation(ExtrusimError, RuntimeError):
    """The delay rate reached unity along a predicted trajectory."""


class BoundednessError(ExtrusimError, RuntimeError):
    """The estimated-delay predictor's growth-factor guard failed."""


class SingularityError(ExtrusimError, RuntimeError):
    """The filling ratio at the interface reached the fully filled limit."""


class DesignAssumptionWarning(UserWarning):
    """A derived quantity violates an assumption of the controller design."""
