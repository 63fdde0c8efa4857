"""Exception types shared across the package."""


class TomostatError(Exception):
    """Base class for tomostat-specific failures."""


class QuadratureNonconvergence(TomostatError):
    """A numerical integral failed to settle within its tolerance."""


class DivergentKernel(TomostatError):
    """Radial kernel does not decay fast enough to be integrable."""


class NonintegrableOperator(TomostatError):
    """Operator characteristic function does not decay; the integral is undefined."""


class InsufficientRange(TomostatError):
    """Requested points fall outside a tabulated grid."""


class InsufficientSamples(TomostatError):
    """Too few samples for the requested statistic."""


class ConfigError(TomostatError):
    """Invalid run configuration."""
