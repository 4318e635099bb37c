"""Exception types shared across the package."""


class PBergmanError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PBergmanError):
    """Rejected configuration (bad parameters, malformed input files)."""


class UnsupportedDomainError(PBergmanError):
    """Operation requires structure the domain does not carry."""


class DegenerateDomainError(PBergmanError):
    """Rejection sampler gave up: acceptance rate below the trial budget."""


class DivergentIntegralError(PBergmanError):
    """The requested integral does not converge on this domain."""


class PoleEvaluationError(PBergmanError):
    """A Laurent term with negative exponent was evaluated at a coordinate zero."""


class NonInvertibleMapError(PBergmanError):
    """Monomial or linear map is not invertible (as an exact map)."""


class BranchError(PBergmanError):
    """A fractional power has no single-valued Laurent branch for these parameters."""


class NoBasisSupportError(PBergmanError):
    """Every basis element vanishes at the evaluation point."""


class PoleProximityWarning(UserWarning):
    """Monte Carlo integrand has heavy mass spikes; quadrature is more reliable."""
