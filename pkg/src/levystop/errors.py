"""Exception types raised across the package."""


class LevyStopError(Exception):
    """Base class for all package-specific errors."""


class InvalidSubgenerator(LevyStopError):
    """Phase-type subgenerator matrix fails its structural requirements."""


class InvalidInitialDistribution(LevyStopError):
    """Initial phase distribution is not a probability vector."""


class UnsupportedModel(LevyStopError):
    """Model parameters outside the supported regime (e.g. sigma = 0)."""


class SingularResolvent(LevyStopError):
    """(sI - T) not invertible where the evaluation requires it."""


class ConvergenceFailure(LevyStopError):
    """Iterative root search failed to converge to tolerance."""


class RootMultiplicity(LevyStopError):
    """Characteristic roots closer than the separation tolerance."""


class ImaginaryResidual(LevyStopError):
    """A quantity that must be real carries too large an imaginary part."""


class DomainError(LevyStopError):
    """Argument outside the mathematical domain of the operation."""


class RangeError(LevyStopError):
    """Evaluation point beyond the numerically safe overflow range."""


class DegenerateExponent(LevyStopError):
    """Exponent collision makes the requested closed form singular."""


class InfeasibleThresholds(LevyStopError):
    """Per-stage thresholds violate the nonincreasing ordering."""


class QuadratureFailure(LevyStopError):
    """Numerical integration did not reach its accuracy target."""
