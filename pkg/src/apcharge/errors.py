"""Exception hierarchy.

``NumericalError`` subclasses signal that a limit, quadrature or period
detection could not be certified; the CLI maps them to exit code 3.
"""


class ApChargeError(Exception):
    """Base class for all package errors."""


class InvalidParameter(ApChargeError, ValueError):
    pass


class UnknownFormat(ApChargeError, ValueError):
    pass


class AmbiguousFrequency(ApChargeError, ValueError):
    pass


class NumericalError(ApChargeError):
    """A contract on convergence or resolution failed."""


class HorizonTooSmall(NumericalError):
    pass


class NotCauchy(NumericalError):
    pass


class NotCauchyL1(NotCauchy):
    pass


class NotCauchyLp(NotCauchy):
    pass


class NotCauchyLorentz(NotCauchy):
    pass


class TailNotConvergent(NumericalError):
    pass


class TruncationBoundExceedsTol(NumericalError):
    pass


class IncommensurablePeriods(NumericalError):
    pass


class IncommensurableUnsupported(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class NotConverging(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    pass
