"""Exception types raised by qrenyi."""


class QrenyiError(Exception):
    """Base class for library errors."""


class NumericalFailure(QrenyiError, ArithmeticError):
    """An iterative routine did not converge within its cap."""


class InvalidAlpha(QrenyiError, ValueError):
    """The order parameter lies outside the domain of the requested quantity."""


class SupportMismatch(QrenyiError, ValueError):
    """The supports of the two operators do not satisfy a required relation."""


class DimensionMismatch(QrenyiError, ValueError):
    pass


class NotPositiveSemidefinite(QrenyiError, ValueError):
    pass


class NotNormalized(QrenyiError, ValueError):
    pass
