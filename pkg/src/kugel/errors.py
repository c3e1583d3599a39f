"""Exception hierarchy shared by all modules."""


class KugelError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(KugelError, ValueError):
    pass


class RangeError(KugelError, ValueError):
    """Argument outside the supported evaluation range."""


class NumericalFailure(KugelError, ArithmeticError):
    """A numerical procedure could not produce a trustworthy value."""


class PoleError(KugelError, ValueError):
    """A kernel was evaluated at its singular point."""


class AdmissibilityError(KugelError, ValueError):
    """A test function's pole lies in the closure of the averaging ball."""


class ProbeTooCloseError(KugelError, ValueError):
    """An exterior probe is inside the domain or too close to its boundary."""
