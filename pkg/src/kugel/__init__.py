"""Mean-value identities and ball characterizations for the Laplace,
Yukawa and Helmholtz equations, checked numerically on star-shaped domains."""

from .errors import (
    AdmissibilityError,
    InvalidInputError,
    KugelError,
    NumericalFailure,
    PoleError,
    ProbeTooCloseError,
    RangeError,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError",
    "InvalidInputError",
    "KugelError",
    "NumericalFailure",
    "PoleError",
    "ProbeTooCloseError",
    "RangeError",
]
