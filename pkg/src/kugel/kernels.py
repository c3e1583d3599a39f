"""Fundamental solutions and exact test solutions in R^3 (plane waves also in R^2).

    laplace     1/|x-y|
    yukawa      exp(-+mu |x-y|)/|x-y|        (branch minus: decaying, plus: growing)
    helmholtz   exp(+-i lam |x-y|)/|x-y|     (branch minus: incoming, plus: outgoing)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError, PoleError
from .specfun import radial_profile

KINDS = ("laplace", "yukawa", "helmholtz")
BRANCHES = ("minus", "plus")


@dataclass(frozen=True)
class EquationSpec:
    kind: str
    parameter: Optional[float] = None
    branch: str = "minus"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"equation kind must be one of {KINDS}, got {self.kind!r}")
        if self.branch not in BRANCHES:
            raise InvalidInputError(f"branch must be 'minus' or 'plus', got {self.branch!r}")
        if self.kind == "laplace":
            if self.parameter is not None:
                raise InvalidInputError("the Laplace equation takes no parameter")
        elif self.parameter is None or not (math.isfinite(self.parameter) and self.parameter > 0):
            raise InvalidInputError(f"{self.kind} needs a positive parameter, got {self.parameter!r}")

    @property
    def kappa(self) -> float:
        return 0.0 if self.parameter is None else float(self.parameter)

    @property
    def coeff_kind(self) -> str:
        """Mean-value coefficient family: 'plus' (I_nu) or 'minus' (J_nu)."""
        if self.kind == "laplace":
            raise InvalidInputError("the Laplace equation has no mean-value coefficient family")
        return "plus" if self.kind == "yukawa" else "minus"

    def with_branch(self, branch: str) -> "EquationSpec":
        return EquationSpec(self.kind, self.parameter, branch)

    def to_json(self) -> dict:
        return {"kind": self.kind, "parameter": self.parameter, "branch": self.branch}


def kernel_of_distance(spec: EquationSpec, d: np.ndarray) -> np.ndarray:
    """Fundamental solution as a function of the distance d > 0."""
    d = np.asarray(d, dtype=float)
    if spec.kind == "laplace":
        return 1.0 / d
    sign = 1.0 if spec.branch == "plus" else -1.0
    if spec.kind == "yukawa":
        return np.exp(sign * spec.kappa * d) / d
    return np.exp(1j * sign * spec.kappa * d) / d


def _distances(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != 3 or y.shape[-1] != 3:
        raise InvalidInputError("fundamental solutions are implemented in R^3 only")
    d = np.linalg.norm(y - x, axis=-1)
    if np.any(d == 0.0):
        raise PoleError("fundamental solution evaluated at its pole")
    return d


def fundamental(spec: EquationSpec, x, y):
    """E(x, y) for the given equation and branch; ``y`` may be an (N, 3) array."""
    out = kernel_of_distance(spec, _distances(x, y)).astype(complex)
    return complex(out) if out.ndim == 0 else out


def radial_solution(spec: EquationSpec, center, y):
    """sinh(mu s)/(mu s) (yukawa) or sin(lam s)/(lam s) (helmholtz), s = |y - center|."""
    center = np.asarray(center, dtype=float)
    s = np.linalg.norm(np.asarray(y, dtype=float) - center, axis=-1)
    return radial_profile(spec.coeff_kind, spec.kappa * s)


def plane_solution(spec: EquationSpec, direction, y):
    """exp(mu <d, y>) (yukawa) or exp(i lam <d, y>) (helmholtz) for a unit vector d."""
    direction = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
        raise InvalidInputError(f"direction {direction.tolist()} is not a unit vector")
    phase = np.asarray(y, dtype=float) @ direction
    if spec.kind == "yukawa":
        out = np.exp(spec.kappa * phase).astype(complex)
    elif spec.kind == "helmholtz":
        out = np.exp(1j * spec.kappa * phase)
    else:
        raise InvalidInputError("plane solutions exist for yukawa and helmholtz only")
    return complex(out) if out.ndim == 0 else out


def branch_combination(kind: str, kappa: float, x, y):
    """(E_plus - E_minus)/(2 mu) for yukawa, (E_plus - E_minus)/(2 i lam) for
    helmholtz; both reduce to the real radial solution centred at x."""
    plus = fundamental(EquationSpec(kind, kappa, "plus"), x, y)
    minus = fundamental(EquationSpec(kind, kappa, "minus"), x, y)
    if kind == "yukawa":
        out = np.real((np.asarray(plus) - np.asarray(minus)) / (2.0 * kappa))
    elif kind == "helmholtz":
        out = np.real((np.asarray(plus) - np.asarray(minus)) / (2j * kappa))
    else:
        raise InvalidInputError("branch combinations exist for yukawa and helmholtz only")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PointSource:
    """y -> E(y, pole) as an integrand; carries its pole for admissibility checks."""

    spec: EquationSpec
    pole: tuple

    def __call__(self, y):
        return fundamental(self.spec, self.pole, y)
