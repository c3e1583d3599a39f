"""Recover the ball by minimizing the kugel residual over star-domain shapes.

The volume is held fixed by rescaling rho0, so the equal-volume radius and
hence the coefficient a_3(kappa r) stay constant; the center x0 is fixed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError, ProbeTooCloseError
from .geometry import (
    POSITIVITY_FLOOR,
    StarDomain,
    basis_matrix,
    dense_directions,
    rescale_to_volume,
    size_condition,
    star_volume,
    unit_ball_volume,
)
from .identities import ProbeSet, kugel_coefficient, probe_refine, residual_matrix
from .kernels import EquationSpec
from .quadrature import QuadratureSpec

PENALTY = 1e6
RECOVERY_QUADRATURE = QuadratureSpec(n_radial=12, n_polar=12, n_azimuth=24)


class SizeConditionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class RecoveryConfig:
    equation: EquationSpec
    volume_target: float
    probes: Optional[ProbeSet] = None
    objective: str = "rms"
    max_iterations: int = 2000
    initial_step: float = 0.05
    convergence_spread: float = 1e-12
    quadrature: QuadratureSpec = RECOVERY_QUADRATURE
    n_probes: int = 20
    probe_factor: float = 2.0
    error_check_every: int = 25
    restart_every: int = 300

    def __post_init__(self):
        if not self.volume_target > 0:
            raise InvalidInputError("volume_target must be positive")
        if not self.convergence_spread > 0:
            raise InvalidInputError("convergence_spread must be positive")
        if self.objective not in ("rms", "sup"):
            raise InvalidInputError(f"objective must be 'rms' or 'sup', got {self.objective!r}")
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be positive")

    def equations(self) -> List[EquationSpec]:
        if self.equation.kind == "laplace":
            return [self.equation]
        return [self.equation.with_branch("minus"), self.equation.with_branch("plus")]

    def with_probes_for(self, domain: StarDomain) -> "RecoveryConfig":
        """Fill in Fibonacci probes around ``domain`` if none were given."""
        if self.probes is not None:
            return self
        scaled = rescale_to_volume(domain, self.volume_target, self.quadrature)
        return replace(self, probes=ProbeSet.fibonacci(scaled, self.n_probes, self.probe_factor))


@dataclass
class RecoveryTrace:
    iterations: List[Tuple[float, List[float]]]
    final_domain: StarDomain
    final_objective: float
    converged: bool
    quadrature_error: float = 0.0
    evaluations: int = 0

    def to_json(self) -> dict:
        return {
            "iterations": [{"obj": v, "coeffs": list(c)} for v, c in self.iterations],
            "final_domain": self.final_domain.to_json(),
            "final_objective": self.final_objective,
            "converged": self.converged,
            "quad_err": self.quadrature_error,
            "evaluations": self.evaluations,
        }


def _feasible(dim: int, vector: np.ndarray) -> Tuple[np.ndarray, float]:
    """Shrink ``vector`` toward zero until the profile clears the floor;
    return it with the amount by which the floor was violated."""
    low = 1.0 + float((basis_matrix(dim, dense_directions(dim)) @ vector).min())
    if low >= POSITIVITY_FLOOR * (1 + 1e-9):
        return vector, 0.0
    g = low - 1.0
    alpha = (1.0 - POSITIVITY_FLOOR * (1 + 1e-6)) / -g
    return alpha * vector, POSITIVITY_FLOOR - low


def domain_for(config: RecoveryConfig, vector: Sequence[float], center=(0.0, 0.0, 0.0),
               q: Optional[QuadratureSpec] = None) -> StarDomain:
    """StarDomain with the given shape coefficients and the target volume."""
    base = StarDomain.from_vector(3, center, 1.0, vector)
    return rescale_to_volume(base, config.volume_target, q or config.quadrature)


def _norm(config: RecoveryConfig, residuals: np.ndarray) -> float:
    mags = np.abs(residuals)
    if config.objective == "sup":
        return float(mags.max(axis=1).sum())
    return float(np.sqrt(np.mean(mags**2, axis=1)).sum())


def _residuals(config: RecoveryConfig, coefficients, center, q):
    """Residual matrix (branches x probes) and floor violation, or ``None``
    when a probe is too close to the shape."""
    vector, violation = _feasible(3, np.asarray(coefficients, dtype=float))
    domain = domain_for(config, vector, center, q)
    r = (config.volume_target / unit_ball_volume(3)) ** (1.0 / 3.0)
    specs = config.equations()
    pts = config.probes.array()
    try:
        refine = probe_refine(domain, pts, r, q)
    except ProbeTooCloseError:
        return None, violation
    res = residual_matrix(specs, domain, pts, refine, q, star_volume(domain, q),
                          [kugel_coefficient(s, r) for s in specs])
    return res, violation


def objective(config: RecoveryConfig, coefficients: Sequence[float], center=(0.0, 0.0, 0.0),
              q: Optional[QuadratureSpec] = None) -> float:
    """Residual norm, summed over both branches, of the shape with the given
    coefficients at the target volume.

    Profiles below the positivity floor are pulled back to it and charged
    1e6 times the violation.
    """
    if config.probes is None:
        raise InvalidInputError("objective needs a probe set; see RecoveryConfig.with_probes_for")
    res, violation = _residuals(config, coefficients, center, q or config.quadrature)
    if res is None:
        return PENALTY * (1.0 + violation)
    return _norm(config, res) + PENALTY * violation


def objective_error(config: RecoveryConfig, coefficients: Sequence[float],
                    center=(0.0, 0.0, 0.0)) -> float:
    """Quadrature error of the objective: the norm of the change in the
    residuals under doubled orders."""
    if config.probes is None:
        raise InvalidInputError("objective needs a probe set; see RecoveryConfig.with_probes_for")
    res, _ = _residuals(config, coefficients, center, config.quadrature)
    res2, _ = _residuals(config, coefficients, center, config.quadrature.doubled(3))
    if res is None or res2 is None:
        return math.inf
    return _norm(config, res2 - res)


def nelder_mead(fun: Callable[[np.ndarray], float], x0: Sequence[float], step: float,
                max_iterations: int, spread: float,
                stop: Optional[Callable[[int, float, np.ndarray], bool]] = None):
    """Downhill simplex with dimension-adapted coefficients.

    Returns ``(best_x, best_f, trace, converged, evaluations, diameter)``;
    ``trace`` holds the best point after every iteration (iteration 0 is the
    start) and ``diameter`` is the final largest vertex offset from the best.
    """
    x0 = np.asarray(x0, dtype=float)
    n = len(x0)
    alpha, beta = 1.0, 1.0 + 2.0 / n
    gamma, delta = 0.75 - 1.0 / (2.0 * n), 1.0 - 1.0 / n
    simplex = np.vstack([x0] + [x0 + step * e for e in np.eye(n)])
    fvals = np.array([fun(x) for x in simplex])
    evals = n + 1
    trace = []
    converged = False
    for it in range(max_iterations + 1):
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        trace.append((float(fvals[0]), simplex[0].tolist()))
        if fvals[-1] - fvals[0] < spread or (stop is not None and stop(it, fvals[0], simplex[0])):
            converged = True
            break
        if it == max_iterations:
            break
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + alpha * (centroid - worst)
        fr = fun(xr)
        evals += 1
        if fr < fvals[0]:
            xe = centroid + beta * (xr - centroid)
            fe = fun(xe)
            evals += 1
            simplex[-1], fvals[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + gamma * (xr - centroid)
                accept = lambda fc: fc <= fr
            else:
                xc = centroid + gamma * (worst - centroid)
                accept = lambda fc: fc < fvals[-1]
            fc = fun(xc)
            evals += 1
            if accept(fc):
                simplex[-1], fvals[-1] = xc, fc
            else:
                simplex[1:] = simplex[0] + delta * (simplex[1:] - simplex[0])
                fvals[1:] = [fun(x) for x in simplex[1:]]
                evals += n
    diameter = float(np.abs(simplex[1:] - simplex[0]).max())
    return simplex[0], float(fvals[0]), trace, converged, evals, diameter


def recover_shape(initial: StarDomain, config: RecoveryConfig) -> RecoveryTrace:
    """Minimize the residual objective starting from ``initial``'s coefficients.

    The simplex is restarted around the best point every
    ``config.restart_every`` iterations.  Stops when the objective spread falls below
    ``config.convergence_spread`` or the best objective drops under ten times
    its quadrature error (the change under doubled orders, re-estimated every
    ``config.error_check_every`` iterations).
    """
    if initial.dim != 3:
        raise InvalidInputError("shape recovery is implemented for dim = 3")
    config = config.with_probes_for(initial)
    if config.equation.kind == "helmholtz":
        scaled = rescale_to_volume(initial, config.volume_target, config.quadrature)
        check = size_condition(scaled, config.equation.kappa)
        if not check.satisfied:
            warnings.warn(
                f"initial domain violates the size condition "
                f"({check.max_scaled_radius:.6g} > {check.threshold:.6g}); proceeding",
                SizeConditionWarning,
                stacklevel=2,
            )
    center = initial.center
    state = {"err": 0.0}

    def fun(x):
        return objective(config, x, center)

    def stop(it, fbest, xbest):
        if it % config.error_check_every:
            return False
        state["err"] = objective_error(config, xbest, center)
        return fbest < 10.0 * state["err"]

    # a fresh axis-aligned simplex around the best point every restart_every
    # iterations, sized by the largest move since the last restart
    x, step = initial.vector(), config.initial_step
    trace, evals, converged, done = [], 0, False, 0
    while True:
        budget = min(config.restart_every, config.max_iterations - done)
        best_x, best_f, segment, converged, n_evals, diameter = nelder_mead(
            fun, x, step, budget, config.convergence_spread,
            lambda it, fb, xb: stop(done + it, fb, xb),
        )
        trace.extend(segment if not trace else segment[1:])
        evals += n_evals
        done += len(segment) - 1
        if converged or done >= config.max_iterations:
            break
        # the fresh simplex is never smaller than the one it replaces
        step = max(float(np.abs(best_x - x).max()), diameter)
        x = best_x
    best_x, _ = _feasible(3, best_x)
    final = domain_for(config, best_x, center)
    error = objective_error(config, best_x, center)
    return RecoveryTrace(trace, final, best_f, converged, error, evals)
