"""Mean-value identities and the ball-characterization residuals.

For a star domain D with center x0 and equal-volume radius r, the residual
at an exterior probe x is

    M(E(., x), D) - A * E(x, x0),

with A = 1 for the Newtonian kernel, a_3^+(mu r) for Yukawa and
a_3^-(lam r) for Helmholtz.  It vanishes for every exterior x when D is the
ball B_r(x0), and only then.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import AdmissibilityError, InvalidInputError, ProbeTooCloseError
from .geometry import (
    Ball,
    SizeCheck,
    StarDomain,
    contains_many,
    equal_volume_radius,
    fibonacci_sphere,
    is_admissible,
    size_condition,
    star_volume,
)
from .kernels import EquationSpec, fundamental, radial_solution
from .quadrature import (
    QuadratureSpec,
    integrate_ball,
    integrate_star,
    sphere_mean,
    split_integrals,
    star_nodes,
)
from .specfun import coeff

PROBE_MARGIN = 1e-3
REFINE_DISTANCE = 0.25
DEFAULT_PROBES = 50
DEFAULT_PROBE_FACTOR = 2.0


def volume_mean(f: Callable, domain: StarDomain, q: QuadratureSpec = QuadratureSpec()) -> complex:
    """M(f, D) = |D|^{-1} * integral of f over D."""
    return integrate_star(f, domain, q).value / star_volume(domain, q)


def _ball_coefficient(spec: EquationSpec, m: int, radius: float) -> float:
    if spec.kind == "laplace":
        return 1.0
    return coeff(spec.coeff_kind, m, spec.kappa * radius)


def _check_pole(u, ball: Ball) -> None:
    pole = getattr(u, "pole", None)
    if pole is not None and not is_admissible(ball, pole):
        raise AdmissibilityError(
            f"pole {list(pole)} lies in the closed ball of radius {ball.radius} "
            f"about {list(ball.center)}"
        )


def mv_check(spec: EquationSpec, u: Callable, ball: Ball, q: QuadratureSpec = QuadratureSpec()) -> complex:
    """M(u, B) - a_m(kappa r) u(center); zero for solutions u near the closed ball."""
    _check_pole(u, ball)
    mean = integrate_ball(u, ball, q).value / ball.volume()
    center_value = complex(np.asarray(u(np.asarray(ball.center)[None, :])).reshape(-1)[0])
    return mean - _ball_coefficient(spec, ball.dim, ball.radius) * center_value


def sphere_mv_check(spec: EquationSpec, u: Callable, center, r: float,
                    q: QuadratureSpec = QuadratureSpec()) -> complex:
    """Sphere (circle) mean of u minus the coefficient times its center value.

    The coefficient is sinh(t)/t or sin(t)/t on spheres in R^3 and I_0(t) or
    J_0(t) on circles in R^2, t = kappa r.
    """
    center = np.asarray(center, dtype=float)
    _check_pole(u, Ball(tuple(center), r))
    m = len(center)
    a = 1.0 if spec.kind == "laplace" else coeff(spec.coeff_kind, m - 2, spec.kappa * r)
    center_value = complex(np.asarray(u(center[None, :])).reshape(-1)[0])
    return sphere_mean(u, center, r, q).value - a * center_value


def kugel_coefficient(spec: EquationSpec, r: float) -> float:
    """A in M(E(., x), D) = A E(x, x0)."""
    return _ball_coefficient(spec, 3, r)


def probe_refine(domain: StarDomain, pts: np.ndarray, r: float, q: QuadratureSpec) -> np.ndarray:
    """Validate exterior probes; return which of them need the refined radial rule."""
    refine = np.zeros(len(pts), dtype=bool)
    inside = contains_many(domain, pts)
    # D lies in the ball of radius max_extent about x0, which bounds the distance from below
    lower = np.linalg.norm(pts - np.asarray(domain.center), axis=1) - domain.max_extent()
    boundary = None
    for i, x in enumerate(pts):
        if inside[i]:
            raise ProbeTooCloseError(f"probe {x.tolist()} lies inside the domain")
        if lower[i] >= REFINE_DISTANCE * r:
            continue
        if boundary is None:
            boundary = domain.boundary_sample()
        diff = boundary - x
        dist = float(np.sqrt(np.min(np.einsum("ij,ij->i", diff, diff))))
        if dist < PROBE_MARGIN * r:
            raise ProbeTooCloseError(
                f"probe {x.tolist()} is {dist:.3g} from the boundary, closer than {PROBE_MARGIN}*r"
            )
        refine[i] = q.refine_near_boundary and dist < REFINE_DISTANCE * r
    return refine


_CHUNK = 2_000_000


def _branch_means(spec, d, wd):
    if spec.kind == "laplace":
        return wd.sum(axis=1)
    sign = 1.0 if spec.branch == "plus" else -1.0
    if spec.kind == "yukawa":
        return (np.exp(sign * spec.kappa * d) * wd).sum(axis=1)
    # cos/sin on shared nodes keeps the two branches exact conjugates
    kd = spec.kappa * d
    return (np.cos(kd) * wd).sum(axis=1) + 1j * sign * (np.sin(kd) * wd).sum(axis=1)


def residual_matrix(specs, domain, pts, refine, q, volume, coeffs) -> np.ndarray:
    """Kugel residuals for several equations at many probes, shape
    ``(len(specs), len(pts))``; distances to the nodes are shared."""
    out = np.empty((len(specs), len(pts)), dtype=complex)
    center = np.asarray(domain.center)
    for flag in (False, True):
        idx = np.flatnonzero(refine == flag)
        if not len(idx):
            continue
        points, weights = star_nodes(domain, q, bool(flag))
        step = max(1, _CHUNK // len(points))
        for start in range(0, len(idx), step):
            sel = idx[start:start + step]
            d2 = np.zeros((len(sel), len(points)))
            for axis in range(points.shape[1]):
                delta = points[None, :, axis] - pts[sel][:, axis, None]
                d2 += delta * delta
            d = np.sqrt(d2)
            wd = weights[None, :] / d
            for row, (spec, a) in enumerate(zip(specs, coeffs)):
                point_values = np.atleast_1d(fundamental(spec, center, pts[sel]))
                out[row, sel] = _branch_means(spec, d, wd) / volume - a * point_values
    return out


def _residuals(spec, domain, pts, refine, q, volume, a) -> np.ndarray:
    return residual_matrix([spec], domain, pts, refine, q, volume, [a])[0]


def _check_dim(spec: EquationSpec, domain: StarDomain) -> None:
    if domain.dim != 3:
        raise InvalidInputError("kugel residuals are defined for three-dimensional domains")


def kugel_residual(spec: EquationSpec, domain: StarDomain, x, q: QuadratureSpec = QuadratureSpec()) -> complex:
    """Residual of the ball identity for the fundamental solution with pole at
    the exterior point ``x``."""
    _check_dim(spec, domain)
    x = np.asarray(x, dtype=float)
    r = equal_volume_radius(domain, q)
    pts = x[None, :]
    refine = probe_refine(domain, pts, r, q)
    return complex(_residuals(spec, domain, pts, refine, q, star_volume(domain, q),
                              kugel_coefficient(spec, r))[0])


@dataclass(frozen=True)
class ProbeSet:
    points: Tuple[Tuple[float, ...], ...]
    generation: str = "explicit"
    radius_factor: Optional[float] = None

    @classmethod
    def fibonacci(cls, domain: StarDomain, n: int = DEFAULT_PROBES,
                  radius_factor: float = DEFAULT_PROBE_FACTOR) -> "ProbeSet":
        """``n`` Fibonacci-sphere points at radius_factor times the maximal
        radial extent of the domain."""
        if domain.dim != 3:
            raise InvalidInputError("Fibonacci probes are generated on S^2 only")
        if not radius_factor >= 1.5:
            raise InvalidInputError(f"probe radius factor must be >= 1.5, got {radius_factor!r}")
        if n < 1:
            raise InvalidInputError("at least one probe is required")
        pts = np.asarray(domain.center) + radius_factor * domain.max_extent() * fibonacci_sphere(n)
        return cls(tuple(map(tuple, pts.tolist())), "fibonacci_sphere", float(radius_factor))

    @classmethod
    def explicit(cls, points: Sequence[Sequence[float]]) -> "ProbeSet":
        pts = tuple(tuple(float(c) for c in p) for p in points)
        if not pts:
            raise InvalidInputError("at least one probe is required")
        return cls(pts, "explicit", None)

    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


@dataclass
class ResidualReport:
    equation: EquationSpec
    r: float
    coeff_value: float
    per_probe: List[Tuple[Tuple[float, ...], complex]]
    sup_norm: float
    rms: float
    quadrature_error: float
    size_check: Optional[SizeCheck] = None
    relative: List[float] = field(default_factory=list)

    @property
    def sup_relative(self) -> float:
        return max(self.relative) if self.relative else 0.0

    def to_json(self) -> dict:
        return {
            "equation": self.equation.to_json(),
            "r": self.r,
            "coeff": self.coeff_value,
            "probes": [{"x": list(p), "re": v.real, "im": v.imag} for p, v in self.per_probe],
            "sup": self.sup_norm,
            "rms": self.rms,
            "quad_err": self.quadrature_error,
            "size_check": self.size_check.to_json() if self.size_check else None,
            "sup_rel": self.sup_relative,
        }


def residual_scan(spec: EquationSpec, domain: StarDomain, probes: ProbeSet,
                  q: QuadratureSpec = QuadratureSpec()) -> ResidualReport:
    """Kugel residuals at every probe, with norms and (for self-checking
    rules) the largest change under doubled quadrature orders."""
    _check_dim(spec, domain)
    r = equal_volume_radius(domain, q)
    a = kugel_coefficient(spec, r)
    volume = star_volume(domain, q)
    pts = probes.array()
    refine = probe_refine(domain, pts, r, q)
    values = _residuals(spec, domain, pts, refine, q, volume, a)
    quad_err = 0.0
    if q.self_check:
        q2 = q.doubled(3)
        values2 = _residuals(spec, domain, pts, refine, q2, star_volume(domain, q2), a)
        quad_err = float(np.max(np.abs(values2 - values)))
    mags = np.abs(values)
    scale = np.abs(a * np.atleast_1d(fundamental(spec, np.asarray(domain.center), pts)))
    return ResidualReport(
        equation=spec,
        r=r,
        coeff_value=a,
        per_probe=[(p, complex(v)) for p, v in zip(probes.points, values)],
        sup_norm=float(mags.max()),
        rms=float(math.sqrt(np.mean(mags**2))),
        quadrature_error=float(quad_err),
        size_check=size_condition(domain, spec.kappa) if spec.kind == "helmholtz" else None,
        relative=(mags / scale).tolist(),
    )


def _radial_integrand(spec: EquationSpec, domain: StarDomain):
    if spec.kind == "laplace":
        raise InvalidInputError("defect integrals need the yukawa or helmholtz equation")
    center = np.asarray(domain.center)
    return lambda y: radial_solution(spec, center, y)


def scalar_defect(spec: EquationSpec, domain: StarDomain, q: QuadratureSpec = QuadratureSpec()) -> float:
    """integral over D of U - |D| a_3(kappa r), U the radial solution about x0.

    Positive for non-ball domains under Yukawa; negative under Helmholtz when
    the size condition holds.
    """
    _check_dim(spec, domain)
    u = _radial_integrand(spec, domain)
    r = equal_volume_radius(domain, q)
    integral = integrate_star(u, domain, q).value.real
    return integral - star_volume(domain, q) * kugel_coefficient(spec, r)


def proof_defect(spec: EquationSpec, domain: StarDomain,
                 q: QuadratureSpec = QuadratureSpec()) -> Tuple[float, float, float]:
    """(integral of U over D minus B_r, over B_r minus D, their difference)."""
    _check_dim(spec, domain)
    u = _radial_integrand(spec, domain)
    r = equal_volume_radius(domain, q)
    gi, ge = split_integrals(u, domain, r, q)
    return gi.real, ge.real, gi.real - ge.real
