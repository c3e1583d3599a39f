"""Deterministic product quadrature over balls, star domains and spheres.

Volume rules are radial Gauss-Legendre (with the s^{m-1} Jacobian) times an
angular rule: Gauss-Legendre in cos(theta) times uniform trapezoid in phi on
S^2, uniform trapezoid on the circle.  Integrands are vectorized callables
``f(points) -> values`` taking an ``(N, m)`` array and returning ``N`` real or
complex values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import TYPE_CHECKING, Callable, Optional, Tuple

import numpy as np

from .errors import InvalidInputError, NumericalFailure

if TYPE_CHECKING:
    from .geometry import Ball, StarDomain

Integrand = Callable[[np.ndarray], np.ndarray]

DEFAULT_AZIMUTH = {2: 256, 3: 96}


@dataclass(frozen=True)
class QuadratureSpec:
    n_radial: int = 48
    n_polar: int = 48
    n_azimuth: Optional[int] = None
    refine_near_boundary: bool = True
    self_check: bool = False

    def __post_init__(self):
        for name in ("n_radial", "n_polar", "n_azimuth"):
            value = getattr(self, name)
            if value is None and name == "n_azimuth":
                continue
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 4:
                raise InvalidInputError(f"quadrature order {name}={value!r} must be an integer >= 4")

    def azimuth(self, dim: int) -> int:
        return self.n_azimuth if self.n_azimuth is not None else DEFAULT_AZIMUTH[dim]

    def doubled(self, dim: int) -> "QuadratureSpec":
        return replace(
            self,
            n_radial=2 * self.n_radial,
            n_polar=2 * self.n_polar,
            n_azimuth=2 * self.azimuth(dim),
            self_check=False,
        )


@dataclass(frozen=True)
class IntegralValue:
    value: complex
    error_estimate: float = 0.0

    @property
    def real(self) -> float:
        return self.value.real


@lru_cache(maxsize=64)
def gauss_legendre_unit(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    nodes, weights = 0.5 * (x + 1.0), 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=64)
def _angular(dim: int, n_polar: int, n_azimuth: int) -> Tuple[np.ndarray, np.ndarray]:
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    if dim == 2:
        dirs = np.column_stack((np.cos(phi), np.sin(phi)))
        weights = np.full(n_azimuth, 2.0 * np.pi / n_azimuth)
    elif dim == 3:
        ct, wt = np.polynomial.legendre.leggauss(n_polar)
        st = np.sqrt(1.0 - ct**2)
        ct_g, phi_g = np.meshgrid(ct, phi, indexing="ij")
        st_g = np.meshgrid(st, phi, indexing="ij")[0]
        dirs = np.column_stack(
            (
                (st_g * np.cos(phi_g)).ravel(),
                (st_g * np.sin(phi_g)).ravel(),
                ct_g.ravel(),
            )
        )
        weights = np.repeat(wt, n_azimuth) * (2.0 * np.pi / n_azimuth)
    else:
        raise InvalidInputError(f"unsupported dimension {dim!r}")
    dirs.setflags(write=False)
    weights.setflags(write=False)
    return dirs, weights


def angular_rule(dim: int, q: QuadratureSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Unit directions ``(N, dim)`` and weights summing to |S^{dim-1}|."""
    return _angular(dim, q.n_polar, q.azimuth(dim))


def _radial_nodes(center, dirs, wang, lo, hi, n_radial, dim, sign=None):
    """Nodes and weights for sum_j wang_j * int_{lo_j}^{hi_j} f(c + s u_j) s^{m-1} ds."""
    x, w = gauss_legendre_unit(n_radial)
    length = hi - lo
    s = lo[:, None] + length[:, None] * x[None, :]
    weights = (wang * length)[:, None] * w[None, :] * s ** (dim - 1)
    if sign is not None:
        weights = weights * sign[:, None]
    points = np.asarray(center, dtype=float)[None, None, :] + s[:, :, None] * dirs[:, None, :]
    return points.reshape(-1, dim), weights.ravel()


@lru_cache(maxsize=32)
def _star_nodes(domain: "StarDomain", n_radial: int, n_polar: int, n_azimuth: int):
    dirs, wang = _angular(domain.dim, n_polar, n_azimuth)
    rho = domain.profile(dirs)
    pts, wts = _radial_nodes(domain.center, dirs, wang, np.zeros_like(rho), rho, n_radial, domain.dim)
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


@lru_cache(maxsize=32)
def _ball_nodes(center: tuple, radius: float, n_radial: int, n_polar: int, n_azimuth: int):
    dim = len(center)
    dirs, wang = _angular(dim, n_polar, n_azimuth)
    rho = np.full(len(wang), float(radius))
    pts, wts = _radial_nodes(center, dirs, wang, np.zeros_like(rho), rho, n_radial, dim)
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def star_nodes(domain: "StarDomain", q: QuadratureSpec, refine: bool = False):
    """Cached ``(points, weights)`` of the volume rule on a star domain.

    ``refine`` doubles the radial order.
    """
    n_radial = 2 * q.n_radial if refine else q.n_radial
    return _star_nodes(domain, n_radial, q.n_polar, q.azimuth(domain.dim))


def ball_nodes(ball: "Ball", q: QuadratureSpec, refine: bool = False):
    n_radial = 2 * q.n_radial if refine else q.n_radial
    dim = len(ball.center)
    return _ball_nodes(tuple(ball.center), float(ball.radius), n_radial, q.n_polar, q.azimuth(dim))


def _apply(f: Integrand, points: np.ndarray, weights: np.ndarray) -> complex:
    values = np.asarray(f(points))
    if values.shape != (len(points),):
        values = np.broadcast_to(values, (len(points),))
    bad = ~np.isfinite(values)
    if bad.any():
        where = points[np.argmax(bad)]
        raise NumericalFailure(f"non-finite integrand value at point {where.tolist()}")
    if np.iscomplexobj(values):
        return complex(np.sum(values.real * weights), np.sum(values.imag * weights))
    return complex(float(np.sum(values * weights)), 0.0)


def integrate_ball(f: Integrand, ball: "Ball", q: QuadratureSpec = QuadratureSpec(),
                   refine: bool = False) -> IntegralValue:
    """Integral of ``f`` over a ball."""
    value = _apply(f, *ball_nodes(ball, q, refine))
    err = 0.0
    if q.self_check:
        dim = len(ball.center)
        err = abs(_apply(f, *ball_nodes(ball, q.doubled(dim), refine)) - value)
    return IntegralValue(value, err)


def integrate_star(f: Integrand, domain: "StarDomain", q: QuadratureSpec = QuadratureSpec(),
                   refine: bool = False) -> IntegralValue:
    """Integral of ``f`` over a star domain, radial rule on [0, rho(u)] per direction."""
    value = _apply(f, *star_nodes(domain, q, refine))
    err = 0.0
    if q.self_check:
        err = abs(_apply(f, *star_nodes(domain, q.doubled(domain.dim), refine)) - value)
    return IntegralValue(value, err)


def sphere_mean(f: Integrand, center, r: float, q: QuadratureSpec = QuadratureSpec()) -> IntegralValue:
    """Average of ``f`` over the sphere (circle) of radius ``r``."""
    center = np.asarray(center, dtype=float)
    dim = len(center)

    def mean(spec):
        dirs, w = angular_rule(dim, spec)
        return _apply(f, center + r * dirs, w / w.sum())

    value = mean(q)
    err = abs(mean(q.doubled(dim)) - value) if q.self_check else 0.0
    return IntegralValue(value, err)


def _split_nodes(domain: "StarDomain", r: float, q: QuadratureSpec):
    dirs, wang = angular_rule(domain.dim, q)
    rho = domain.profile(dirs)
    lo, hi = np.minimum(rho, r), np.maximum(rho, r)
    inner = rho > r
    parts = []
    for mask in (inner, ~inner):
        parts.append(_radial_nodes(domain.center, dirs[mask], wang[mask], lo[mask], hi[mask],
                                   q.n_radial, domain.dim))
    return parts


def split_integrals(f: Integrand, domain: "StarDomain", r: float,
                    q: QuadratureSpec = QuadratureSpec()) -> Tuple[IntegralValue, IntegralValue]:
    """Integrals of ``f`` over D minus the closed ball B_r and over B_r minus
    the closure of D, with B_r centred at the domain's center.

    Along each direction the radial segment between r and rho(u) belongs to
    the first set when rho(u) > r and to the second otherwise.
    """
    if not r > 0:
        raise InvalidInputError(f"split radius must be positive, got {r!r}")

    def both(spec):
        (pi, wi), (pe, we) = _split_nodes(domain, r, spec)
        return _apply(f, pi, wi), _apply(f, pe, we)

    gi, ge = both(q)
    if q.self_check:
        gi2, ge2 = both(q.doubled(domain.dim))
        return IntegralValue(gi, abs(gi2 - gi)), IntegralValue(ge, abs(ge2 - ge))
    return IntegralValue(gi), IntegralValue(ge)
