"""Balls and star-shaped domains.

A :class:`StarDomain` is described by its radial profile over unit
directions u,

    rho(u) = rho0 * (1 + sum_c c * basis_c(u)),

with real orthonormal spherical harmonics of degree 1..3 in 3D and Fourier
modes cos(l theta), sin(l theta), l = 1..4, in 2D.  Coefficients are keyed by
``(l, k)``; in 3D ``k`` is the harmonic order -l..l, in 2D ``k = 1`` selects
cos(l theta) and ``k = -1`` selects sin(l theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError
from .quadrature import QuadratureSpec, angular_rule
from .specfun import bessel_zero_j, gamma_half

MAX_DEGREE = {2: 4, 3: 3}
POSITIVITY_FLOOR = 0.05
DENSE_SAMPLE = 8192


@lru_cache(maxsize=None)
def _modes(dim: int) -> Tuple[Tuple[int, int], ...]:
    if dim == 3:
        return tuple((l, k) for l in range(1, 4) for k in range(-l, l + 1))
    if dim == 2:
        return tuple((l, k) for l in range(1, 5) for k in (1, -1))
    raise InvalidInputError(f"unsupported dimension {dim!r}")


def shape_modes(dim: int) -> List[Tuple[int, int]]:
    """All ``(l, k)`` keys of the shape basis, in canonical order."""
    return list(_modes(dim))


def _real_sh(l: int, k: int, u: np.ndarray) -> np.ndarray:
    x, y, z = u[:, 0], u[:, 1], u[:, 2]
    pi = math.pi
    if l == 1:
        c = math.sqrt(3.0 / (4.0 * pi))
        return c * {-1: y, 0: z, 1: x}[k]
    if l == 2:
        if k == -2:
            return 0.5 * math.sqrt(15.0 / pi) * x * y
        if k == -1:
            return 0.5 * math.sqrt(15.0 / pi) * y * z
        if k == 0:
            return 0.25 * math.sqrt(5.0 / pi) * (3.0 * z**2 - 1.0)
        if k == 1:
            return 0.5 * math.sqrt(15.0 / pi) * x * z
        return 0.25 * math.sqrt(15.0 / pi) * (x**2 - y**2)
    if k == -3:
        return 0.25 * math.sqrt(35.0 / (2.0 * pi)) * y * (3.0 * x**2 - y**2)
    if k == -2:
        return 0.5 * math.sqrt(105.0 / pi) * x * y * z
    if k == -1:
        return 0.25 * math.sqrt(21.0 / (2.0 * pi)) * y * (5.0 * z**2 - 1.0)
    if k == 0:
        return 0.25 * math.sqrt(7.0 / pi) * z * (5.0 * z**2 - 3.0)
    if k == 1:
        return 0.25 * math.sqrt(21.0 / (2.0 * pi)) * x * (5.0 * z**2 - 1.0)
    if k == 2:
        return 0.25 * math.sqrt(105.0 / pi) * z * (x**2 - y**2)
    return 0.25 * math.sqrt(35.0 / (2.0 * pi)) * x * (x**2 - 3.0 * y**2)


def basis_function(dim: int, l: int, k: int, u: np.ndarray) -> np.ndarray:
    """Shape basis function ``(l, k)`` at unit directions ``u`` of shape (N, dim)."""
    if (l, k) not in _modes(dim):
        raise InvalidInputError(f"no shape mode (l={l}, k={k}) in dimension {dim}")
    u = np.asarray(u, dtype=float)
    if dim == 3:
        return _real_sh(l, k, u)
    theta = np.arctan2(u[:, 1], u[:, 0])
    return np.cos(l * theta) if k == 1 else np.sin(l * theta)


_BASIS_CACHE: Dict[Tuple[int, int], Tuple[np.ndarray, np.ndarray]] = {}


def basis_matrix(dim: int, dirs: np.ndarray) -> np.ndarray:
    """All basis functions at ``dirs``, shape (N, n_modes).

    Results for read-only direction tables (the cached quadrature and dense
    samples) are memoized.
    """
    dirs = np.asarray(dirs, dtype=float)
    key = (dim, id(dirs))
    hit = _BASIS_CACHE.get(key)
    if hit is not None and hit[0] is dirs:
        return hit[1]
    mat = np.stack([basis_function(dim, l, k, dirs) for l, k in _modes(dim)], axis=1)
    if not dirs.flags.writeable:
        mat.setflags(write=False)
        _BASIS_CACHE[key] = (dirs, mat)
    return mat


@lru_cache(maxsize=4)
def dense_directions(dim: int) -> np.ndarray:
    """Dense deterministic direction sample used for extrema and positivity."""
    if dim == 2:
        t = 2.0 * np.pi * np.arange(DENSE_SAMPLE) / DENSE_SAMPLE
        dirs = np.column_stack((np.cos(t), np.sin(t)))
    else:
        dirs = np.vstack((fibonacci_sphere(DENSE_SAMPLE), np.eye(3), -np.eye(3)))
    dirs.setflags(write=False)
    return dirs


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` quasi-uniform unit vectors on S^2 (golden-angle spiral)."""
    if n < 1:
        raise InvalidInputError("fibonacci_sphere needs at least one point")
    i = np.arange(n) + 0.5
    polar = np.arccos(1.0 - 2.0 * i / n)
    az = np.pi * (1.0 + 5.0**0.5) * i
    return np.column_stack((np.cos(az) * np.sin(polar), np.sin(az) * np.sin(polar), np.cos(polar)))


def unit_ball_volume(m: int) -> float:
    """omega_m = 2 pi^{m/2} / (m Gamma(m/2))."""
    if m not in (2, 3):
        raise InvalidInputError(f"unsupported dimension m={m!r}")
    return 2.0 * math.pi ** (m / 2) / (m * gamma_half(m / 2))


def _as_point(coords, dim=None) -> Tuple[float, ...]:
    try:
        pt = tuple(float(c) for c in coords)
    except TypeError as exc:
        raise InvalidInputError(f"point must be a sequence of reals, got {coords!r}") from exc
    if len(pt) not in (2, 3) or (dim is not None and len(pt) != dim):
        raise InvalidInputError(f"point {coords!r} has wrong dimension")
    if not all(math.isfinite(c) for c in pt):
        raise InvalidInputError(f"point {coords!r} has non-finite entries")
    return pt


@dataclass(frozen=True)
class Ball:
    center: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise InvalidInputError(f"ball radius must be positive, got {self.radius!r}")

    @property
    def dim(self) -> int:
        return len(self.center)

    def volume(self) -> float:
        return unit_ball_volume(self.dim) * self.radius**self.dim

    def dilated(self, s: float) -> "Ball":
        """Dilated copy: the union of the ball with all balls of radius s
        centred on its boundary."""
        if s < 0:
            raise InvalidInputError("dilation must be nonnegative")
        return Ball(self.center, self.radius + s)

    def as_domain(self) -> "StarDomain":
        return StarDomain(self.dim, self.center, self.radius)


def is_admissible(ball: Ball, hole) -> bool:
    """Whether the closed ball avoids ``hole``, i.e. lies in R^m minus that point."""
    hole = np.asarray(hole, dtype=float)
    return bool(np.linalg.norm(hole - np.asarray(ball.center)) > ball.radius)


@dataclass(frozen=True)
class StarDomain:
    dim: int
    center: Tuple[float, ...]
    rho0: float
    coeffs: Tuple[Tuple[int, int, float], ...] = field(default=())

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise InvalidInputError(f"unsupported dimension {self.dim!r}")
        object.__setattr__(self, "center", _as_point(self.center, self.dim))
        if not (math.isfinite(self.rho0) and self.rho0 > 0):
            raise InvalidInputError(f"rho0 must be positive, got {self.rho0!r}")
        merged: Dict[Tuple[int, int], float] = {}
        for entry in self.coeffs:
            l, k, value = entry
            if (l, k) not in _modes(self.dim):
                raise InvalidInputError(f"no shape mode (l={l}, k={k}) in dimension {self.dim}")
            if not math.isfinite(value):
                raise InvalidInputError(f"coefficient (l={l}, k={k}) is not finite")
            merged[(int(l), int(k))] = merged.get((int(l), int(k)), 0.0) + float(value)
        canon = tuple((l, k, merged[(l, k)]) for (l, k) in _modes(self.dim)
                      if (l, k) in merged and merged[(l, k)] != 0.0)
        object.__setattr__(self, "coeffs", canon)
        low = float(self.relative_profile(dense_directions(self.dim)).min())
        if low < POSITIVITY_FLOOR:
            raise InvalidInputError(
                f"radial profile drops to {low:.4g}*rho0, below the floor {POSITIVITY_FLOOR}*rho0"
            )

    @classmethod
    def from_vector(cls, dim: int, center, rho0: float, vector: Sequence[float]) -> "StarDomain":
        """Build from a dense coefficient vector ordered as :func:`shape_modes`."""
        modes = shape_modes(dim)
        if len(vector) != len(modes):
            raise InvalidInputError(f"expected {len(modes)} coefficients, got {len(vector)}")
        return cls(dim, center, rho0, tuple((l, k, float(v)) for (l, k), v in zip(modes, vector)))

    def vector(self) -> np.ndarray:
        lookup = {(l, k): v for l, k, v in self.coeffs}
        return np.array([lookup.get(mode, 0.0) for mode in _modes(self.dim)])

    def with_rho0(self, rho0: float) -> "StarDomain":
        return replace(self, rho0=rho0)

    def relative_profile(self, dirs: np.ndarray) -> np.ndarray:
        """rho(u) / rho0."""
        dirs = np.asarray(dirs, dtype=float)
        if not self.coeffs:
            return np.ones(len(dirs))
        return 1.0 + basis_matrix(self.dim, dirs) @ self.vector()

    def profile(self, dirs: np.ndarray) -> np.ndarray:
        """Radial extent rho(u) along unit directions ``dirs`` (N, dim)."""
        return self.rho0 * self.relative_profile(dirs)

    def max_extent(self) -> float:
        return float(self.profile(dense_directions(self.dim)).max())

    def boundary_sample(self) -> np.ndarray:
        dirs = dense_directions(self.dim)
        return np.asarray(self.center) + self.profile(dirs)[:, None] * dirs

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "center": list(self.center),
            "rho0": self.rho0,
            "coeffs": [{"l": l, "k": k, "value": v} for l, k, v in self.coeffs],
        }

    @classmethod
    def from_json(cls, obj) -> "StarDomain":
        if not isinstance(obj, dict):
            raise InvalidInputError("domain must be a JSON object")
        for key in ("dim", "center", "rho0", "coeffs"):
            if key not in obj:
                raise InvalidInputError(f"domain field '{key}' is missing")
        dim = obj["dim"]
        if isinstance(dim, bool) or not isinstance(dim, int) or dim not in (2, 3):
            raise InvalidInputError(f"domain field 'dim' must be 2 or 3, got {dim!r}")
        center = obj["center"]
        if not isinstance(center, list) or len(center) != dim or not all(_is_real(c) for c in center):
            raise InvalidInputError(f"domain field 'center' must be a list of {dim} reals")
        if not _is_real(obj["rho0"]) or obj["rho0"] <= 0:
            raise InvalidInputError("domain field 'rho0' must be a positive real")
        if not isinstance(obj["coeffs"], list):
            raise InvalidInputError("domain field 'coeffs' must be a list")
        entries = []
        for i, c in enumerate(obj["coeffs"]):
            if not isinstance(c, dict) or not {"l", "k", "value"} <= c.keys():
                raise InvalidInputError(f"domain field 'coeffs[{i}]' needs keys l, k, value")
            if not all(isinstance(c[key], int) and not isinstance(c[key], bool) for key in ("l", "k")):
                raise InvalidInputError(f"domain field 'coeffs[{i}]' has non-integer l or k")
            if not _is_real(c["value"]):
                raise InvalidInputError(f"domain field 'coeffs[{i}].value' must be a real")
            if (c["l"], c["k"]) not in shape_modes(dim):
                raise InvalidInputError(f"domain field 'coeffs[{i}]' names unknown mode "
                                        f"(l={c['l']}, k={c['k']})")
            entries.append((c["l"], c["k"], float(c["value"])))
        return cls(dim, tuple(float(v) for v in center), float(obj["rho0"]), tuple(entries))


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def star_volume(domain: StarDomain, q: QuadratureSpec = QuadratureSpec()) -> float:
    """|D| = (1/m) * integral over the unit sphere of rho(u)^m."""
    dirs, w = angular_rule(domain.dim, q)
    return float(np.sum(w * domain.profile(dirs) ** domain.dim)) / domain.dim


def equal_volume_radius(domain: StarDomain, q: QuadratureSpec = QuadratureSpec()) -> float:
    """Radius r with |B_r| = |D|."""
    return (star_volume(domain, q) / unit_ball_volume(domain.dim)) ** (1.0 / domain.dim)


def rescale_to_volume(domain: StarDomain, volume: float, q: QuadratureSpec = QuadratureSpec()) -> StarDomain:
    """Same shape with rho0 chosen so that the volume equals ``volume``."""
    unit = star_volume(domain.with_rho0(1.0), q)
    return domain.with_rho0((volume / unit) ** (1.0 / domain.dim))


def contains(domain: StarDomain, y) -> bool:
    """Membership of ``y`` in the open domain; the center always belongs."""
    return bool(contains_many(domain, np.asarray(y, dtype=float)[None, :])[0])


def contains_many(domain: StarDomain, ys: np.ndarray) -> np.ndarray:
    """Vectorized :func:`contains` for an (N, dim) array of points."""
    d = np.asarray(ys, dtype=float) - np.asarray(domain.center)
    dist = np.linalg.norm(d, axis=1)
    inside = dist == 0.0
    safe = np.where(inside, 1.0, dist)
    return inside | (dist < domain.profile(d / safe[:, None]))


def distance_to_boundary(domain: StarDomain, x) -> float:
    """Distance from ``x`` to a dense sample of the boundary."""
    diff = domain.boundary_sample() - np.asarray(x, dtype=float)
    return float(np.sqrt(np.min(np.einsum("ij,ij->i", diff, diff))))


@dataclass(frozen=True)
class SizeCheck:
    max_scaled_radius: float
    threshold: float
    satisfied: bool

    def to_json(self) -> dict:
        return {
            "max_scaled_radius": self.max_scaled_radius,
            "threshold": self.threshold,
            "satisfied": self.satisfied,
        }


def size_condition(domain: StarDomain, lam: float) -> SizeCheck:
    """Whether lam * max rho stays below the first zero of J_{3/2}, so that
    sin(lam s)/(lam s) decreases across the whole domain."""
    if domain.dim != 3:
        raise InvalidInputError("size condition is implemented for dim = 3 only")
    if not lam > 0:
        raise InvalidInputError(f"wave number must be positive, got {lam!r}")
    scaled = lam * domain.max_extent()
    threshold = bessel_zero_j(1.5, 1)
    return SizeCheck(scaled, threshold, scaled <= threshold)


def ball_domain(radius: float, dim: int = 3, center: Iterable[float] = None) -> StarDomain:
    center = tuple(center) if center is not None else (0.0,) * dim
    return StarDomain(dim, center, radius)
