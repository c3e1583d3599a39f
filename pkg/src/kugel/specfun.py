"""Bessel functions of half-integer and integer order, their zeros, and the
mean-value coefficients

    a_m^+(t) = Gamma(m/2 + 1) I_{m/2}(t) / (t/2)^{m/2}
    a_m^-(t) = Gamma(m/2 + 1) J_{m/2}(t) / (t/2)^{m/2}

Everything is built on one ascending series, the normalized sum

    S_nu(+-z) = sum_k (+-z)^k / (k! (nu+1)_k),   z = t^2 / 4,

so that I_nu(t) = (t/2)^nu S_nu(z) / Gamma(nu+1), J_nu likewise with
alternating signs, and a_m^{+-}(t) = S_{m/2}(+-z) exactly.  The sum is
accumulated in :mod:`decimal` at a working precision that grows with ``t``;
the alternating series loses about ``t / ln 10`` digits to cancellation and
plain doubles cannot carry that by t = 20.
"""

from __future__ import annotations

import decimal
import math
from fractions import Fraction
from functools import lru_cache
from typing import Literal, Union

import numpy as np

from .errors import InvalidInputError, NumericalFailure, RangeError

Order = Union[int, float, Fraction]
CoeffKind = Literal["plus", "minus"]

T_MAX = 60.0
MAX_TERMS = 200
SERIES_RTOL = decimal.Decimal("1e-17")
MAX_ORDER = 10


def _as_order(nu: Order) -> Fraction:
    try:
        f = Fraction(nu).limit_denominator(2)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"bessel order must be a real number, got {nu!r}") from exc
    if f < 0 or f.denominator not in (1, 2) or abs(float(f) - float(nu)) > 1e-12:
        raise InvalidInputError(f"bessel order must be a nonnegative half-integer, got {nu!r}")
    if f > MAX_ORDER:
        raise InvalidInputError(f"bessel order {nu!r} exceeds supported maximum {MAX_ORDER}")
    return f


def _check_kind(kind: str) -> None:
    if kind not in ("plus", "minus"):
        raise InvalidInputError(f"coefficient kind must be 'plus' or 'minus', got {kind!r}")


def _check_range(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0.0 or t > T_MAX:
        raise RangeError(f"argument t={t!r} outside supported range [0, {T_MAX}]")
    return t


def gamma_half(k: Order) -> float:
    """Gamma function at a positive half-integer, by Gamma(x+1) = x Gamma(x)
    from Gamma(1) = 1 or Gamma(1/2) = sqrt(pi)."""
    try:
        f = Fraction(k).limit_denominator(2)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"gamma_half needs a half-integer, got {k!r}") from exc
    if f <= 0 or f.denominator not in (1, 2) or abs(float(f) - float(k)) > 1e-12 or f > 50:
        raise InvalidInputError(f"gamma_half supports positive half-integers up to 50, got {k!r}")
    if f.denominator == 1:
        return float(math.factorial(f.numerator - 1))
    value = math.sqrt(math.pi)
    x = Fraction(1, 2)
    while x < f:
        value *= float(x)
        x += 1
    return value


@lru_cache(maxsize=4096)
def _normalized_series(nu: Fraction, t: float, alternating: bool) -> float:
    """S_nu(+-t^2/4), summed until the next term drops below 1e-17 of the
    partial sum or MAX_TERMS terms have been added."""
    ctx = decimal.Context(prec=25 + int(t / 2.0))
    D = ctx.create_decimal
    z = ctx.divide(ctx.multiply(D(t), D(t)), D(4))
    if alternating:
        z = ctx.minus(z)
    two_nu = D(int(2 * nu))
    # (nu + k) = (2 nu + 2 k) / 2, exact in decimal
    term = D(1)
    total = D(1)
    for k in range(1, MAX_TERMS):
        denom = ctx.multiply(D(k), ctx.divide(ctx.add(two_nu, D(2 * k)), D(2)))
        term = ctx.divide(ctx.multiply(term, z), denom)
        total = ctx.add(total, term)
        if ctx.abs(term) < SERIES_RTOL * ctx.abs(total):
            break
    return float(total)


def _bessel(nu: Order, t: float, alternating: bool) -> float:
    order = _as_order(nu)
    t = _check_range(t)
    if t == 0.0:
        return 1.0 if order == 0 else 0.0
    prefactor = (t / 2.0) ** float(order) / gamma_half(order + 1)
    return prefactor * _normalized_series(order, t, alternating)


def bessel_i(nu: Order, t: float) -> float:
    """Modified Bessel function of the first kind I_nu(t), 0 <= t <= 60."""
    return _bessel(nu, t, alternating=False)


def bessel_j(nu: Order, t: float) -> float:
    """Bessel function of the first kind J_nu(t), 0 <= t <= 60."""
    return _bessel(nu, t, alternating=True)


@lru_cache(maxsize=256)
def _zero_j(order: Fraction, n: int) -> float:
    step = 0.25
    grid = np.arange(step, T_MAX + step / 2, step)
    found = 0
    prev_t, prev_v = grid[0], bessel_j(order, grid[0])
    for t in grid[1:]:
        v = bessel_j(order, t)
        if prev_v == 0.0 or prev_v * v < 0.0:
            found += 1
            if found == n:
                lo, hi, flo = float(prev_t), float(t), prev_v
                if flo == 0.0:
                    return lo
                while hi - lo > 1e-12:
                    mid = 0.5 * (lo + hi)
                    fm = bessel_j(order, mid)
                    if fm == 0.0:
                        return mid
                    if (fm < 0.0) == (flo < 0.0):
                        lo, flo = mid, fm
                    else:
                        hi = mid
                return 0.5 * (lo + hi)
        prev_t, prev_v = t, v
    raise NumericalFailure(f"zero #{n} of J_{order} not bracketed in (0, {T_MAX}]")


def bessel_zero_j(nu: Order, n: int) -> float:
    """n-th positive zero j_{nu,n} of J_nu, by grid bracketing and bisection."""
    order = _as_order(nu)
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidInputError(f"zero index must be a positive integer, got {n!r}")
    return _zero_j(order, int(n))


def coeff(kind: CoeffKind, m: int, t: float) -> float:
    """Mean-value coefficient a_m^+(t) (kind='plus') or a_m^-(t) (kind='minus').

    ``m`` is the dimension of the averaging region: 2 or 3 for balls, while
    m = 0 and m = 1 give the circle and sphere coefficients I_0, J_0 and
    sinh(t)/t, sin(t)/t.
    """
    _check_kind(kind)
    if m not in (0, 1, 2, 3):
        raise InvalidInputError(f"unsupported dimension m={m!r}")
    t = _check_range(t)
    if t == 0.0:
        return 1.0
    return _normalized_series(Fraction(m, 2), t, kind == "minus")


def radial_profile(kind: CoeffKind, t):
    """sinh(t)/t for 'plus' and sin(t)/t for 'minus', equal to 1 at t = 0.

    Accepts scalars or arrays.
    """
    _check_kind(kind)
    arr = np.asarray(t, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > T_MAX):
        raise RangeError(f"radial_profile argument outside [0, {T_MAX}]")
    if kind == "minus":
        out = np.sinc(arr / np.pi)
    else:
        safe = np.where(arr > 0.0, arr, 1.0)
        out = np.where(arr > 0.0, np.sinh(safe) / safe, 1.0)
    return float(out) if out.ndim == 0 else out
