"""
Special functions and the spatial profiles f1, f2, g2.

The profiles are Fourier integrals over the ball |p| <= p0:

    f2(p0, r) = int d^3p p^2 exp(i p.x)
    f1(p0, r) = |int d^3p exp(i p.x)|^2
    g2(p0, r) = i int d^3p p_z exp(i p.x)      (x along z)

Their closed forms carry 1/r^4 .. 1/r^6 prefactors and cancel catastrophically
as r -> 0, so below SERIES_SWITCH in p0*r the Maclaurin series is used instead.
"""
import math
from typing import Union

import numpy as np
from numpy.polynomial import polynomial
from scipy import special

from helfer_flux.errors import ParameterError
from helfer_flux.models import ProfileBranch, ProfileValue

ArrayLike = Union[float, np.ndarray]

SERIES_SWITCH = 0.5
SERIES_TERMS = 10

FOUR_PI = 4.0 * math.pi

# coefficients in powers of x^2
_F2_SERIES = np.array([(-1) ** k / (math.factorial(2 * k + 1) * (2 * k + 5)) for k in range(SERIES_TERMS)])
_BALL_SERIES = np.array([(-1) ** k / (math.factorial(2 * k + 1) * (2 * k + 3)) for k in range(SERIES_TERMS)])
_G2_SERIES = np.array(
    [-((-1) ** k) * (2 * k + 2) / (math.factorial(2 * k + 3) * (2 * k + 5)) for k in range(SERIES_TERMS)]
)


def _as_output(values: np.ndarray, like) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(values)
    return values


def _positive_argument(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ParameterError(f"{name} requires x > 0")
    return x


def cosine_integral(x: ArrayLike) -> ArrayLike:
    """Ci(x) = -int_x^inf cos(u)/u du for x > 0."""
    values = _positive_argument(x, "Ci")
    _, ci = special.sici(values)
    return _as_output(ci, x)


def exp_integral_e1(x: ArrayLike) -> ArrayLike:
    """E1(x) = int_x^inf exp(-u)/u du for x > 0."""
    values = _positive_argument(x, "E1")
    return _as_output(special.exp1(values), x)


def _reduced_radius(p0: float, r: ArrayLike) -> np.ndarray:
    if not p0 > 0:
        raise ParameterError(f"p0 must be positive, got {p0}")
    r = np.asarray(r, dtype=float)
    if np.any(~(r >= 0)):
        raise ParameterError("profile functions need r >= 0")
    return p0 * r


def _piecewise(x: np.ndarray, series, closed) -> np.ndarray:
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = x < SERIES_SWITCH
    out[small] = series(x[small])
    out[~small] = closed(x[~small])
    return out


def _f2_series(x):
    return FOUR_PI * polynomial.polyval(x * x, _F2_SERIES)


def _f2_closed(x):
    s, c = np.sin(x), np.cos(x)
    return FOUR_PI * (3.0 * (x * x - 2.0) * s - x * (x * x - 6.0) * c) / x ** 5


def _ball_series(x):
    return FOUR_PI * polynomial.polyval(x * x, _BALL_SERIES)


def _ball_closed(x):
    return FOUR_PI * (np.sin(x) - x * np.cos(x)) / x ** 3


def _g2_series(x):
    return FOUR_PI * x * polynomial.polyval(x * x, _G2_SERIES)


def _g2_closed(x):
    s, c = np.sin(x), np.cos(x)
    return FOUR_PI * (3.0 * x * c + (x * x - 3.0) * s) / x ** 4


def f2(p0: float, r: ArrayLike) -> ArrayLike:
    x = _reduced_radius(p0, r)
    values = p0 ** 5 * _piecewise(x, _f2_series, _f2_closed)
    return _as_output(values.reshape(np.shape(x)), r)


def f1(p0: float, r: ArrayLike) -> ArrayLike:
    x = _reduced_radius(p0, r)
    ball = _piecewise(x, _ball_series, _ball_closed)
    values = p0 ** 6 * ball * ball
    return _as_output(values.reshape(np.shape(x)), r)


def g2(p0: float, r: ArrayLike) -> ArrayLike:
    x = _reduced_radius(p0, r)
    values = p0 ** 5 * _piecewise(x, _g2_series, _g2_closed)
    return _as_output(values.reshape(np.shape(x)), r)


_PROFILES = {"f1": f1, "f2": f2, "g2": g2}


def profile_branch(p0: float, r: float) -> ProfileBranch:
    if _reduced_radius(p0, r) < SERIES_SWITCH:
        return ProfileBranch.SERIES
    return ProfileBranch.CLOSED_FORM


def profile_value(name: str, p0: float, r: float) -> ProfileValue:
    if name not in _PROFILES:
        raise ParameterError(f"unknown profile {name!r}, expected one of {sorted(_PROFILES)}")
    return ProfileValue(value=_PROFILES[name](p0, r), branch=profile_branch(p0, r))


def f2_asymptotic(p0: float, r: ArrayLike, regime: str) -> ArrayLike:
    """Leading behaviour of f2: regime 'far' for r >> 1/p0, 'near' for r << 1/p0."""
    r = np.asarray(r, dtype=float)
    if regime == "near":
        values = np.full(r.shape, FOUR_PI / 5.0 * p0 ** 5)
    elif regime == "far":
        values = -FOUR_PI / r ** 2 * p0 ** 3 * np.cos(p0 * r)
    else:
        raise ParameterError(f"regime must be 'near' or 'far', got {regime!r}")
    return _as_output(values, r)


def f1_asymptotic(p0: float, r: ArrayLike, regime: str) -> ArrayLike:
    r = np.asarray(r, dtype=float)
    if regime == "near":
        values = np.full(r.shape, (FOUR_PI / 3.0) ** 2 * p0 ** 6)
    elif regime == "far":
        values = (FOUR_PI * p0) ** 2 / r ** 4 * np.cos(p0 * r) ** 2
    else:
        raise ParameterError(f"regime must be 'near' or 'far', got {regime!r}")
    return _as_output(values, r)
