"""Complex gamma function: Lanczos approximation plus reflection.

Everything is carried in log space so that values far down the imaginary
axis (|Gamma| ~ exp(-pi |Im z| / 2)) underflow cleanly to 0 instead of
producing inf/inf.
"""
from __future__ import annotations

import cmath
import math

from .errors import PoleError

# g = 7, n = 9
_G = 7.0
_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)
_LOG_2I = cmath.log(2j)


def _lanczos_log(z: complex) -> complex:
    z -= 1.0
    x = _COEF[0]
    for i in range(1, len(_COEF)):
        x += _COEF[i] / (z + i)
    t = z + _G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def _log_sin_pi(z: complex) -> complex:
    w = math.pi * z
    y = w.imag
    if abs(y) < 20.0:
        return cmath.log(cmath.sin(w))
    if y > 0:
        return -1j * w + cmath.log(cmath.exp(2j * w) - 1.0) - _LOG_2I
    return 1j * w + cmath.log(1.0 - cmath.exp(-2j * w)) - _LOG_2I


def _check_pole(z: complex) -> None:
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise PoleError(f"gamma has a pole at {z.real:g}")


def complex_loggamma(z) -> complex:
    """A branch of log Gamma(z); only its exponential is meaningful."""
    z = complex(z)
    _check_pole(z)
    if z.real < 0.5:
        return _LOG_PI - _log_sin_pi(z) - _lanczos_log(1.0 - z)
    return _lanczos_log(z)


def complex_gamma(z, *, perturb: float = 0.0) -> complex:
    """Gamma(z) for complex ``z``.

    ``perturb`` scales the result by ``1 + perturb``; it exists only for
    fault-injection runs of the validation suite.
    """
    lg = complex_loggamma(z)
    if lg.real < -745.0:
        return 0j
    value = cmath.exp(lg)
    if perturb:
        value *= 1.0 + perturb
    return value


def gamma_modulus_neg1(t: float) -> float:
    """|Gamma(-1 + i t)| in closed form: sqrt(pi / (t (1 + t**2) sinh(pi t)))."""
    t = abs(t)
    # sinh(pi t) overflows past t ~ 226; use log form
    log_sinh = math.pi * t + math.log1p(-math.exp(-2.0 * math.pi * t)) - math.log(2.0)
    return math.exp(0.5 * (_LOG_PI - math.log(t) - math.log1p(t * t) - log_sinh))


def gamma_modulus_pos1(t: float) -> float:
    """|Gamma(1 + i t)| in closed form: sqrt(pi t / sinh(pi t))."""
    t = abs(t)
    if t == 0.0:
        return 1.0
    log_sinh = math.pi * t + math.log1p(-math.exp(-2.0 * math.pi * t)) - math.log(2.0)
    return math.exp(0.5 * (_LOG_PI + math.log(t) - log_sinh))
