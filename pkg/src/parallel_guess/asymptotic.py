"""Asymptotic mean: de Bruijn's expansion of U(m, n) and the periodic term.

All oscillating pieces are Fourier series in ``log_m n`` whose k-th
coefficient involves Gamma(s - 2 pi i k / log m).  That coefficient decays
like exp(-pi**2 k / log m), so a handful of terms (often one) suffice and for
large alphabets everything underflows to exactly 0.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import DomainError, InvalidToleranceError
from .exact import ASYMPTOTIC, SIMPLE, MeanEstimate
from .gammafn import complex_gamma
from .model import ModelParams

EULER_GAMMA = 0.57721566490153286061
RESIDUAL_ORDER = "O(1/L)"

_ABS_FLOOR = 1e-30
_MAX_TERMS = 100_000
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AsymptoticBreakdown:
    leading: float
    beta_value: float
    beta_constant: float
    beta_fluctuation: float
    total: float
    residual_order: str = RESIDUAL_ORDER

    def to_estimate(self, params: ModelParams, amplitude: float) -> MeanEstimate:
        # Heuristic: the observed remainder is close to 1/(2 L log X).
        bound = 1.0 / (params.word_length * params.log_ratio) + 2.0 * amplitude
        return MeanEstimate(self.total, ASYMPTOTIC, bound)


def _log_base(m) -> float:
    m = float(m)
    if not m > 1.0:
        raise DomainError(f"base must exceed 1, got {m!r}")
    return math.log(m)


def _log_x(K) -> float:
    K = float(K)
    if not K > 1.0:
        raise DomainError(f"alphabet size must exceed 1, got {K!r}")
    return -math.log1p(-1.0 / K)


def _check_tol(rel_tol: float) -> None:
    if not rel_tol > 0:
        raise InvalidToleranceError(f"rel_tol must be positive, got {rel_tol!r}")


def _phase(n: float, log_m: float) -> float:
    # fractional part of log_m n; periodicity then holds up to rounding of the log
    x = math.log(n) / log_m
    return x - math.floor(x)


def _fourier(log_m: float, shift: float, n: float, rel_tol: float, derivative: bool) -> float:
    """(2/log m) sum_k Re(Gamma(shift - i w_k) e^{i w_k log n} [i w_k]), w_k = 2 pi k / log m."""
    theta = _phase(n, log_m)
    acc = 0.0
    scale = 2.0 / log_m
    for k in range(1, _MAX_TERMS):
        w = _TWO_PI * k / log_m
        g = complex_gamma(complex(shift, -w))
        mag = abs(g) * scale * (w if derivative else 1.0)
        if mag < rel_tol * (abs(acc) + _ABS_FLOOR):
            break
        z = g * cmath.exp(1j * _TWO_PI * k * theta)
        if derivative:
            z *= 1j * w
        acc += scale * z.real
    return acc


def f_s(s: int, n_real: float, m: float, rel_tol: float = 1e-15) -> float:
    """``(2/log m) sum_{k>=1} Re(Gamma(s - 2 pi i k/log m) exp(2 pi i k log_m n))``.

    Periodic in ``log_m n`` with period 1.  ``s`` is -1 or +1.
    """
    if s not in (-1, 1):
        raise DomainError(f"s must be -1 or 1, got {s!r}")
    _check_tol(rel_tol)
    log_m = _log_base(m)
    if not n_real > 0:
        raise DomainError(f"n must be positive, got {n_real!r}")
    return _fourier(log_m, float(s), float(n_real), rel_tol, derivative=False)


def u_sum_asymptotic(m, n: int, rel_tol: float = 1e-15) -> float:
    """de Bruijn's expansion of U(m, n) with the O(1/n) remainder dropped."""
    log_m = _log_base(m)
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n!r}")
    m = float(m)
    n = float(n)
    return (
        n * math.log(n) / log_m
        + n * ((EULER_GAMMA - 1.0) / log_m - 0.5 + f_s(-1, n, m, rel_tol))
        + m / (m - 1.0)
        - 1.0 / (2.0 * log_m)
        - 0.5 * f_s(1, n, m, rel_tol)
    )


def beta_constant(K_real) -> float:
    """Non-oscillating part of the periodic term: 1/2 + gamma / log X."""
    return 0.5 + EULER_GAMMA / _log_x(K_real)


def beta_fluctuation(K_real, L_real, rel_tol: float = 1e-15) -> float:
    """Oscillating part of the closed-form periodic term (mean zero over a period)."""
    _check_tol(rel_tol)
    log_x = _log_x(K_real)
    if not L_real > 0:
        raise DomainError(f"L must be positive, got {L_real!r}")
    return _fourier(log_x, -1.0, float(L_real), rel_tol, derivative=True)


def beta_closed(K_real, L_real, rel_tol: float = 1e-15) -> float:
    """Periodic term in closed form, period 1 in ``log_X L``."""
    return beta_constant(K_real) + beta_fluctuation(K_real, L_real, rel_tol)


def beta_difference(K_real, L: int, rel_tol: float = 1e-15) -> float:
    """Periodic term from finite differences of f_{-1} and f_1 at L and L+1."""
    log_x = _log_x(K_real)
    if L < 2:
        raise DomainError(f"L must be >= 2, got {L!r}")
    X = math.exp(log_x)
    fm = f_s(-1, L + 1, X, rel_tol) - f_s(-1, L, X, rel_tol)
    fp = f_s(1, L + 1, X, rel_tol) - f_s(1, L, X, rel_tol)
    return L * fm + 0.5 + EULER_GAMMA / log_x + 0.5 * fp


def oscillation_amplitude(K_real, rel_tol: float = 1e-15) -> float:
    """Uniform-in-L bound on |beta_fluctuation| by the triangle inequality.

    Returns 0.0 when the first coefficient already underflows.
    """
    _check_tol(rel_tol)
    log_x = _log_x(K_real)
    acc = 0.0
    for k in range(1, _MAX_TERMS):
        w = _TWO_PI * k / log_x
        mag = abs(complex_gamma(complex(-1.0, -w))) * w * 2.0 / log_x
        if mag < rel_tol * (acc + _ABS_FLOOR):
            break
        acc += mag
    return acc


def mean_rounds_asymptotic(params: ModelParams, rel_tol: float = 1e-15) -> AsymptoticBreakdown:
    """``log L / log X + beta(L)``; no accuracy promise for small L."""
    L = params.word_length
    K = params.alphabet_size
    leading = math.log(L) / params.log_ratio
    const = beta_constant(K)
    fluct = beta_fluctuation(K, L, rel_tol)
    beta_value = const + fluct
    return AsymptoticBreakdown(leading, beta_value, const, fluct, leading + beta_value)


def mean_rounds_simple(params: ModelParams) -> float:
    """``(log L + gamma) / log X + 1/2``: the asymptotic mean without oscillation."""
    return (math.log(params.word_length) + EULER_GAMMA) / params.log_ratio + 0.5


def simple_estimate(params: ModelParams, amplitude: float) -> MeanEstimate:
    bound = 1.0 / (params.word_length * params.log_ratio) + 3.0 * amplitude
    return MeanEstimate(mean_rounds_simple(params), SIMPLE, bound)
