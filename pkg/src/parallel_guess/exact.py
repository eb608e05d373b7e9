"""Mean number of rounds by non-asymptotic routes.

Production route is the survival series ``sum_{r>=0} P(N > r)``, which is
positive-termed and has a rigorous tail bound.  The alternating binomial
form is evaluated exactly in rationals (an oracle, capped in size) and in
floating point (kept to exhibit its cancellation).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import gmpy2
import numpy as np

from .errors import DomainError, InvalidToleranceError, SizeLimitError
from .model import ModelParams

EXACT_CAP = 300

SURVIVAL = "survival-series"
ALTERNATING_EXACT = "alternating-exact"
ALTERNATING_FLOAT = "alternating-float"
KNUTH_IDENTITY = "knuth-identity"
ASYMPTOTIC = "asymptotic"
SIMPLE = "simple"
METHODS = (SURVIVAL, ALTERNATING_EXACT, ALTERNATING_FLOAT, KNUTH_IDENTITY, ASYMPTOTIC, SIMPLE)

_EPS = np.finfo(float).eps
_CHUNK = 1 << 20


@dataclass(frozen=True)
class MeanEstimate:
    """A floating value of the mean with the route that produced it.

    ``error_bound`` is rigorous for the survival series and the exact routes
    and a documented heuristic elsewhere.  ``cancellation_ratio`` is
    ``sum |terms| / |mean|`` for the floating alternating sum; it is ``inf``
    when it does not fit in a double, in which case
    ``log10_cancellation_ratio`` still carries it.
    """

    value: float
    method: str
    error_bound: float
    cancellation_ratio: Optional[float] = None
    log10_cancellation_ratio: Optional[float] = None
    exact: Optional[gmpy2.mpq] = None


def to_rational(x) -> gmpy2.mpq:
    """Coerce int, Fraction, mpq, float or ``"p/q"`` strings to an mpq."""
    if isinstance(x, Fraction):
        return gmpy2.mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return gmpy2.mpq(Fraction(x.strip()).numerator, Fraction(x.strip()).denominator)
    return gmpy2.mpq(x)


def _sum_fractions(nums: list, dens: list) -> gmpy2.mpq:
    # Pairwise splitting keeps operands balanced; one reduction at the end.
    while len(nums) > 1:
        nn, dd = [], []
        for i in range(0, len(nums) - 1, 2):
            nn.append(nums[i] * dens[i + 1] + nums[i + 1] * dens[i])
            dd.append(dens[i] * dens[i + 1])
        if len(nums) % 2:
            nn.append(nums[-1])
            dd.append(dens[-1])
        nums, dens = nn, dd
    if not nums:
        return gmpy2.mpq(0)
    return gmpy2.mpq(nums[0], dens[0])


def _alternating_tail(base: gmpy2.mpq, n: int, first: int, shift: int) -> gmpy2.mpq:
    """sum_{j=first..n} (-1)**j C(n, j) / (base**(j - shift) - 1)."""
    p, q = gmpy2.mpz(base.numerator), gmpy2.mpz(base.denominator)
    nums, dens = [], []
    binom = gmpy2.mpz(1)
    for j in range(1, first):
        binom = binom * (n - j + 1) // j
    for j in range(first, n + 1):
        binom = binom * (n - j + 1) // j
        e = j - shift
        pe, qe = p**e, q**e
        # C(n,j) / ((p/q)**e - 1) = C(n,j) q**e / (p**e - q**e)
        nums.append(binom * qe if j % 2 == 0 else -binom * qe)
        dens.append(pe - qe)
    return _sum_fractions(nums, dens)


def mean_rounds_survival(params: ModelParams, tol: float = 1e-12) -> MeanEstimate:
    """Mean rounds via ``sum_{r>=0} (1 - F(r))`` truncated at a proven tail bound.

    The tail after index R is at most ``L q**(R+1) / (1-q)`` since
    ``1 - (1 - x)**L <= L x``; R is the first index where that drops below
    ``tol``, and the bound is returned as ``error_bound``.
    """
    if not (tol > 0) or not math.isfinite(tol):
        raise InvalidToleranceError(f"tol must be positive, got {tol!r}")
    L = params.word_length
    log_q = params.log_q
    log_tail_scale = math.log(L) - math.log1p(-params.retention_prob)  # log(L/(1-q))
    # smallest R with log_tail_scale + (R+1) log_q < log(tol)
    R = max(0, math.ceil((math.log(tol) - log_tail_scale) / log_q) - 1)
    while log_tail_scale + (R + 1) * log_q >= math.log(tol):
        R += 1
    while R > 0 and log_tail_scale + R * log_q < math.log(tol):
        R -= 1
    bound = math.exp(log_tail_scale + (R + 1) * log_q)

    parts = [1.0]  # r = 0
    for start in range(1, R + 1, _CHUNK):
        r = np.arange(start, min(R, start + _CHUNK - 1) + 1, dtype=float)
        a = r * log_q
        big = a > -math.log(2.0)
        log_f = np.empty_like(a)
        log_f[big] = np.log(-np.expm1(a[big]))
        log_f[~big] = np.log1p(-np.exp(a[~big]))
        parts.extend((-np.expm1(L * log_f)).tolist())
    return MeanEstimate(math.fsum(parts), SURVIVAL, bound)


def _check_cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise SizeLimitError(
            f"{what} = {n} exceeds the exact-arithmetic cap {cap}; "
            "use the survival series or raise cap explicitly"
        )


def mean_rounds_alternating_exact(params: ModelParams, cap: int = EXACT_CAP) -> gmpy2.mpq:
    """``1 + sum_{j=1..L} (-1)**(j+1) C(L,j) / (X**j - 1)`` in exact rationals."""
    L = params.word_length
    _check_cap(L, cap, "L")
    return 1 - _alternating_tail(params.exact_ratio(), L, first=1, shift=0)


def u_sum_exact(m, n: int, cap: int = EXACT_CAP) -> gmpy2.mpq:
    """``U(m, n) = sum_{k>=2} C(n,k) (-1)**k / (m**(k-1) - 1)``, exactly."""
    m = to_rational(m)
    if m <= 1:
        raise DomainError(f"m must exceed 1, got {m}")
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    n = int(n)
    _check_cap(n, cap, "n")
    return _alternating_tail(m, n, first=2, shift=1)


def knuth_identity_residual(params: ModelParams, cap: int = EXACT_CAP) -> gmpy2.mpq:
    """``alpha(L) - (1 + U(X, L+1) - U(X, L))``; identically zero."""
    L = params.word_length
    _check_cap(L + 1, cap, "L + 1")
    X = params.exact_ratio()
    alpha = mean_rounds_alternating_exact(params, cap)
    u_next = u_sum_exact(X, L + 1, cap)
    u_here = u_sum_exact(X, L, cap) if L >= 2 else gmpy2.mpq(0)
    return alpha - (1 + u_next - u_here)


def mean_rounds_knuth(params: ModelParams, cap: int = EXACT_CAP) -> gmpy2.mpq:
    """``1 + U(X, L+1) - U(X, L)`` as an exact rational (U(X, 1) is empty)."""
    L = params.word_length
    _check_cap(L + 1, cap, "L + 1")
    X = params.exact_ratio()
    u_here = u_sum_exact(X, L, cap) if L >= 2 else gmpy2.mpq(0)
    return 1 + u_sum_exact(X, L + 1, cap) - u_here


def exact_estimate(value: gmpy2.mpq, method: str) -> MeanEstimate:
    return MeanEstimate(float(value), method, 0.0, exact=value)


def mean_rounds_alternating_float(params: ModelParams) -> MeanEstimate:
    """The alternating binomial sum evaluated naively in doubles.

    Diagnostic only.  The cancellation ratio divides the magnitude sum by the
    survival-series mean, i.e. by the true value rather than the (possibly
    meaningless) computed one.  Past roughly ``1/eps`` the value carries no
    correct digits and may be inf or nan.
    """
    L = params.word_length
    log_x = params.log_ratio
    total = 1.0
    binom = 1.0
    for j in range(1, L + 1):
        binom = binom * (L - j + 1) / j
        term = binom / math.expm1(j * log_x)
        total += term if j % 2 else -term

    # log10 of 1 + sum_j C(L,j)/(X**j - 1), overflow-free
    j = np.arange(1, L + 1, dtype=float)
    log_terms = (
        math.lgamma(L + 1)
        - np.array([math.lgamma(v + 1) for v in j])
        - np.array([math.lgamma(L - v + 1) for v in j])
        - np.log(np.expm1(j * log_x))
    )
    log_abs_sum = float(np.logaddexp.reduce(np.append(log_terms, 0.0)))
    reference = mean_rounds_survival(params, 1e-12).value
    log10_ratio = (log_abs_sum - math.log(reference)) / math.log(10.0)
    log10_ratio = max(log10_ratio, 0.0)
    ratio = 10.0**log10_ratio if log10_ratio < 308 else math.inf
    bound = float(L * _EPS * math.exp(log_abs_sum)) if log_abs_sum < 700 else math.inf
    return MeanEstimate(total, ALTERNATING_FLOAT, bound, ratio, log10_ratio)
