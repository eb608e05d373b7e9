"""Model parameters and the exact distribution of the number of rounds.

A word of ``L`` letters over an alphabet of ``K`` letters is guessed in
rounds.  Correct letters are kept, so each letter needs an independent
geometric(1/K) number of rounds and the word needs the maximum of ``L`` such
variables.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from .errors import DomainError, InvalidAlphabetError, InvalidWordLengthError

_LOG_HALF = -math.log(2.0)


def _is_integral(x) -> bool:
    if isinstance(x, bool):
        return False
    if isinstance(x, numbers.Integral):
        return True
    return isinstance(x, numbers.Real) and float(x).is_integer()


@dataclass(frozen=True)
class ModelParams:
    """Alphabet size ``K`` and word length ``L`` with derived ratios.

    ``alphabet_size`` may be any real >= 2 for the analytic routes; the
    simulators require an integer.  ``retention_prob`` (q = 1 - 1/K) and
    ``ratio`` (X = K/(K-1)) are always derived, never passed in.
    """

    alphabet_size: float
    word_length: int
    retention_prob: float = field(init=False)
    ratio: float = field(init=False)

    def __post_init__(self):
        k = self.alphabet_size
        object.__setattr__(self, "retention_prob", 1.0 - 1.0 / float(k))
        object.__setattr__(self, "ratio", float(k) / (float(k) - 1.0))

    @property
    def log_q(self) -> float:
        """log(q), computed without forming q."""
        return math.log1p(-1.0 / float(self.alphabet_size))

    @property
    def log_ratio(self) -> float:
        """log(X) = -log(q)."""
        return -self.log_q

    @property
    def integer_alphabet(self) -> bool:
        return _is_integral(self.alphabet_size)

    def exact_alphabet(self) -> gmpy2.mpq:
        k = self.alphabet_size
        if isinstance(k, Fraction):
            return gmpy2.mpq(k.numerator, k.denominator)
        return gmpy2.mpq(k)

    def exact_ratio(self) -> gmpy2.mpq:
        """X = K/(K-1) as an exact rational."""
        k = self.exact_alphabet()
        return k / (k - 1)

    def exact_retention(self) -> gmpy2.mpq:
        return 1 - 1 / self.exact_alphabet()


def validate(K, L) -> ModelParams:
    """Check ``K`` and ``L`` and build a :class:`ModelParams`.

    >>> validate(2, 1).ratio
    2.0
    """
    if isinstance(K, bool) or not isinstance(K, numbers.Real) or not math.isfinite(float(K)):
        raise InvalidAlphabetError(f"alphabet size must be a finite number, got {K!r}")
    if K < 2:
        raise InvalidAlphabetError(f"alphabet size must be >= 2, got {K!r}")
    if not _is_integral(L):
        raise InvalidWordLengthError(f"word length must be an integer, got {L!r}")
    if L < 1:
        raise InvalidWordLengthError(f"word length must be >= 1, got {L!r}")
    if _is_integral(K) and not isinstance(K, numbers.Integral):
        K = int(K)
    return ModelParams(K, int(L))


def _check_round(r) -> int:
    if not _is_integral(r) or r < 0:
        raise DomainError(f"round count must be a non-negative integer, got {r!r}")
    return int(r)


def log1mexp(a: float) -> float:
    """log(1 - exp(a)) for a <= 0, accurate on both sides of a = -log 2."""
    if a > _LOG_HALF:
        return math.log(-math.expm1(a))
    return math.log1p(-math.exp(a))


def round_cdf(params: ModelParams, r: int) -> float:
    """P(all letters guessed within ``r`` rounds) = (1 - q**r)**L."""
    r = _check_round(r)
    if r == 0:
        return 0.0
    a = r * params.log_q
    L = params.word_length
    if a > _LOG_HALF:
        # complement 1 - q**r <= 1/2 is formed accurately by expm1; powering it
        # keeps the relative error near L/2 ulp instead of |L log(1-q**r)| ulp.
        return math.pow(-math.expm1(a), L)
    return math.exp(L * math.log1p(-math.exp(a)))


def round_survival(params: ModelParams, r: int) -> float:
    """P(more than ``r`` rounds needed) = 1 - round_cdf, without cancellation."""
    r = _check_round(r)
    if r == 0:
        return 1.0
    return -math.expm1(params.word_length * log1mexp(r * params.log_q))


def round_pmf(params: ModelParams, r: int) -> float:
    """P(exactly ``r`` rounds needed), for r >= 1."""
    r = _check_round(r)
    if r == 0:
        raise DomainError("round_pmf is defined for r >= 1")
    if r == 1:
        return round_cdf(params, 1)
    # F(r)/F(r-1) = (1 + q**(r-1) (1-q) / (1 - q**(r-1)))**L = exp(x)
    a = (r - 1) * params.log_q
    step = math.exp(a - log1mexp(a)) * (1.0 / float(params.alphabet_size))
    x = params.word_length * math.log1p(step)
    return round_cdf(params, r) * -math.expm1(-x)


def round_cdf_exact(params: ModelParams, r: int) -> gmpy2.mpq:
    """Exact rational (1 - q**r)**L; the reference for the floating version."""
    r = _check_round(r)
    q = params.exact_retention()
    return (1 - q**r) ** params.word_length
