import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parallel_guess.errors import DomainError, InvalidAlphabetError, InvalidWordLengthError
from parallel_guess.model import (
    ModelParams,
    round_cdf,
    round_cdf_exact,
    round_pmf,
    round_survival,
    validate,
)

EPS = 2.0**-52


def test_validate_binary_letter():
    p = validate(2, 1)
    assert p.retention_prob == 0.5
    assert p.ratio == 2.0


def test_validate_headline_params():
    p = validate(40, 20000)
    assert p.ratio == pytest.approx(40 / 39, rel=1e-15)
    assert p.exact_ratio() == Fraction(40, 39)


@pytest.mark.parametrize("K,L,err", [
    (1, 5, InvalidAlphabetError),
    (1.5, 5, InvalidAlphabetError),
    (2, 0, InvalidWordLengthError),
    (2, 2.5, InvalidWordLengthError),
    (float("nan"), 3, InvalidAlphabetError),
])
def test_validate_rejects(K, L, err):
    with pytest.raises(err) as info:
        validate(K, L)
    assert info.value.code in ("invalid-alphabet", "invalid-word-length")


def test_validate_accepts_real_alphabet():
    p = validate(2.5, 3)
    assert p.ratio == pytest.approx(2.5 / 1.5)
    assert not p.integer_alphabet


@pytest.mark.parametrize("K", [2, 3, 7, 40, 1000, 2.5, 123.456])
def test_q_times_x_is_one(K):
    p = validate(K, 1)
    assert abs(p.retention_prob * p.ratio - 1.0) <= 4 * EPS
    if isinstance(K, int):
        assert p.exact_retention() * p.exact_ratio() == 1


def test_cdf_examples(enum_cdf):
    assert round_cdf(validate(2, 1), 1) == 0.5
    assert round_cdf(validate(7, 13), 0) == 0.0
    # frozen from exhaustive enumeration of all 2-round guesses for 2 letters
    assert enum_cdf(2, 2, 2) == Fraction(9, 16)
    assert round_cdf(validate(2, 2), 2) == pytest.approx(9 / 16, rel=1e-15)


@pytest.mark.parametrize("K,L,r", [(2, 3, 2), (3, 2, 2), (3, 1, 3), (2, 2, 3)])
def test_cdf_matches_enumeration(enum_cdf, K, L, r):
    assert round_cdf(validate(K, L), r) == pytest.approx(float(enum_cdf(K, L, r)), rel=1e-14)


def test_pmf_examples(enum_cdf):
    assert round_pmf(validate(2, 1), 1) == 0.5
    assert round_pmf(validate(2, 1), 3) == pytest.approx(1 / 8, rel=1e-15)
    expected = enum_cdf(2, 2, 2) - enum_cdf(2, 2, 1)
    assert expected == Fraction(5, 16)
    assert round_pmf(validate(2, 2), 2) == pytest.approx(5 / 16, rel=1e-15)


def test_pmf_rejects_round_zero():
    with pytest.raises(DomainError):
        round_pmf(validate(2, 2), 0)


def test_cdf_matches_exact_rational():
    worst = 0.0
    for K in range(2, 11):
        for L in range(1, 51):
            p = validate(K, L)
            for r in range(1, 51):
                ex = round_cdf_exact(p, r)
                worst = max(worst, abs(float((round_cdf(p, r) - ex) / ex)))
    assert worst <= 1e-14


@pytest.mark.parametrize("K,L", [(2, 1), (2, 5), (3, 100), (40, 20000), (10, 7), (1000, 3)])
def test_pmf_sums_to_cdf(K, L):
    p = validate(K, L)
    pm = [round_pmf(p, r) for r in range(1, 10_001)]
    for R in (1, 2, 10, 100, 1000, 10_000):
        assert abs(math.fsum(pm[:R]) - round_cdf(p, R)) <= 4 * EPS


def test_survival_complements_cdf():
    p = validate(3, 4)
    for r in range(0, 40):
        assert round_survival(p, r) + round_cdf(p, r) == pytest.approx(1.0, abs=2 * EPS)
    # far tail where 1 - cdf would round to 0
    tail = round_survival(validate(2, 1), 80)
    assert tail == pytest.approx(2.0**-80, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(
    K=st.integers(2, 60),
    L=st.integers(1, 5000),
    r=st.integers(0, 400),
)
def test_cdf_monotone(K, L, r):
    p = validate(K, L)
    f = round_cdf(p, r)
    assert 0.0 <= f <= 1.0
    assert round_cdf(p, r + 1) >= f
    assert round_cdf(validate(K, L + 1), r) <= f


def test_cdf_tends_to_one():
    p = validate(40, 20000)
    assert round_cdf(p, 5000) == 1.0
    assert round_cdf(p, 100) < 1e-100


def test_params_are_derived_only():
    with pytest.raises(TypeError):
        ModelParams(2, 3, 0.5)
