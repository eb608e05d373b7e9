import itertools
from fractions import Fraction

import pytest


def enumerate_cdf(K: int, L: int, r: int) -> Fraction:
    """P(all L letters guessed within r rounds) by enumerating every guess sequence.

    Target letters are fixed to 0 (by symmetry); each letter gets r guesses
    from {0..K-1}, all K**(L r) sequences equally likely.  A letter counts as
    found if any of its r guesses is correct (retention makes later guesses
    irrelevant, which does not change the count).
    """
    hits = 0
    total = 0
    for seq in itertools.product(range(K), repeat=L * r):
        total += 1
        letters = [seq[i * r:(i + 1) * r] for i in range(L)]
        if all(0 in g for g in letters):
            hits += 1
    return Fraction(hits, total)


@pytest.fixture
def enum_cdf():
    return enumerate_cdf
