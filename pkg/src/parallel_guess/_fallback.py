"""numpy implementation of the sampling kernels (used when _native is absent).

Random stream layout, shared with the compiled kernels:

* ``skey = mix64(seed)``
* trial ``t`` has key ``mix64(skey + (t + 1) * G)``
* draw ``j`` of that trial is ``mix64(key + (j + 1) * G) >> 11``, a 53-bit
  integer ``b``; the uniform is ``b * 2**-53`` with ``b = 0`` mapped to 1
* a geometric draw is ``ceil(log(u) / log(q))``

``mix64`` is the SplitMix64 finalizer and ``G`` the golden-ratio increment,
all arithmetic mod 2**64.  Because ``ceil(log(u)/log(q))`` is non-increasing
in ``u``, the maximum of a trial's geometric draws comes from its smallest
uniform, so only the minimum needs a logarithm.
"""
from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_TWO_M53 = 2.0**-53
_BLOCK = 1 << 22


def mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _trial_keys(seed: int, start: int, count: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        skey = mix64(np.array([seed], dtype=np.uint64))[0]
        t = np.arange(start + 1, start + count + 1, dtype=np.uint64)
        return mix64(skey + t * GAMMA)


def _rounds(bits: np.ndarray, log_q: float) -> np.ndarray:
    bits = np.where(bits == 0, np.uint64(1), bits)
    u = bits.astype(np.float64) * _TWO_M53
    return np.ceil(np.log(u) / log_q).astype(np.int64)


def parallel_rounds(seed: int, start: int, count: int, word_length: int, log_q: float) -> np.ndarray:
    keys = _trial_keys(seed, start, count)
    best = np.full(count, np.iinfo(np.uint64).max, dtype=np.uint64)
    step = max(1, _BLOCK // max(count, 1))
    with np.errstate(over="ignore"):
        for j0 in range(0, word_length, step):
            j = np.arange(j0 + 1, min(word_length, j0 + step) + 1, dtype=np.uint64)
            bits = mix64(keys[:, None] + j[None, :] * GAMMA) >> _S11
            np.minimum(best, bits.min(axis=1), out=best)
    return _rounds(best, log_q)


def serial_rounds(seed: int, start: int, count: int, log_q: float) -> np.ndarray:
    keys = _trial_keys(seed, start, count)
    with np.errstate(over="ignore"):
        bits = mix64(keys + GAMMA) >> _S11
    return _rounds(bits, log_q)
