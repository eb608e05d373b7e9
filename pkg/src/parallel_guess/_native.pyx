# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels.  Must stay bit-compatible with _fallback.py."""
from libc.stdint cimport uint64_t, int64_t
from libc.math cimport log, ceil

import numpy as np

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t trial_key(uint64_t seed_key, uint64_t trial) noexcept nogil:
    return mix64(seed_key + (trial + 1) * GAMMA)


cdef inline double rounds_from_bits(uint64_t bits, double log_q) noexcept nogil:
    cdef double u
    if bits == 0:
        bits = 1
    u = <double>bits * TWO_M53
    return ceil(log(u) / log_q)


def seed_key(uint64_t seed):
    return mix64(seed)


def parallel_rounds(uint64_t seed, uint64_t start, Py_ssize_t count, Py_ssize_t word_length, double log_q):
    """Max of ``word_length`` geometric draws for trials start .. start+count-1."""
    out = np.empty(count, dtype=np.int64)
    cdef int64_t[::1] view = out
    cdef uint64_t skey = mix64(seed)
    cdef uint64_t key, bits, best
    cdef Py_ssize_t t, j
    with nogil:
        for t in range(count):
            key = trial_key(skey, start + <uint64_t>t)
            best = 0xFFFFFFFFFFFFFFFFULL
            for j in range(word_length):
                bits = mix64(key + <uint64_t>(j + 1) * GAMMA) >> 11
                if bits < best:
                    best = bits
            view[t] = <int64_t>rounds_from_bits(best, log_q)
    return out


def serial_rounds(uint64_t seed, uint64_t start, Py_ssize_t count, double log_q):
    """One geometric draw per trial with ``log_q = log(1 - K**-L)``."""
    out = np.empty(count, dtype=np.int64)
    cdef int64_t[::1] view = out
    cdef uint64_t skey = mix64(seed)
    cdef uint64_t key, bits
    cdef Py_ssize_t t
    with nogil:
        for t in range(count):
            key = trial_key(skey, start + <uint64_t>t)
            bits = mix64(key + GAMMA) >> 11
            view[t] = <int64_t>rounds_from_bits(bits, log_q)
    return out
