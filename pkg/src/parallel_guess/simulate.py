"""Seeded Monte Carlo for the parallel (retain) and serial (restart) models.

Trials are generated from counter-based substreams keyed by
``(seed, trial index)`` (see ``_fallback`` for the layout), so a summary
depends only on ``(seed, params, trials)``: chunk size, worker count and
backend do not change it.  Aggregates are kept as exact integers.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import (
    DegenerateBinsError,
    DomainError,
    InfeasibleSerialError,
    InvalidTrialsError,
    TooFewTrialsError,
)
from .kernels import get_backend
from .model import ModelParams, round_pmf, round_survival

PARALLEL = "parallel"
SERIAL = "serial"
SERIAL_CAP = 1e6
MIN_CHI2_TRIALS = 10_000
CHI2_THRESHOLD = 1e-3

_SEED_LIMIT = 1 << 64
_CELLS_PER_CHUNK = 1 << 24


@dataclass(frozen=True)
class SimulationSummary:
    trials: int
    mean: float
    std_error: float
    min_rounds: int
    max_rounds: int
    histogram: dict[int, int]
    seed: int
    model: str


@dataclass
class _Tally:
    """Associative, commutative accumulator over per-trial round counts."""

    counts: Counter = field(default_factory=Counter)

    def add(self, rounds: np.ndarray) -> "_Tally":
        values, freq = np.unique(rounds, return_counts=True)
        self.counts.update(dict(zip(values.tolist(), freq.tolist())))
        return self

    def merge(self, other: "_Tally") -> "_Tally":
        self.counts.update(other.counts)
        return self

    def summary(self, seed: int, model: str) -> SimulationSummary:
        n = sum(self.counts.values())
        s1 = sum(r * c for r, c in self.counts.items())
        s2 = sum(r * r * c for r, c in self.counts.items())
        if n > 1:
            # exact integer numerator of the unbiased variance
            var = (n * s2 - s1 * s1) / (n * (n - 1))
            se = math.sqrt(var / n)
        else:
            se = 0.0
        hist = dict(sorted(self.counts.items()))
        return SimulationSummary(
            trials=n,
            mean=s1 / n,
            std_error=se,
            min_rounds=min(hist),
            max_rounds=max(hist),
            histogram=hist,
            seed=seed,
            model=model,
        )


def _check_run(params: ModelParams, trials: int, seed: int) -> None:
    if not params.integer_alphabet:
        raise DomainError(f"simulation needs an integer alphabet size, got {params.alphabet_size!r}")
    if isinstance(trials, bool) or int(trials) != trials or trials < 1:
        raise InvalidTrialsError(f"trials must be a positive integer, got {trials!r}")
    if int(seed) != seed or not 0 <= seed < _SEED_LIMIT:
        raise DomainError(f"seed must be an integer in [0, 2**64), got {seed!r}")


def _run_chunks(fn, trials: int, chunk: int, workers: int) -> _Tally:
    starts = range(0, trials, chunk)
    jobs = [(s, min(chunk, trials - s)) for s in starts]
    if workers <= 1 or len(jobs) == 1:
        tallies = [_Tally().add(fn(s, c)) for s, c in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(lambda job: _Tally().add(fn(*job)), jobs))
    total = _Tally()
    for t in tallies:
        total.merge(t)
    return total


def simulate_parallel(
    params: ModelParams,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
    chunk: int | None = None,
    backend: str | None = None,
) -> SimulationSummary:
    """Rounds until every letter is guessed when correct letters are kept.

    Each trial is the maximum of ``L`` inverse-CDF geometric(1/K) draws.
    """
    _check_run(params, trials, seed)
    kern = get_backend(backend)
    L = params.word_length
    log_q = params.log_q
    chunk = chunk or max(1, _CELLS_PER_CHUNK // L)
    tally = _run_chunks(
        lambda s, c: kern.parallel_rounds(int(seed), s, c, L, log_q), int(trials), chunk, workers
    )
    return tally.summary(int(seed), PARALLEL)


def serial_mean_exact(params: ModelParams) -> float:
    """log10 of the serial-model mean K**L."""
    return params.word_length * math.log10(float(params.alphabet_size))


def simulate_serial(
    params: ModelParams,
    trials: int,
    seed: int,
    cap: float = SERIAL_CAP,
    *,
    workers: int = 1,
    chunk: int = 1 << 20,
    backend: str | None = None,
) -> SimulationSummary:
    """Rounds until the whole word is right when every round starts over.

    Each trial is one geometric draw with success probability K**-L.
    """
    _check_run(params, trials, seed)
    log10_mean = serial_mean_exact(params)
    if log10_mean > math.log10(cap):
        raise InfeasibleSerialError(
            f"serial model needs K**L = 10**{log10_mean:.6g} rounds on average, above cap {cap:g}",
            log10_mean,
        )
    kern = get_backend(backend)
    log_q = math.log1p(-(10.0 ** -log10_mean))
    tally = _run_chunks(lambda s, c: kern.serial_rounds(int(seed), s, c, log_q), int(trials), chunk, workers)
    return tally.summary(int(seed), SERIAL)


def simulate_literal(params: ModelParams, trials: int, seed: int) -> SimulationSummary:
    """Round-by-round simulation with explicit letter guesses.

    Slow; meant as a semantic reference for small ``K``, ``L`` and trials.
    Uses numpy's PCG64 rather than the counter-based streams.
    """
    _check_run(params, trials, seed)
    K, L = int(params.alphabet_size), params.word_length
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    target = rng.integers(0, K, size=(trials, L))
    open_ = np.ones((trials, L), dtype=bool)
    rounds = np.zeros(trials, dtype=np.int64)
    while open_.any():
        active = open_.any(axis=1)
        rounds += active
        guess = rng.integers(0, K, size=(trials, L))
        open_ &= guess != target
    return _Tally().add(rounds).summary(int(seed), PARALLEL)


@dataclass(frozen=True)
class ChiSquareReport:
    statistic: float
    dof: int
    p_value: float
    bins: list[tuple[int, int | None, int, float]]  # (first round, last round or None=open, observed, expected)


def empirical_cdf_check(
    summary: SimulationSummary, params: ModelParams, min_expected: float = 5.0
) -> ChiSquareReport:
    """Chi-square test of a parallel-model histogram against the exact pmf.

    Adjacent rounds are pooled until each bin expects at least
    ``min_expected`` trials; the final bin is open-ended and absorbs the tail.
    """
    if summary.model != PARALLEL:
        raise DomainError("goodness of fit is defined for parallel-model summaries")
    n = summary.trials
    if n < MIN_CHI2_TRIALS:
        raise TooFewTrialsError(f"need at least {MIN_CHI2_TRIALS} trials, got {n}")
    hist = summary.histogram
    bins: list[list] = []
    cur_lo, cur_obs, cur_exp = 1, 0, 0.0
    r = 1
    while True:
        cur_obs += hist.get(r, 0)
        cur_exp += n * round_pmf(params, r)
        tail = n * round_survival(params, r)
        if tail < min_expected:
            obs_tail = sum(c for k, c in hist.items() if k > r)
            if cur_exp + tail >= min_expected or not bins:
                bins.append([cur_lo, None, cur_obs + obs_tail, cur_exp + tail])
            else:
                bins[-1][1] = None
                bins[-1][2] += cur_obs + obs_tail
                bins[-1][3] += cur_exp + tail
            break
        if cur_exp >= min_expected:
            bins.append([cur_lo, r, cur_obs, cur_exp])
            cur_lo, cur_obs, cur_exp = r + 1, 0, 0.0
        r += 1
    if len(bins) < 2:
        raise DegenerateBinsError("fewer than two bins reach the expected-count floor")
    obs = np.array([b[2] for b in bins], dtype=float)
    exp = np.array([b[3] for b in bins], dtype=float)
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = len(bins) - 1
    return ChiSquareReport(stat, dof, float(stats.chi2.sf(stat, dof)), [tuple(b) for b in bins])


def majority_cdf_check(
    params: ModelParams,
    trials: int,
    seeds,
    threshold: float = CHI2_THRESHOLD,
    *,
    workers: int = 1,
    backend: str | None = None,
) -> tuple[bool, list[float]]:
    """Run the chi-square check for each seed; pass if most p-values exceed ``threshold``."""
    pvals = []
    for s in seeds:
        summ = simulate_parallel(params, trials, s, workers=workers, backend=backend)
        pvals.append(empirical_cdf_check(summ, params).p_value)
    passed = sum(p > threshold for p in pvals)
    return 2 * passed > len(pvals), pvals


def two_sample_chi_square(a: dict[int, int], b: dict[int, int], min_expected: float = 5.0) -> float:
    """p-value that two round histograms come from the same distribution."""
    keys = sorted(set(a) | set(b))
    table = []
    row_a, row_b = 0, 0
    for k in keys:
        row_a += a.get(k, 0)
        row_b += b.get(k, 0)
        if row_a + row_b >= 2 * min_expected:
            table.append([row_a, row_b])
            row_a, row_b = 0, 0
    if row_a or row_b:
        if table:
            table[-1][0] += row_a
            table[-1][1] += row_b
        else:
            table.append([row_a, row_b])
    if len(table) < 2:
        raise DegenerateBinsError("histograms collapse to a single bin")
    return float(stats.chi2_contingency(np.array(table).T, correction=False)[1])
