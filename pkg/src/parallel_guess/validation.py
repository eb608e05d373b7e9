"""Cross-route consistency checks run by ``parallel-guess validate``."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .asymptotic import (
    beta_closed,
    beta_constant,
    mean_rounds_asymptotic,
    oscillation_amplitude,
    u_sum_asymptotic,
)
from .exact import (
    knuth_identity_residual,
    mean_rounds_alternating_exact,
    mean_rounds_survival,
    to_rational,
    u_sum_exact,
)
from .gammafn import complex_gamma, gamma_modulus_neg1
from .model import validate
from .simulate import majority_cdf_check, simulate_serial

ALPHABETS = (2, 3, 5, 10, 40)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str
    elapsed_ms: float = 0.0


def check_knuth_identity(quick: bool = False, **_) -> CheckResult:
    lengths = range(1, 21 if quick else 101)
    bad = [(K, L) for K in ALPHABETS for L in lengths if knuth_identity_residual(validate(K, L)) != 0]
    return CheckResult(
        "knuth-identity", not bad, float(len(bad)), 0.0,
        f"nonzero residuals at {bad[:5]}" if bad else f"residual exactly 0 for L=1..{lengths[-1]}",
    )


def check_survival_vs_rational(quick: bool = False, **_) -> CheckResult:
    worst = 0.0
    for K in ALPHABETS:
        for L in range(1, 21 if quick else 101):
            p = validate(K, L)
            exact = float(mean_rounds_alternating_exact(p))
            worst = max(worst, abs(mean_rounds_survival(p, 1e-12).value - exact) / exact)
    return CheckResult("survival-vs-rational", worst <= 1e-10, worst, 1e-10, "max relative difference")


def check_gamma_oracle(quick: bool = False, perturb_gamma: float = 0.0, **_) -> CheckResult:
    worst = 0.0
    for t in np.linspace(1.0, 60.0, 60 if quick else 600):
        g = abs(complex_gamma(complex(-1.0, t), perturb=perturb_gamma))
        worst = max(worst, abs(g / gamma_modulus_neg1(t) - 1.0))
    g_half = complex_gamma(0.5, perturb=perturb_gamma).real
    worst = max(worst, abs(g_half / math.sqrt(math.pi) - 1.0))
    return CheckResult("gamma-oracle", worst <= 1e-11, worst, 1e-11, "|Gamma(-1+it)| closed form, t in [1, 60]; Gamma(1/2)")


def check_periodicity(quick: bool = False, **_) -> CheckResult:
    worst = 0.0
    for K in (2, 5, 40):
        X = K / (K - 1)
        for L in np.geomspace(2.0, 1e6, 20 if quick else 100):
            worst = max(worst, abs(beta_closed(K, X * L) - beta_closed(K, L)))
    return CheckResult("periodicity", worst <= 1e-13, worst, 1e-13, "beta(X L) - beta(L)")


def check_amplitude(quick: bool = False, **_) -> CheckResult:
    amp = oscillation_amplitude(2)
    const = beta_constant(2)
    pts = 200 if quick else 1000
    sup = max(abs(beta_closed(2, 1000.0 * 2.0 ** (i / pts)) - const) for i in range(pts))
    ok = amp <= 2e-6 and sup <= amp
    return CheckResult("amplitude-bound", ok, amp, 2e-6, f"bound {amp:.6g}, sampled sup {sup:.6g} over {pts} points")


def check_headline(**_) -> CheckResult:
    p = validate(40, 20000)
    surv = mean_rounds_survival(p, 1e-12).value
    asym = mean_rounds_asymptotic(p)
    diff = abs(surv - asym.total)
    ok = diff <= 0.01 and abs(asym.leading - 391.2) <= 0.1
    return CheckResult("headline-k40-l20000", ok, diff, 0.01, f"leading {asym.leading:.6g}, survival {surv:.10g}, asymptotic {asym.total:.10g}")


def check_de_bruijn(quick: bool = False, **_) -> CheckResult:
    worst = 0.0
    sizes = (100,) if quick else (100, 1000)
    for m in ("2", "3/2", "40/39"):
        mq = to_rational(m)
        for n in sizes:
            exact = float(u_sum_exact(mq, n, cap=n))
            worst = max(worst, abs(u_sum_asymptotic(float(mq), n) - exact) * n)
    # largest measured scaled residual is ~3.3 (m = 40/39)
    return CheckResult("de-bruijn-remainder", worst <= 5.0, worst, 5.0, "max n |asymptotic - exact|")


def check_simulation(quick: bool = False, **_) -> CheckResult:
    trials, seeds = (20_000, 5) if quick else (1_000_000, 20)
    ok, pvals = majority_cdf_check(validate(2, 2), trials, range(seeds))
    return CheckResult("simulation-chi-square", ok, float(np.median(pvals)), 1e-3, f"median p over {seeds} seeds, {trials} trials")


def check_serial(quick: bool = False, **_) -> CheckResult:
    # quick mode uses a 5-seed majority: a single 1e5-trial run sits beyond
    # 3 standard errors about 0.3% of the time
    trials, seeds = (100_000, range(5)) if quick else (1_000_000, range(1))
    zs = []
    for seed in seeds:
        s = simulate_serial(validate(2, 3), trials, seed)
        zs.append(abs(s.mean - 8.0) / s.std_error)
    ok = 2 * sum(z <= 3.0 for z in zs) > len(zs)
    return CheckResult("serial-baseline", ok, float(np.median(zs)), 3.0, f"median |z| vs K**L = 8 over {len(zs)} seed(s), {trials} trials")


CHECKS: tuple[Callable[..., CheckResult], ...] = (
    check_knuth_identity,
    check_survival_vs_rational,
    check_gamma_oracle,
    check_periodicity,
    check_amplitude,
    check_headline,
    check_de_bruijn,
    check_simulation,
    check_serial,
)


def run_checks(quick: bool = False, perturb_gamma: float = 0.0) -> list[CheckResult]:
    out = []
    for check in CHECKS:
        t0 = time.perf_counter()
        res = check(quick=quick, perturb_gamma=perturb_gamma)
        elapsed = (time.perf_counter() - t0) * 1e3
        out.append(CheckResult(res.name, res.passed, res.measured, res.tolerance, res.detail, elapsed))
    return out
