"""Time the compiled sampling kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--trials N] [--repeat R]
"""
from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from parallel_guess.kernels import BACKENDS

CASES = [
    ("parallel K=40 L=20000", "parallel_rounds", (40, 20000)),
    ("parallel K=2 L=1000", "parallel_rounds", (2, 1000)),
    ("serial K=2 L=20", "serial_rounds", (2, 20)),
]


def run_case(backend, kernel: str, K: int, L: int, trials: int):
    log_q = math.log1p(-1.0 / K)
    fn = getattr(backend, kernel)
    if kernel == "parallel_rounds":
        return fn(1, 0, trials, L, log_q)
    # serial: each trial is one geometric draw with success probability K**-L
    return fn(1, 0, trials, math.log1p(-float(K) ** -L))


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    names = sorted(BACKENDS)
    print(f"backends: {', '.join(names)}")
    print(f"{'case':<24}" + "".join(f"{n + ' (s)':>14}" for n in names) + f"{'speedup':>10}")
    for label, kernel, (K, L) in CASES:
        outputs, times = {}, {}
        for n in names:
            outputs[n] = run_case(BACKENDS[n], kernel, K, L, args.trials)
            times[n] = min(timeit.repeat(lambda: run_case(BACKENDS[n], kernel, K, L, args.trials),
                                         number=1, repeat=args.repeat))
        if len(names) > 1:
            ref = outputs[names[0]]
            assert all(np.array_equal(ref, o) for o in outputs.values()), f"backends disagree on {label}"
        speed = f"{times['python'] / times['native']:>9.1f}x" if "native" in times else f"{'-':>10}"
        print(f"{label:<24}" + "".join(f"{times[n]:>14.4f}" for n in names) + speed)


if __name__ == "__main__":
    main()
