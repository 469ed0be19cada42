"""Compare the compiled and numpy ladder kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Times a single monomial application on several state sizes and a full
criteria battery, once per available backend, and prints the speedup.
"""

import argparse
import timeit

from fockwit import kernels
from fockwit.fock import ModeMonomial, apply_monomial
from fockwit.states import random_pure, random_separable_mixture
from fockwit.witnesses import BatteryConfig, run_battery

MONOMIAL_CASES = [
    ((10, 10, 10), ModeMonomial((1, 0, 2), (0, 2, 1))),
    ((20, 20, 20), ModeMonomial((1, 1, 1), (2, 2, 2))),
    ((8, 8, 8, 8), ModeMonomial((1, 0, 1, 0), (0, 1, 0, 1))),
    ((64, 64), ModeMonomial((2, 1), (1, 3))),
]


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench(repeat: int):
    rows = []
    for dims, m in MONOMIAL_CASES:
        s = random_pure(dims, 0)
        rows.append((f"apply {m.raise_}/{m.lower} on {dims}", lambda s=s, m=m: apply_monomial(m, s)))
    rho = random_separable_mixture((6, 6, 6), 4, seed=0).to_density()
    rows.append(("apply on density (6,6,6)", lambda: apply_monomial(MONOMIAL_CASES[0][1], rho)))
    for dims in [(10, 10, 10), (8, 8, 8, 8)]:
        s = random_pure(dims, 1)
        rows.append((f"battery D=2 on {dims}", lambda s=s: run_battery(s, BatteryConfig(max_degree=2))))

    backends = kernels.available_backends()
    previous = kernels.BACKEND
    results = {}
    try:
        for name in backends:
            kernels.set_backend(name)
            for label, fn in rows:
                fn()  # warm caches
                results[label, name] = best_time(fn, repeat)
    finally:
        kernels.set_backend(previous)

    head = f"{'case':<48}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        head += f"{'speedup':>10}"
    print(head)
    print("-" * len(head))
    for label, _ in rows:
        line = f"{label:<48}" + "".join(f"{results[label, b] * 1e3:>10.3f}ms" for b in backends)
        if len(backends) == 2:
            line += f"{results[label, 'python'] / results[label, 'cython']:>9.1f}x"
        print(line)
    if "cython" not in backends:
        print("\ncompiled extension not built; only the numpy fallback was timed")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    bench(args.repeat)


if __name__ == "__main__":
    main()
