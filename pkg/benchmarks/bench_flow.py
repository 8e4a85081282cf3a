#!/usr/bin/env python3
"""Benchmark the compiled flow kernel against the pure numpy twin.

Times RK4 chart integration for linear and squared-expectation Hamiltonians
on CP^1..CP^3, the workloads that dominate the acceptance suite (loop
transport, Liouville transport, flow-map Jacobians).

Run:  python3 benchmarks/bench_flow.py [--t 2.0] [--dt 1e-3] [--repeat 3]
"""

import argparse
import time

import numpy as np

from gqm._kernels import backends
from gqm.states import Observable


def time_case(impl, a, power, coords, t, dt, repeat):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        impl.rk4_chart_flow(a, power, 0, coords, t, dt, 1.0, record_stride=0)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--t", type=float, default=2.0)
    parser.add_argument("--dt", type=float, default=1e-3)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    impls = backends()
    if len(impls) < 2:
        print("note: compiled backend unavailable; timing the pure kernel only")

    rng = np.random.default_rng(0)
    steps = int(np.ceil(args.t / args.dt))
    print(f"RK4 chart flow, t={args.t}, dt={args.dt} ({steps} steps), "
          f"best of {args.repeat}\n")
    header = f"{'case':<28}" + "".join(f"{name:>14}" for name in sorted(impls))
    if len(impls) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))

    for dim in (2, 3, 4):
        for power, label in ((1, "linear"), (2, "expectation^2")):
            a = Observable.random(dim, rng).matrix
            coords = rng.uniform(-0.8, 0.8, size=2 * (dim - 1))
            times = {
                name: time_case(impl, a, power, coords, args.t, args.dt,
                                args.repeat)
                for name, impl in impls.items()
            }
            row = f"CP^{dim - 1} {label:<22}"
            for name in sorted(times):
                row += f"{times[name] * 1e3:>11.2f} ms"
            if len(times) == 2:
                row += f"{times['python'] / times['cython']:>9.1f}x"
            print(row)


if __name__ == "__main__":
    main()
