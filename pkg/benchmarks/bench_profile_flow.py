"""Compare the compiled and numpy profile-flow kernels.

Runs a fixed number of explicit steps on the same convex start with each
backend, reports steps per second and the largest difference between the
resulting profiles.  Usage::

    python benchmarks/bench_profile_flow.py [--steps 2000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from orbiflow.mcf import _backend
from orbiflow.mcf.profile import CFL


def start(n_psi):
    psi = np.linspace(0.0, np.pi, n_psi)
    return 0.6 + 0.05 * np.cos(2 * psi) - 0.01 * np.cos(4 * psi)


def time_kernel(kern, n_psi, steps, repeat):
    best = np.inf
    for _ in range(repeat):
        r = start(n_psi)
        t0 = time.perf_counter()
        kern.advance_profile(r, np.pi / (n_psi - 1), 1.0, CFL, 0.0, 0.0, steps)
        best = min(best, time.perf_counter() - t0)
    return best, r


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--sizes", default="101,401,1601")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    names = ["python"] + (["compiled"] if _backend.compiled_kernels is not None else [])
    print(f"{'n_psi':>6} {'backend':>9} {'steps/s':>12} {'speedup':>8} {'max |dr|':>10}")
    for n in sizes:
        times, results = {}, {}
        for name in names:
            times[name], results[name] = time_kernel(_backend.get(name), n, args.steps, args.repeat)
        for name in names:
            diff = np.max(np.abs(results[name] - results["python"]))
            print(
                f"{n:>6} {name:>9} {args.steps / times[name]:>12.0f} "
                f"{times['python'] / times[name]:>8.1f} {diff:>10.2e}"
            )


if __name__ == "__main__":
    main()
