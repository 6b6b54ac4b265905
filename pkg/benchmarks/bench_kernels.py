"""Compare the compiled and pure-Python kernels on the hot loops.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3]

Each workload is sized so the Python backend takes about a second; results of
the two backends are also checked for bit equality.
"""

import argparse
import time

import numpy as np

from randrec import kernels
from randrec import systems as S
from randrec.measure import EmpiricalMeasure
from randrec.rng import STREAM_NOISE, derive_seeds
from randrec.slopes import geometric_grid


def workloads():
    m23, cat = S.markov23(), S.cat_maps()
    grid = geometric_grid(2.0**-4, 0.5, 6)
    seeds = derive_seeds(0, 0, 200, STREAM_NOISE)
    x1 = np.full((200, 1), 0.3137)
    x2 = np.full((200, 2), 0.3137)
    rng = np.random.default_rng(0)
    mu = EmpiricalMeasure.from_samples(S.Space.TORUS2, rng.random((200_000, 2)), r_min=0.01)
    queries = rng.random((2000, 2))
    stream = S.NoiseStream(m23.noise, 1)

    return {
        "orbit markov23 (2e5 steps)": lambda k: k.orbit(*m23.pack(), stream.state, np.array([0.3]), 200_000)[0],
        "return_times_batch markov23": lambda k: k.return_times_batch(*m23.pack(), seeds, x1, x1, grid, 8, 10**5),
        "return_times_batch cat maps": lambda k: k.return_times_batch(*cat.pack(), seeds[:50], x2[:50], x2[:50], grid[:4], 8, 10**5),
        "ball_count torus (2000 queries)": lambda k: np.array(
            [k.ball_count(mu.samples, mu.cell_start, mu.m, True, q, 0.02) for q in queries]
        ),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if "cython" not in kernels.available():
        print("compiled backend not built; nothing to compare")
        return
    print(f"{'workload':36s} {'python s':>10s} {'cython s':>10s} {'speedup':>9s}  equal")
    for name, fn in workloads().items():
        times, outs = {}, {}
        for backend in ("python", "cython"):
            with kernels.using(backend) as k:
                best = float("inf")
                for _ in range(args.repeat):
                    t0 = time.perf_counter()
                    outs[backend] = fn(k)
                    best = min(best, time.perf_counter() - t0)
                times[backend] = best
        same = np.array_equal(outs["python"], outs["cython"])
        print(f"{name:36s} {times['python']:10.3f} {times['cython']:10.4f} {times['python'] / times['cython']:8.0f}x  {same}")


if __name__ == "__main__":
    main()
