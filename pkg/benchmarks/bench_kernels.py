"""Time the Jacobi kernels of both backends against each other and LAPACK.

Usage: ``python3 benchmarks/bench_kernels.py [--sizes 20 60 120] [--repeat 3]``
"""
import argparse
import timeit

import numpy as np

from clusterbound import _backend
from clusterbound.linalg import hermitian_eig, svd


def cases(rng, n):
    tall = rng.standard_normal((3 * n, n)) + 1j * rng.standard_normal((3 * n, n))
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return tall, a + a.conj().T


def best_of(fn, repeat):
    number = 1
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[20, 60, 120])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    names = sorted(_backend.BACKENDS)
    print(f"backends: {', '.join(names)} (default {_backend.DEFAULT})")
    header = f"{'kernel':<6s} {'n':>5s} " + " ".join(f"{b + ' [s]':>12s}" for b in names) + f" {'lapack [s]':>12s}"
    if "cython" in names:
        header += f" {'speedup':>8s}"
    print(header)
    for n in args.sizes:
        tall, herm = cases(rng, n)
        for kernel, ours, ref, arg in (("svd", svd, np.linalg.svd, tall),
                                       ("eig", hermitian_eig, np.linalg.eigh, herm)):
            times = {b: best_of(lambda: ours(arg, backend=b), args.repeat) for b in names}
            lapack = best_of(lambda: ref(arg), args.repeat)
            line = f"{kernel:<6s} {n:>5d} " + " ".join(f"{times[b]:12.4f}" for b in names) + f" {lapack:12.4f}"
            if "cython" in names:
                line += f" {times['python'] / times['cython']:8.1f}x"
            print(line)


if __name__ == "__main__":
    main()
