"""Compare the compiled and numpy stencil backends.

    python benchmarks/bench_kernels.py [--repeat 20]

Prints per-call time for each backend, the speedup, and the largest
difference between the two results.
"""
import argparse
import timeit

import numpy as np

from regularframe import _kernels_py

try:
    from regularframe import _kernels
except ImportError:  # extension not built
    _kernels = None

CASES = [("1d", (65536,)), ("3d", (64, 64, 64))]


def make_inputs(shape, rng):
    phi = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    Pi = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    inv_b = 1.0 + 0.1 * rng.random(shape)
    s_m2 = 1.0 + 0.1 * rng.random(shape)
    faces = [1.0 + 0.1 * rng.random(shape) for _ in shape]
    h = 2.0 * 16.0 / shape[0]
    return phi, Pi, inv_b, s_m2, faces, 1.0 / h**2


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    rng = np.random.Generator(np.random.Philox(key=0))
    print(f"{'case':<6}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>10}{'max diff':>12}")
    for name, shape in CASES:
        inputs = make_inputs(shape, rng)
        t_py = min(timeit.repeat(lambda: _kernels_py.kg_momentum_rhs(*inputs), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{name:<6}{1e3 * t_py:>12.3f}{'n/a':>13}{'':>10}{'':>12}")
            continue
        t_cy = min(timeit.repeat(lambda: _kernels.kg_momentum_rhs(*inputs), number=1, repeat=args.repeat))
        a = _kernels_py.kg_momentum_rhs(*inputs)
        b = _kernels.kg_momentum_rhs(*inputs)
        diff = max(float(np.max(np.abs(x - y))) for x, y in zip(a, b))
        print(f"{name:<6}{1e3 * t_py:>12.3f}{1e3 * t_cy:>13.3f}{t_py / t_cy:>10.2f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
