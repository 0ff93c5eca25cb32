"""Compare the compiled and pure-Python convolution recursions.

Usage: python3 benchmarks/bench_kernels.py [--sizes 1000,10000,100000] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from flatneuro import _kernels_py

try:
    from flatneuro import _ckernels
except ImportError:  # extension not built
    _ckernels = None

CASES = {
    "exp_conv_onesided": lambda mod, x: mod.exp_conv_onesided(x, 1e-3, 2.0),
    "liouville_conv": lambda mod, x: mod.liouville_conv(x, 1e-3, 1.5),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1000,10000,100000")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)
    if _ckernels is None:
        print("compiled extension not available; timing the Python loops only")
    print(f"{'kernel':20s} {'N':>8s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s} {'max diff':>9s}")
    for name, call in CASES.items():
        for n in sizes:
            x = rng.standard_normal(n)
            t_py = min(timeit.repeat(lambda: call(_kernels_py, x), number=1, repeat=args.repeat))
            if _ckernels is None:
                print(f"{name:20s} {n:8d} {1e3 * t_py:10.3f}")
                continue
            t_c = min(timeit.repeat(lambda: call(_ckernels, x), number=1, repeat=args.repeat))
            diff = np.max(np.abs(call(_kernels_py, x) - call(_ckernels, x)))
            print(f"{name:20s} {n:8d} {1e3 * t_py:10.3f} {1e3 * t_c:10.3f} "
                  f"{t_py / t_c:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
