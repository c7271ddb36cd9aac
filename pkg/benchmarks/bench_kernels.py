"""Time the numba and numpy kernel backends against each other.

    python3 benchmarks/bench_kernels.py [--size 512] [--repeat 5]

The first numba call compiles (or loads the on-disk cache), so each kernel
is warmed up once before timing. Outputs of both backends are compared and
the script exits non-zero if they ever differ.
"""

import argparse
import sys
import time

import numpy as np

from medaug import _accel
from medaug.rng import expand_seed


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases(size, n_draws):
    src = np.random.default_rng(0).integers(0, 256, (size, size, 3), dtype=np.uint8)
    out = int(round(size * 1.2))
    return {
        "resize_bilinear": lambda k: k["resize_bilinear"](src, out, out, 1.2),
        "shear_bilinear": lambda k: k["shear_bilinear"](src, 0.2, 0.0),
        "gaussians": lambda k: k["gaussians"](expand_seed(42, 0), n_draws, 0.0, 10.0),
        "betas": lambda k: k["betas"](expand_seed(42, 1), n_draws, 0.4)[0],
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=512, help="square image side")
    parser.add_argument("--draws", type=int, default=1_000_000, help="samples per sampler call")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    if "numba" not in _accel.KERNELS:
        print("numba is not available; nothing to compare", file=sys.stderr)
        return 1

    mismatch = False
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, run in cases(args.size, args.draws).items():
        ref = run(_accel.KERNELS["numpy"])
        got = run(_accel.KERNELS["numba"])  # warm-up / compile
        if not np.array_equal(ref, got):
            mismatch = True
            print(f"{name}: backends disagree", file=sys.stderr)
        t_np = best_of(lambda: run(_accel.KERNELS["numpy"]), args.repeat)
        t_nb = best_of(lambda: run(_accel.KERNELS["numba"]), args.repeat)
        print(f"{name:<18}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>9.1f}x")
    return 1 if mismatch else 0


if __name__ == "__main__":
    sys.exit(main())
