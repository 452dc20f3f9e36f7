"""Compare the numba and numpy implementations of the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--sizes 4096 16384]

Both variants are timed in the same process (the numba functions are
called directly, so the env flag does not matter here). The first numba
call, which includes compilation or a cache load, is reported separately.
"""
import argparse
import time

import numpy as np

from qpgstreak import kernels
from qpgstreak._accel import USE_NUMBA


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(n):
    rng = np.random.default_rng(0)
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    p = rng.normal(size=n) + 1j * rng.normal(size=n)
    z = np.linspace(0.0, 27000.0, 2049)
    g = np.exp(-((z - 13500.0) / 9000.0) ** 2) + 0j
    dk = np.linspace(-0.05, 0.05, n)
    vals = rng.normal(size=4 * n)
    bins = np.repeat(np.arange(n), 4)
    return {
        "circular_convolve": (lambda: kernels.circular_convolve_centered_nb(c, p),
                              lambda: kernels.circular_convolve_centered_np(c, p)),
        "filon_profile": (lambda: kernels.filon_profile_nb(dk, z, g),
                          lambda: kernels.filon_profile_np(dk, z, g)),
        "binned_std": (lambda: kernels.binned_std_nb(vals, bins, n),
                       lambda: kernels.binned_std_np(vals, bins, n)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[4096, 16384])
    args = ap.parse_args(argv)
    if not USE_NUMBA:
        print("numba unavailable or disabled; timing the numpy kernels only")
    print(f"{'kernel':<18} {'n':>6} {'numpy s':>10} {'numba s':>10} {'first nb s':>11} "
          f"{'speedup':>8} {'max |diff|':>11}")
    for n in args.sizes:
        for name, (nb, npf) in cases(n).items():
            t_np = best_of(npf, args.repeat)
            if USE_NUMBA:
                t = time.perf_counter()
                a = nb()
                first = time.perf_counter() - t
                t_nb = best_of(nb, args.repeat)
                diff = float(np.max(np.abs(a - npf())))
                print(f"{name:<18} {n:>6} {t_np:>10.4f} {t_nb:>10.4f} {first:>11.4f} "
                      f"{t_np / t_nb:>8.1f} {diff:>11.2e}")
            else:
                print(f"{name:<18} {n:>6} {t_np:>10.4f} {'-':>10} {'-':>11} {'-':>8} {'-':>11}")


if __name__ == "__main__":
    main()
