"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from fockcascade import _kernels_py, kernels

try:
    from fockcascade import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def aberth_case(deg, rng):
    roots = rng.normal(size=deg) + 1j * rng.normal(size=deg)
    coeffs = np.poly(roots)[::-1].astype(complex)
    z0 = 1.5 * np.exp(2j * np.pi * (np.arange(deg) + 0.25) / deg)
    return lambda mod: mod.aberth(coeffs, z0.copy(), 500, 1e-14)


def walk_case(shots, stages, width, rng):
    u = rng.random((shots, stages))
    p = rng.random((stages, width))
    cdf = np.ascontiguousarray(np.cumsum(p / p.sum(axis=1, keepdims=True), axis=1))
    target = np.zeros(stages, dtype=np.int64)
    target[:] = np.argmax(p, axis=1)
    return lambda mod: mod.walk_shots(u, cdf, target)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(1)
    cases = {
        "aberth deg 8": aberth_case(8, rng),
        "aberth deg 32": aberth_case(32, rng),
        "walk 65536x3": walk_case(1 << 16, 3, 40, rng),
        "walk 65536x9": walk_case(1 << 16, 9, 40, rng),
    }
    print(f"selected backend: {kernels.BACKEND}")
    if _kernels_c is None:
        print("compiled kernels not built; timing the fallback only")
    print(f"{'case':<16}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, fn in cases.items():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if _kernels_c is None:
            print(f"{name:<16}{t_py:>12.3f}{'-':>12}{'-':>10}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_kernels_c), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<16}{t_py:>12.3f}{t_c:>12.3f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
