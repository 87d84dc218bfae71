"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from urlab import _pykernels, kernels

try:
    from urlab import _ckernels
except ImportError:
    _ckernels = None


def _cases(rng):
    out = {}
    for d in (4, 8, 16):
        S = rng.standard_normal((d, 1)) + 1j * rng.standard_normal((d, 1))
        mats = rng.standard_normal((3, d, d)) + 1j * rng.standard_normal((3, d, d))
        mats = (mats + mats.conj().transpose(0, 2, 1)) / 2
        out[f"gram_moments d={d} m=3"] = ("gram_moments", (S, mats))
    for n in (16, 64, 256):
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        out[f"lagrange_gram_det n={n}"] = ("lagrange_gram_det", (u, v))
    for n in (16, 36):
        g = rng.standard_normal(n)
        L = rng.standard_normal((n, n))
        M = L @ L.T
        cs = rng.standard_normal((4096, n))
        out[f"best_ratio n={n} samples=4096"] = ("best_ratio", (g, M, cs))
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=200)
    args = p.parse_args(argv)
    rng = np.random.default_rng(0)
    impls = {"numpy": _pykernels}
    if _ckernels is not None:
        impls["cython"] = _ckernels
    print(f"default backend: {kernels.BACKEND}")
    header = f"{'kernel':34s}" + "".join(f"{name:>14s}" for name in impls) + "   speedup"
    print(header)
    print("-" * len(header))
    for label, (fn, fargs) in _cases(rng).items():
        times = {}
        for name, impl in impls.items():
            call = lambda: getattr(kernels, fn)(*fargs, impl=impl)  # noqa: E731
            call()
            times[name] = min(timeit.repeat(call, number=args.repeat, repeat=3)) / args.repeat
        row = f"{label:34s}" + "".join(f"{t * 1e6:12.1f}us" for t in times.values())
        if "cython" in times:
            row += f"   {times['numpy'] / times['cython']:6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
