"""Compare the compiled and pure-Python kernel backends.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Each case runs on every available backend; results are checked for
agreement before timings are reported.
"""

import argparse
import time

import numpy as np

from potlab import kernels
from potlab.algebraic_core import BivariatePolynomial, circle_path, solve_fiber


def _best(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases():
    P = BivariatePolynomial.parse("z*y^3 + z*y - 1")
    path = circle_path(0.0, 3.0, 256)
    r0 = solve_fiber(P, path[0])
    rng = np.random.default_rng(1)
    A = rng.standard_normal((2000, 6)) + 1j * rng.standard_normal((2000, 6))
    a = np.array([1.0, -2.0, 0.5, 3.0, 1.0, 1.0], dtype=complex)
    V = rng.standard_normal((201, 201))
    starts = 2.5 * np.exp(2j * np.pi * rng.random(200))
    ends = starts * 1.2
    R0 = np.array([solve_fiber(P, s) for s in starts])
    return {
        "aberth (degree 5) x200": lambda K: [K.aberth(a, None, 200)[0] for _ in range(200)],
        "aberth_batch 2000x5": lambda K: K.aberth_batch(A, None, 200)[0],
        "track circle r=3, integrate": lambda K: K.track(P.C, path, r0, True, 0.125, 60,
                                                         1e-10, 1e-12)[2][-1],
        "track_many 200 segments": lambda K: K.track_many(P.C, starts, R0, ends, True, 0.125,
                                                          60, 1e-10, 1e-12)[1],
        "circle_deficits 201^2": lambda K: K.circle_deficits(V, [1.0, 2.0, 4.0], 32),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backs = kernels.backends()
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(backs)}")
    names = list(backs)
    print(f"{'case':32s}" + "".join(f"{n:>12s}" for n in names) + f"{'speedup':>10s}")
    for name, fn in cases().items():
        times, outs = [], []
        for b in names:
            t, out = _best(lambda: fn(backs[b]), args.repeat)
            times.append(t)
            outs.append(np.nan_to_num(np.sort_complex(np.ravel(np.asarray(out, dtype=complex)))))
        agree = all(np.allclose(outs[0], o, rtol=1e-8, atol=1e-10) for o in outs[1:])
        speed = times[0] / times[-1] if len(times) > 1 else 1.0
        row = f"{name:32s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times) + f"{speed:9.1f}x"
        print(row + ("" if agree else "  MISMATCH"))


if __name__ == "__main__":
    main()
