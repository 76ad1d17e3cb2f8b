"""Time the compiled kernels against the NumPy fallback.

Usage: ``python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]``
"""
import argparse
import json
import time

import numpy as np

from randzeros import _kernels_py
from randzeros.logarray import LogComplexArray
from randzeros.rootfinding import initial_guesses

try:
    from randzeros import _kernels
except ImportError:  # extension not built
    _kernels = None


def _poly(deg, seed=0):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
    return LogComplexArray.from_complex(c)


def cases():
    for deg in (64, 256):
        zeta = _poly(deg)
        cm, ce = zeta.to_scaled()
        init = initial_guesses(zeta.logabs)
        zm, ze = init.to_scaled()
        pts = LogComplexArray.from_complex(np.exp(2j * np.pi * np.arange(1024) / 1024) * 1.3)
        pm, pe = pts.to_scaled()
        yield f"horner deg={deg} pts=1024", lambda k, a=(cm, ce, pm, pe): k.horner(*a)
        yield f"aberth deg={deg}", lambda k, a=(cm, ce, zm, ze): k.aberth(*a, 1e-12, 500)
    t = np.sort(np.random.default_rng(1).uniform(-2, 2, 40))
    yield "fekete_sweeps interval n=40", lambda k: k.fekete_sweeps(t, 1, 0.0, 0.0, -2.0, 2.0, 50, 1e-12)
    z = np.exp(2j * np.pi * np.arange(500) / 500)
    yield "log_vandermonde n=500", lambda k: k.log_vandermonde(z)


def best_time(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json")
    args = ap.parse_args(argv)
    rows = []
    print(f"{'case':34s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, fn in cases():
        tp = best_time(lambda: fn(_kernels_py), args.repeat)
        tc = best_time(lambda: fn(_kernels), args.repeat) if _kernels else float("nan")
        rows.append({"case": name, "python": tp, "cython": tc, "speedup": tp / tc})
        print(f"{name:34s} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
