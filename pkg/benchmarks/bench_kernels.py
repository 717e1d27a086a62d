"""Time the compiled grid update against the numpy fallback.

    python benchmarks/bench_kernels.py --bits 14 16 --experiments 1000
"""

import argparse
import time

import numpy as np

from eqsp import _fallback, bayes


def _time(fn, logw, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        w = logw.copy()
        t0 = time.perf_counter()
        fn(w, *args)
        best = min(best, time.perf_counter() - t0)
    return best, w


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bits", type=int, nargs="+", default=[12, 14, 16])
    ap.add_argument("--experiments", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    try:
        from eqsp._kernels import apply_batch as compiled
    except ImportError:
        compiled = None
    print(f"default kernel: {bayes.KERNEL}")
    print(f"{'bits':>4} {'n':>6} {'numpy s':>9} {'cython s':>9} {'speedup':>8} {'ns/term':>8} {'max|diff|':>10}")
    for m in args.bits:
        G = 1 << m
        n = args.experiments
        k = rng.integers(1, 2000, size=n).astype(np.int64)
        theta = rng.uniform(0, 2 * np.pi, size=n)
        v = rng.uniform(0.5, 1.0, size=n)
        a, b = v * np.cos(theta), v * np.sin(theta)
        ctab, stab = bayes._trig_tables(G)
        logw = np.zeros(G)
        tf, wf = _time(_fallback.apply_batch, logw, (k, a, b, ctab, stab), args.repeat)
        if compiled is None:
            print(f"{m:>4} {n:>6} {tf:>9.3f} {'-':>9}")
            continue
        tc, wc = _time(compiled, logw, (k, a, b, ctab, stab), args.repeat)
        diff = float(np.max(np.abs(wf - wc)))
        print(f"{m:>4} {n:>6} {tf:>9.3f} {tc:>9.3f} {tf / tc:>8.1f} {1e9 * tc / (G * n):>8.2f} {diff:>10.2e}")


if __name__ == "__main__":
    main()
