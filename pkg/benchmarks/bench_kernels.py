#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Times the two hot primitives (rotation-sequence application and Jacobi SVD
sweeps) plus one representative end-to-end call per backend. Run:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np


def _load_backends():
    from fasst import _kernels_py
    backends = {"python": _kernels_py}
    try:
        from fasst import _kernels
        backends["compiled"] = _kernels
    except ImportError:
        print("compiled extension not available; benchmarking fallback only")
    return backends


def bench(fn, repeats=7):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    backends = _load_backends()
    rows = []

    # rotation sequence: J=512 rotations over a 48 x 4096 sample batch
    n, batch, J = 48, 4096, 512
    base = np.ascontiguousarray(rng.standard_normal((n, batch)))
    pp = rng.integers(1, n, J).astype(np.int64)
    qq = np.array([rng.integers(0, p) for p in pp], dtype=np.int64)
    ang = rng.uniform(-3.1, 3.1, J)
    for name, mod in backends.items():
        work = base.copy()
        t = bench(lambda: mod.rotate_pairs(work, pp, qq, ang, False))
        rows.append((f"rotate_pairs n={n} J={J} batch={batch}", name, t))

    # one Kogbetliantz sweep on a 48 x 48 matrix
    a0 = np.ascontiguousarray(rng.standard_normal((48, 48)))
    for name, mod in backends.items():
        def sweep():
            a = a0.copy()
            u = np.eye(48)
            v = np.eye(48)
            mod.kogbetliantz_sweep(a, u, v)
        rows.append(("kogbetliantz_sweep n=48", name, bench(sweep)))

    # end to end: full Jacobi SVD through the public API per backend
    import fasst.backend as backend_mod
    from fasst import linalg
    m = rng.standard_normal((48, 48))
    for name, mod in backends.items():
        saved = backend_mod.kogbetliantz_sweep
        backend_mod.kogbetliantz_sweep = mod.kogbetliantz_sweep
        linalg.kogbetliantz_sweep = mod.kogbetliantz_sweep
        try:
            rows.append(("jacobi_svd n=48", name, bench(lambda: linalg.jacobi_svd(m))))
        finally:
            backend_mod.kogbetliantz_sweep = saved
            linalg.kogbetliantz_sweep = saved

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  backend   best (ms)")
    base_times = {}
    for label, name, t in rows:
        base_times.setdefault(label, {})[name] = t
    for label, times in base_times.items():
        for name, t in times.items():
            speedup = ""
            if name == "compiled" and "python" in times:
                speedup = f"  ({times['python'] / t:.1f}x vs python)"
            print(f"{label:<{width}}  {name:<8}  {t * 1e3:9.3f}{speedup}")


if __name__ == "__main__":
    main()
