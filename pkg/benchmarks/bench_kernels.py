"""Benchmark of the hot elementwise kernels: numba-compiled vs pure numpy.

Run as `python3 benchmarks/bench_kernels.py [n_samples]`. The same
comparison is available end to end by setting ROFSIM_NO_NUMBA=1 before
importing rofsim.
"""

import sys
import time

import numpy as np

from rofsim import _kernels


def _time(fn, *args, reps: int = 20) -> float:
    fn(*args)  # warm-up (and numba compilation)
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 2**20
    rng = np.random.default_rng(0)
    d = rng.standard_normal(n)
    q = rng.standard_normal(n)
    env = (rng.standard_normal(n) + 1j * rng.standard_normal(n)).astype(np.complex128)
    env2 = (rng.standard_normal(n) + 1j * rng.standard_normal(n)).astype(np.complex128)
    i_other = rng.standard_normal(n)

    cases = [
        ("ssb_operator", (d, q, 0.9), _kernels.ssb_operator, _kernels._ssb_operator_np),
        ("intensity", (env, env2, 0.8), _kernels.intensity, _kernels._intensity_np),
        (
            "scaled_intensity_diff",
            (env, 0.1, i_other),
            _kernels.scaled_intensity_diff,
            _kernels._scaled_intensity_diff_np,
        ),
    ]

    print(f"n = {n}, numba active: {_kernels.USING_NUMBA}")
    print(f"{'kernel':24s} {'numpy ms':>10s} {'active ms':>10s} {'speedup':>8s}")
    for name, args, active, numpy_fn in cases:
        t_np = _time(numpy_fn, *args) * 1e3
        t_active = _time(active, *args) * 1e3
        ratio = t_np / t_active if t_active > 0 else float("inf")
        print(f"{name:24s} {t_np:10.3f} {t_active:10.3f} {ratio:7.2f}x")
        ref = numpy_fn(*args)
        got = active(*args)
        err = float(np.max(np.abs(ref - got)))
        if err > 1e-9:
            raise SystemExit(f"{name}: kernel paths disagree (max err {err:.3g})")


if __name__ == "__main__":
    main()
