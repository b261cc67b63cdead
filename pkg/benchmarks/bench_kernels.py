"""Benchmark: compiled kernel-sum extension vs the NumPy fallback.

Times the hot primitive (frame_kernel_sums) on synthetic workloads of
growing size and checks that both implementations agree. Run with:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from kernpot import _kernel_py

try:
    from kernpot import _kernel_ext
except ImportError:
    _kernel_ext = None


def make_workload(rng, n_frames, atoms_per_frame, dim, n_species=2):
    total = n_frames * atoms_per_frame
    x = np.ascontiguousarray(rng.normal(size=(total, dim)))
    offsets = np.arange(0, total + 1, atoms_per_frame, dtype=np.int64)
    species = rng.integers(1, n_species + 1, size=total).astype(np.int64)
    return x, offsets, species


def time_call(fn, *args, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    rng = np.random.default_rng(0)
    print(f"{'T':>5} {'n':>4} {'d':>4} {'kernel':>8} {'numpy (s)':>10} "
          f"{'compiled (s)':>12} {'speedup':>8}  agreement")
    for n_frames, atoms, dim in ((40, 10, 16), (80, 20, 32), (160, 30, 32), (240, 40, 64)):
        x, off, sp = make_workload(rng, n_frames, atoms, dim)
        for kind, sigma, label in ((1, 1.0, "gaussian"), (0, 0.0, "linear")):
            args = (x, off, sp, x, off, sp, 2, kind, sigma, True)
            t_py, (tot_py, sp_py) = time_call(_kernel_py.frame_kernel_sums, *args)
            if _kernel_ext is None:
                print(f"{n_frames:>5} {atoms:>4} {dim:>4} {label:>8} {t_py:>10.4f} "
                      f"{'(not built)':>12}")
                continue
            t_c, (tot_c, sp_c) = time_call(_kernel_ext.frame_kernel_sums, *args)
            scale = max(1.0, np.abs(tot_py).max())
            err = max(
                np.abs(tot_c - tot_py).max() / scale,
                np.abs(sp_c - sp_py).max() / scale,
            )
            print(f"{n_frames:>5} {atoms:>4} {dim:>4} {label:>8} {t_py:>10.4f} "
                  f"{t_c:>12.4f} {t_py / t_c:>7.2f}x  max rel diff {err:.1e}")


if __name__ == "__main__":
    main()
