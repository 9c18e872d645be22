#!/usr/bin/env python3
"""Benchmark the numba and numpy kernel backends against each other.

Times the two hot kernels (two-sided Hermitian Jacobi, one-sided SVD
sweeps) on channel Gram fixtures of growing size and checks that both
backends agree. Run directly:

    python3 benchmarks/bench_backends.py [--grids 6,8,12,16] [--repeats 3]

Grid g means a g x g planar array per side, so matrices are g^2 x g^2.
"""

import argparse
import time

import numpy as np

from beamfocus import _kernels
from beamfocus.channel import ChannelParams, exact_channel, gram, layout_pair
from beamfocus.geometry import ArraySpec, Side, optimal_spacing

LAMBDA = 299_792_458.0 / 28e9


def desk_fixture(grid):
    ns_axis = 2 if grid < 8 else 4
    sol = optimal_spacing(grid, grid, ns_axis, LAMBDA, 50.0)
    spec = ArraySpec(n_v=grid, n_h=grid, d_v=sol.d_t, d_h=sol.d_t)
    tx, rx = layout_pair(spec, spec, 50.0)
    h = exact_channel(tx, rx, ChannelParams(wavelength=LAMBDA, distance=50.0))
    return h, gram(h, Side.TX)


def best_time(fn, matrix, tol, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        work = matrix.copy()
        acc = np.eye(matrix.shape[1], dtype=np.complex128)
        start = time.perf_counter()
        fn(work, acc, tol, 100)
        best = min(best, time.perf_counter() - start)
        out = work
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grids", default="6,8,12,16", help="comma-separated per-side grid sizes")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    grids = [int(s) for s in args.grids.split(",")]

    if _kernels.jacobi_cycles_numba is None:
        print("numba backend unavailable; nothing to compare")
        return

    # trigger JIT compilation outside the timed region
    warm = np.eye(4, dtype=np.complex128)
    _kernels.jacobi_cycles_numba(warm.copy(), np.eye(4, dtype=np.complex128), 1e-11, 10)
    _kernels.onesided_cycles_numba(warm.copy(), np.eye(4, dtype=np.complex128), 1e-12, 10)

    print(f"{'kernel':<6} {'dim':>5} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8} {'agreement':>10}")
    for grid in grids:
        h, g = desk_fixture(grid)
        tol_off = 1e-11 * np.linalg.norm(g)

        t_nb, a_nb = best_time(_kernels.jacobi_cycles_numba, g, tol_off, args.repeats)
        t_np, a_np = best_time(_kernels.jacobi_cycles_numpy, g, tol_off, args.repeats)
        gap = float(np.abs(np.sort(np.diag(a_nb).real) - np.sort(np.diag(a_np).real)).max())
        gap /= max(float(np.abs(np.diag(a_nb).real).max()), 1.0)
        print(f"{'eig':<6} {g.shape[0]:>5} {t_nb:>10.3f} {t_np:>10.3f} {t_np / t_nb:>7.1f}x {gap:>10.2e}")

        t_nb, w_nb = best_time(_kernels.onesided_cycles_numba, h, 1e-12, args.repeats)
        t_np, w_np = best_time(_kernels.onesided_cycles_numpy, h, 1e-12, args.repeats)
        s_nb = np.sort(np.linalg.norm(w_nb, axis=0))
        s_np = np.sort(np.linalg.norm(w_np, axis=0))
        gap = float(np.abs(s_nb - s_np).max() / max(s_nb.max(), 1.0))
        print(f"{'svd':<6} {h.shape[0]:>5} {t_nb:>10.3f} {t_np:>10.3f} {t_np / t_nb:>7.1f}x {gap:>10.2e}")


if __name__ == "__main__":
    main()
