"""Cyclic Jacobi rotation kernels for complex Hermitian matrices.

Two interchangeable backends: a numba-compiled scalar loop (default when
numba is importable) and a vectorized numpy fallback. Set the environment
variable BEAMFOCUS_BACKEND=numpy to force the fallback; =numba to require
the compiled path. Both run the same rotation schedule (row-major pivot
order, skip threshold tol_off/n) so results agree to rounding.
"""

import math
import os

import numpy as np

ENV_VAR = "BEAMFOCUS_BACKEND"


def _jacobi_cycles_loops(a, v, tol_off, max_sweeps):
    """Diagonalize Hermitian ``a`` in place, accumulating eigenvectors in ``v``.

    Returns (off, sweeps) where off is the final off-diagonal Frobenius mass.
    """
    n = a.shape[0]
    if n < 2:
        return 0.0, 0
    skip = tol_off / n
    sweeps = 0
    off = 0.0
    for sweep in range(max_sweeps):
        rotated = 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= skip:
                    continue
                rotated += 1
                w = apq / r
                theta = 0.5 * math.atan2(2.0 * r, a[p, p].real - a[q, q].real)
                c = math.cos(theta)
                s = math.sin(theta)
                wc = w * c
                ws = w * s
                wcj = wc.conjugate()
                wsj = ws.conjugate()
                for i in range(n):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = aip * wc + aiq * s
                    a[i, q] = -aip * ws + aiq * c
                for i in range(n):
                    api = a[p, i]
                    aqi = a[q, i]
                    a[p, i] = wcj * api + s * aqi
                    a[q, i] = -wsj * api + c * aqi
                # pivot is zero by construction; pin it and keep diagonals real
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real + 0.0j
                a[q, q] = a[q, q].real + 0.0j
                for i in range(n):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = vip * wc + viq * s
                    v[i, q] = -vip * ws + viq * c
        sweeps = sweep + 1
        acc = 0.0
        for i in range(n):
            for k in range(n):
                if i != k:
                    x = a[i, k]
                    acc += x.real * x.real + x.imag * x.imag
        off = math.sqrt(acc)
        if off <= tol_off or rotated == 0:
            break
    return off, sweeps


def jacobi_cycles_numpy(a, v, tol_off, max_sweeps):
    """Vectorized backend with the identical pivot schedule."""
    n = a.shape[0]
    if n < 2:
        return 0.0, 0
    skip = tol_off / n
    sweeps = 0
    off = 0.0
    for sweep in range(max_sweeps):
        rotated = 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= skip:
                    continue
                rotated += 1
                w = apq / r
                theta = 0.5 * math.atan2(2.0 * r, a[p, p].real - a[q, q].real)
                c = math.cos(theta)
                s = math.sin(theta)
                wc = w * c
                ws = w * s
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = colp * wc + colq * s
                a[:, q] = -colp * ws + colq * c
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = np.conj(wc) * rowp + s * rowq
                a[q, :] = -np.conj(ws) * rowp + c * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                colp = v[:, p].copy()
                colq = v[:, q].copy()
                v[:, p] = colp * wc + colq * s
                v[:, q] = -colp * ws + colq * c
        sweeps = sweep + 1
        mag2 = np.abs(a) ** 2
        np.fill_diagonal(mag2, 0.0)
        off = float(np.sqrt(mag2.sum()))
        if off <= tol_off or rotated == 0:
            break
    return off, sweeps


def _onesided_cycles_loops(w, v, tol_rel, max_sweeps):
    """Orthogonalize the columns of ``w`` in place by plane rotations.

    On convergence ``w`` holds sigma_k * u_k per column and ``v`` the
    accumulated right rotations. Column pairs rotate only while their
    relative coherence |w_i* w_j| / (|w_i| |w_j|) exceeds ``tol_rel``, so
    small singular values keep full relative accuracy.
    """
    m = w.shape[1]
    if m < 2:
        return 0.0, 0
    sweeps = 0
    worst = 0.0
    for sweep in range(max_sweeps):
        rotated = 0
        worst = 0.0
        for i in range(m - 1):
            for j in range(i + 1, m):
                a = 0.0
                b = 0.0
                c = 0.0 + 0.0j
                for t in range(w.shape[0]):
                    wi = w[t, i]
                    wj = w[t, j]
                    a += wi.real * wi.real + wi.imag * wi.imag
                    b += wj.real * wj.real + wj.imag * wj.imag
                    c += wi.conjugate() * wj
                r = abs(c)
                scale = math.sqrt(a * b)
                if scale <= 0.0:
                    continue
                coh = r / scale
                if coh > worst:
                    worst = coh
                if coh <= tol_rel:
                    continue
                rotated += 1
                ph = c / r
                theta = 0.5 * math.atan2(2.0 * r, a - b)
                cs = math.cos(theta)
                sn = math.sin(theta)
                pc = ph * cs
                ps = ph * sn
                for t in range(w.shape[0]):
                    wi = w[t, i]
                    wj = w[t, j]
                    w[t, i] = wi * pc + wj * sn
                    w[t, j] = -wi * ps + wj * cs
                for t in range(v.shape[0]):
                    vi = v[t, i]
                    vj = v[t, j]
                    v[t, i] = vi * pc + vj * sn
                    v[t, j] = -vi * ps + vj * cs
        sweeps = sweep + 1
        if rotated == 0:
            break
    return worst, sweeps


def onesided_cycles_numpy(w, v, tol_rel, max_sweeps):
    """Vectorized backend with the identical pair schedule."""
    m = w.shape[1]
    if m < 2:
        return 0.0, 0
    sweeps = 0
    worst = 0.0
    for sweep in range(max_sweeps):
        rotated = 0
        worst = 0.0
        for i in range(m - 1):
            for j in range(i + 1, m):
                wi = w[:, i]
                wj = w[:, j]
                a = float(np.real(np.vdot(wi, wi)))
                b = float(np.real(np.vdot(wj, wj)))
                c = complex(np.vdot(wi, wj))
                r = abs(c)
                scale = math.sqrt(a * b)
                if scale <= 0.0:
                    continue
                coh = r / scale
                worst = max(worst, coh)
                if coh <= tol_rel:
                    continue
                rotated += 1
                ph = c / r
                theta = 0.5 * math.atan2(2.0 * r, a - b)
                cs = math.cos(theta)
                sn = math.sin(theta)
                pc = ph * cs
                ps = ph * sn
                cols = wi * pc + wj * sn
                w[:, j] = -wi * ps + wj * cs
                w[:, i] = cols
                vi = v[:, i].copy()
                vj = v[:, j]
                v[:, i] = vi * pc + vj * sn
                v[:, j] = -vi * ps + vj * cs
        sweeps = sweep + 1
        if rotated == 0:
            break
    return worst, sweeps


try:
    from numba import njit

    jacobi_cycles_numba = njit(cache=True, nogil=True)(_jacobi_cycles_loops)
    onesided_cycles_numba = njit(cache=True, nogil=True)(_onesided_cycles_loops)
except ImportError:  # pragma: no cover - exercised only without numba
    jacobi_cycles_numba = None
    onesided_cycles_numba = None


def _select():
    choice = os.environ.get(ENV_VAR, "").strip().lower()
    if choice == "numpy":
        return "numpy", jacobi_cycles_numpy, onesided_cycles_numpy
    if choice == "numba" and jacobi_cycles_numba is None:
        raise ImportError(f"{ENV_VAR}=numba requested but numba is not importable")
    if jacobi_cycles_numba is None:
        return "numpy", jacobi_cycles_numpy, onesided_cycles_numpy
    return "numba", jacobi_cycles_numba, onesided_cycles_numba


ACTIVE_BACKEND, jacobi_cycles, onesided_cycles = _select()


def active_backend():
    """Name of the kernel backend selected at import time."""
    return ACTIVE_BACKEND
