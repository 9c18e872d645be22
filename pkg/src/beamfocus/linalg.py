"""Dense complex linear algebra on top of a self-contained Jacobi eigensolver.

Everything downstream (channel Grams, SVD beamformers, OMP least squares)
goes through these routines, so the eigensolver keeps a deterministic
rotation schedule and the SVD keeps a deterministic basis completion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

HERMITIAN_ASYMMETRY_RTOL = 1e-10
EIG_OFFDIAG_RTOL = 1e-11
SVD_RANK_RTOL = 1e-10
SVD_COHERENCE_TOL = 1e-12
GRAM_COND_LIMIT = 1e12
_MAX_SWEEPS = 100


class NonSquareError(ValueError):
    pass


class NonHermitianError(ValueError):
    pass


class IllConditionedBasisError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenSpectrum:
    """Real eigenvalues in non-increasing order with matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD: ``a = left @ diag(singular_values) @ right.conj().T``."""

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray


def _as_complex_matrix(a):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D array, got ndim={a.ndim}")
    if a.size == 0:
        raise ValueError("expected a non-empty matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def eig_hermitian(a, tol: float = EIG_OFFDIAG_RTOL) -> EigenSpectrum:
    """Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Sweeps run in row-major pivot order until the off-diagonal Frobenius
    mass drops below ``tol * ||a||_F``. Ties in the descending eigenvalue
    sort are broken by the lower original index.
    """
    a = _as_complex_matrix(a)
    n, m = a.shape
    if n != m:
        raise NonSquareError(f"matrix is {n}x{m}, expected square")
    frob = float(np.linalg.norm(a))
    asym = float(np.linalg.norm(a - a.conj().T))
    if frob > 0 and asym > HERMITIAN_ASYMMETRY_RTOL * frob:
        raise NonHermitianError(
            f"relative asymmetry {asym / frob:.3e} exceeds {HERMITIAN_ASYMMETRY_RTOL:.1e}"
        )
    work = 0.5 * (a + a.conj().T)
    vecs = np.eye(n, dtype=np.complex128)
    tol_off = tol * frob
    off, _ = _kernels.jacobi_cycles(work, vecs, tol_off, _MAX_SWEEPS)
    if off > tol_off:
        raise ConvergenceError(
            f"Jacobi sweeps stalled at off-diagonal mass {off:.3e} > {tol_off:.3e}"
        )
    values = np.diag(work).real.copy()
    order = np.argsort(-values, kind="stable")
    return EigenSpectrum(values=values[order], vectors=vecs[:, order])


def _complete_basis(u, empty_cols):
    """Fill the listed (all-zero) columns with unit vectors orthogonal to the rest.

    Each fill picks the canonical basis vector with the largest residual
    against the current columns; the residual of e_i is 1 minus the i-th
    row mass of u, so candidate selection is O(n) per fill and always
    succeeds while columns remain to fill.
    """
    n = u.shape[0]
    row_mass = (np.abs(u) ** 2).sum(axis=1)
    for j in empty_cols:
        i = int(np.argmin(row_mass))
        cand = np.zeros(n, dtype=np.complex128)
        cand[i] = 1.0
        for _ in range(2):
            cand -= u @ (u.conj().T @ cand)
        nrm = float(np.linalg.norm(cand))
        if nrm < 1e-6:
            raise ConvergenceError("failed to complete an orthonormal basis")
        cand /= nrm
        u[:, j] = cand
        row_mass += np.abs(cand) ** 2


def svd(a, tol: float = SVD_COHERENCE_TOL) -> SvdResult:
    """Thin SVD by one-sided Jacobi rotations on the columns of ``a``.

    Column pairs are rotated until mutually orthogonal in the relative
    sense, which keeps full relative accuracy on small singular values
    (squaring through the Gram matrix would bury them in eigen-noise).
    Columns whose norm falls below SVD_RANK_RTOL of the largest get a zero
    singular value and a deterministically completed left vector.
    """
    a = _as_complex_matrix(a)
    n, m = a.shape
    swap = m > n
    work = a.conj().T.copy() if swap else a.copy()
    k = work.shape[1]
    rot = np.eye(k, dtype=np.complex128)
    worst, _ = _kernels.onesided_cycles(work, rot, tol, _MAX_SWEEPS)
    if worst > tol:
        raise ConvergenceError(
            f"one-sided sweeps stalled at column coherence {worst:.3e} > {tol:.3e}"
        )
    norms = np.linalg.norm(work, axis=0)
    order = np.argsort(-norms, kind="stable")
    work = work[:, order]
    rot = rot[:, order]
    norms = norms[order]
    cut = SVD_RANK_RTOL * float(norms[0]) if norms.size else 0.0

    left = np.zeros((work.shape[0], k), dtype=np.complex128)
    sigma = np.zeros(k)
    empty = []
    for j in range(k):
        if norms[j] > cut and norms[j] > 0.0:
            sigma[j] = norms[j]
            left[:, j] = work[:, j] / norms[j]
        else:
            empty.append(j)
    if empty:
        _complete_basis(left, empty)
    if swap:
        return SvdResult(left=rot, singular_values=sigma, right=left)
    return SvdResult(left=left, singular_values=sigma, right=rot)


def dft_matrix(k: int) -> np.ndarray:
    """Unitary k x k DFT matrix, entry (a, b) = exp(-2j pi a b / k) / sqrt(k)."""
    if k < 1:
        raise ValueError(f"DFT size must be >= 1, got {k}")
    idx = np.arange(k)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / k) / np.sqrt(k)


def kron(a, b) -> np.ndarray:
    """Kronecker product with the usual row-major block layout."""
    a = _as_complex_matrix(a)
    b = _as_complex_matrix(b)
    return np.kron(a, b)


def least_squares(basis, target, cond_limit: float = GRAM_COND_LIMIT) -> np.ndarray:
    """Solve min ||target - basis @ x||_F through the normal equations.

    The Gram matrix condition is estimated from its Jacobi spectrum;
    anything past ``cond_limit`` raises IllConditionedBasisError.
    """
    basis = _as_complex_matrix(basis)
    target = _as_complex_matrix(target)
    if basis.shape[0] != target.shape[0]:
        raise ValueError(
            f"basis rows {basis.shape[0]} != target rows {target.shape[0]}"
        )
    gram = basis.conj().T @ basis
    spec = eig_hermitian(gram)
    lmax = float(spec.values[0])
    lmin = float(spec.values[-1])
    if lmin <= 0.0 or lmax / lmin > cond_limit:
        cond = np.inf if lmin <= 0.0 else lmax / lmin
        raise IllConditionedBasisError(f"Gram condition estimate {cond:.3e} too large")
    rhs = basis.conj().T @ target
    return spec.vectors @ ((spec.vectors.conj().T @ rhs) / spec.values[:, None])
