"""Dense complex linear algebra and the vectorization/reshuffle calculus.

Conventions used throughout the package:

* ``vectorize`` is row-major: ``|A>> = sum_ij A_ij |i>|j>``, so that
  ``vectorize(A @ rho @ B) == kron(A, B.T) @ vectorize(rho)``.
* Operators on a bipartite space ``H_a (x) H_b`` carry the composite index
  ``(i, j) -> i * d_b + j`` (numpy ``kron`` ordering).
* ``beta_reshuffle`` permutes ``Gamma_{ij;kl} -> Gamma_{ik;jl}``; it maps
  ``kron(A, B.conj())`` to ``outer(vec(A), vec(B).conj())`` and back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError, DimensionError

HERMITIAN_RTOL = 1e-10
PSD_ATOL = 1e-9
RANK_RTOL = 1e-12


def _as_matrix(M):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {M.shape}")
    return M


def _square_dim(M):
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    return M.shape[0]


def _perfect_square_root(n):
    d = int(round(np.sqrt(n)))
    if d * d != n:
        raise DimensionError(f"{n} is not a perfect square")
    return d


def dagger(M):
    return np.conj(np.swapaxes(M, -1, -2))


def vectorize(A):
    """Row-major vector form of a square operator."""
    A = _as_matrix(A)
    _square_dim(A)
    return A.reshape(-1).copy()


def unvectorize(v, shape=None):
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-d vector, got shape {v.shape}")
    if shape is None:
        d = _perfect_square_root(v.shape[0])
        shape = (d, d)
    if shape[0] * shape[1] != v.shape[0]:
        raise DimensionError(f"cannot reshape length {v.shape[0]} into {shape}")
    return v.reshape(shape).copy()


def hs_inner(A, B):
    """Hilbert-Schmidt inner product ``Tr(A^dagger B)``."""
    A = _as_matrix(A)
    B = _as_matrix(B)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return complex(np.vdot(A.reshape(-1), B.reshape(-1)))


def kron(*ops):
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def beta_reshuffle(M, shape=None):
    """Index permutation ``Gamma_{ij;kl} -> Gamma_{ik;jl}``.

    ``shape = (a, b, c, e)`` gives the factor sizes of the indices ``i, j, k, l``;
    by default ``M`` is ``d^2 x d^2`` and all four factors have size ``d``.
    The result has shape ``(a*c, b*e)``.
    """
    M = _as_matrix(M)
    if shape is None:
        d = _perfect_square_root(M.shape[0])
        if M.shape[1] != d * d:
            raise DimensionError(f"expected a d^2 x d^2 matrix, got {M.shape}")
        shape = (d, d, d, d)
    a, b, c, e = shape
    if M.shape != (a * b, c * e):
        raise DimensionError(f"matrix of shape {M.shape} does not factor as {shape}")
    return M.reshape(a, b, c, e).transpose(0, 2, 1, 3).reshape(a * c, b * e).copy()


def check_hermitian(M, rtol=HERMITIAN_RTOL):
    """Return the symmetrized ``(M + M^dagger)/2``; raise if ``M`` is not Hermitian."""
    M = _as_matrix(M)
    _square_dim(M)
    scale = max(np.linalg.norm(M), 1.0)
    if np.linalg.norm(M - dagger(M)) > rtol * scale:
        raise ContractError("matrix is not Hermitian within tolerance")
    return 0.5 * (M + dagger(M))


def _phase_normalize(vecs, atol=1e-12):
    # Per column: rotate the first non-negligible component onto the positive real axis.
    vecs = vecs.copy()
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        idx = np.flatnonzero(np.abs(col) > atol)
        if idx.size:
            z = col[idx[0]]
            vecs[:, k] = col * (np.conj(z) / abs(z))
    return vecs


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in descending order with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)

    @property
    def top(self):
        return float(self.eigenvalues[0]), self.eigenvectors[:, 0]


def hermitian_eigensystem(M):
    H = check_hermitian(M)
    w, v = np.linalg.eigh(H)
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], _phase_normalize(v[:, order]))


def check_psd(M, atol=PSD_ATOL):
    """Symmetrize and verify ``M >= -atol * max(1, lambda_max)``; returns (eigvals, eigvecs)."""
    H = check_hermitian(M)
    w, v = np.linalg.eigh(H)
    scale = max(1.0, abs(w).max(initial=0.0))
    if w.size and w[0] < -atol * scale:
        raise ContractError(f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    return w, v


def operator_norm(M):
    """Largest eigenvalue of a PSD matrix, i.e. ``sup <psi|M|psi>``."""
    w, _ = check_psd(M)
    return float(w[-1])


def psd_sqrt(M, rank_rtol=RANK_RTOL):
    """Square root; eigenvalues below ``rank_rtol * lambda_max`` are set to zero, matching :func:`psd_inv_sqrt`."""
    w, v = check_psd(M)
    w = np.where(w > rank_rtol * max(w[-1], 0.0), w, 0.0)
    return (v * np.sqrt(w)) @ dagger(v)


def psd_inv_sqrt(M, rank_rtol=RANK_RTOL):
    """Pseudo-inverse square root; eigenvalues below ``rank_rtol * lambda_max`` count as zero."""
    w, v = check_psd(M)
    cutoff = rank_rtol * max(w[-1], 0.0)
    inv = np.zeros_like(w)
    keep = w > cutoff
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (v * inv) @ dagger(v)


def support_projector(M, rank_rtol=RANK_RTOL):
    w, v = check_psd(M)
    keep = w > rank_rtol * max(w[-1], 0.0)
    vk = v[:, keep]
    return vk @ dagger(vk)


def projector(ket):
    ket = np.asarray(ket, dtype=complex).reshape(-1)
    return np.outer(ket, ket.conj())


def normalize(ket):
    ket = np.asarray(ket, dtype=complex).reshape(-1)
    n = np.linalg.norm(ket)
    if n == 0:
        raise ContractError("cannot normalize the zero vector")
    return ket / n


def pure_state_ket(rho, tol=1e-8):
    """Ket of a rank-one projector (phase-normalized); raises if ``rho`` is not pure."""
    spec = hermitian_eigensystem(rho)
    w = spec.eigenvalues
    if abs(w[0] - 1.0) > tol or (w.size > 1 and abs(w[1]) > tol):
        raise ContractError("density matrix is not a pure state")
    return spec.eigenvectors[:, 0]


def partial_trace(M, dims, keep):
    """Trace out all factors of ``M`` except those listed in ``keep``."""
    dims = list(dims)
    n = len(dims)
    M = np.asarray(M).reshape(dims + dims)
    keep = sorted(keep)
    traced = [k for k in range(n) if k not in keep]
    for count, k in enumerate(traced):
        ax = k - count
        M = np.trace(M, axis1=ax, axis2=ax + M.ndim // 2)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return M.reshape(dk, dk)


def partial_transpose(M, dims, sys=1):
    da, db = dims
    T = np.asarray(M).reshape(da, db, da, db)
    if sys == 1:
        T = T.transpose(0, 3, 2, 1)
    else:
        T = T.transpose(2, 1, 0, 3)
    return T.reshape(da * db, da * db)


def trace_distance(A, B):
    w = np.linalg.eigvalsh(check_hermitian(np.asarray(A) - np.asarray(B)))
    return 0.5 * float(np.abs(w).sum())


def lambda_max_batched(mats):
    """Largest eigenvalue of each Hermitian matrix in a stack of shape ``(n, d, d)``."""
    mats = np.asarray(mats)
    mats = 0.5 * (mats + dagger(mats))
    return np.linalg.eigvalsh(mats)[..., -1]
