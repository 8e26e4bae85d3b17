"""Dense complex-matrix primitives.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Vectorization is row-major: ``|i><j| -> |i>|j>``, so that
``vec(A @ M @ B) == kron(A, B.T) @ vec(M)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonHermitian, NotPSD

DEFAULT_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-10


def as_cmatrix(M) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def _require_square(M: np.ndarray) -> None:
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return (M + M.conj().T) / 2


def hermiticity_residual(M: np.ndarray) -> float:
    """Frobenius norm of ``M - M^H``."""
    return float(np.linalg.norm(M - M.conj().T))


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # orthonormal columns

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def hermitian_eig(M, tol: float = DEFAULT_TOL) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.

    Raises
    ------
    NonHermitian
        If ``||M - M^H||_F > tol * ||M||_F``.
    """
    M = as_cmatrix(M)
    _require_square(M)
    asym = hermiticity_residual(M)
    if asym > tol * np.linalg.norm(M):
        raise NonHermitian(asym)
    w, V = np.linalg.eigh(hermitian_part(M))
    order = np.argsort(w)[::-1]
    return SpectralDecomposition(eigenvalues=w[order], eigenvectors=V[:, order])


def _psd_spectrum(M, tol: float) -> SpectralDecomposition:
    dec = hermitian_eig(M, tol=max(tol, DEFAULT_TOL))
    w = dec.eigenvalues
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[-1] < -tol * scale:
        raise NotPSD(float(w[-1]))
    # absorb roundoff below zero
    return SpectralDecomposition(np.clip(w, 0.0, None), dec.eigenvectors)


def psd_sqrt(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a PSD matrix.

    Eigenvalues in ``[-tol * max(1, |lambda|_max), 0)`` are clamped to zero;
    anything more negative raises ``NotPSD``.
    """
    dec = _psd_spectrum(M, tol)
    V = dec.eigenvectors
    R = (V * np.sqrt(dec.eigenvalues)) @ V.conj().T
    return hermitian_part(R)


def psd_pinv_sqrt(M, rank_tol: float = DEFAULT_RANK_TOL, tol: float = DEFAULT_TOL):
    """Moore-Penrose inverse square root and the projector onto the support.

    Eigenvalues ``<= rank_tol * lambda_max`` count as zero. Returns
    ``(M^{-1/2}, Pi)`` with ``M^{-1/2} M M^{-1/2} = Pi``.
    """
    dec = _psd_spectrum(M, tol)
    w, V = dec.eigenvalues, dec.eigenvectors
    keep = w > rank_tol * w[0] if w[0] > 0 else np.zeros_like(w, dtype=bool)
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    R = hermitian_part((V * inv) @ V.conj().T)
    Vk = V[:, keep]
    support = hermitian_part(Vk @ Vk.conj().T)
    return R, support


def vectorize(M) -> np.ndarray:
    """Row-major vectorization ``|i><j| -> |i>|j>`` (1-D array of length rows*cols)."""
    return as_cmatrix(M).reshape(-1)


def devectorize(v, dim: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.size != dim * dim:
        raise DimensionMismatch(f"vector of length {v.size} cannot form a {dim}x{dim} matrix")
    return v.reshape(dim, dim)


def transpose_in_basis(M) -> np.ndarray:
    """Transpose in the computational (storage) basis."""
    return as_cmatrix(M).T


def trace_norm(M) -> float:
    M = as_cmatrix(M)
    _require_square(M)
    return float(np.sum(np.linalg.svd(M, compute_uv=False)))


def frobenius_norm(M) -> float:
    return float(np.linalg.norm(as_cmatrix(M)))


def commutator_norm(A, B) -> float:
    A, B = as_cmatrix(A), as_cmatrix(B)
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"cannot commute shapes {A.shape} and {B.shape}")
    return float(np.linalg.norm(A @ B - B @ A))


def kron(A, B) -> np.ndarray:
    return np.kron(as_cmatrix(A), as_cmatrix(B))


def min_eigenvalue(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(M))[0])


def clamp_psd(M: np.ndarray, tol: float) -> np.ndarray:
    """Hermitize and zero out eigenvalues in ``[-tol, 0)``; raise if any is below ``-tol``."""
    H = hermitian_part(M)
    w, V = np.linalg.eigh(H)
    if w[0] >= 0:
        return H
    if w[0] < -tol:
        raise NotPSD(float(w[0]))
    return hermitian_part((V * np.clip(w, 0.0, None)) @ V.conj().T)
