"""Measurement channels, their superoperators and the fixed-point projector.

A setting ``x`` of Alice defines the channel ``M -> sum_a K_a M K_a`` with
``K_a = E^x_a`` (projective mode) or ``K_a = sqrt(E^x_a)`` (sqrt mode).  The
uniform average of these channels is a Hermitian PSD superoperator with
spectrum in [0, 1]; the orthogonal projector onto its eigenvalue-1 space is the
limit of its powers and erases the record of which setting was used.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from . import matkernel as mk
from .errors import (
    DimensionMismatch,
    EmptyList,
    ModeMismatch,
    NonHermitianKraus,
    SpectrumOutOfRange,
)
from .models import Measurement

ChannelMode = Literal["projective", "sqrt"]

DEFAULT_EIG_TOL = 1e-9
KRAUS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def apply(self, M: np.ndarray) -> np.ndarray:
        return sum(K @ M @ K.conj().T for K in self.kraus)

    def trace_preservation_residual(self) -> float:
        return mk.frobenius_norm(sum(K.conj().T @ K for K in self.kraus) - np.eye(self.dim))


@dataclass(frozen=True, eq=False)
class Superoperator:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        """Dimension of the underlying Hilbert space."""
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, M: np.ndarray) -> np.ndarray:
        return mk.devectorize(self.matrix @ mk.vectorize(M), self.dim)


@dataclass(frozen=True, eq=False)
class ErasureProjector:
    projector: np.ndarray
    spectrum: np.ndarray  # eigenvalues of the averaged superoperator, descending
    eig_tol: float

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.projector.shape[0])))

    @property
    def rank(self) -> int:
        return int(np.sum(self.spectrum >= 1.0 - self.eig_tol))

    @property
    def gap_eigenvalue(self) -> float:
        """Largest eigenvalue classified as < 1 (0.0 if none)."""
        rest = self.spectrum[self.spectrum < 1.0 - self.eig_tol]
        return float(rest[0]) if rest.size else 0.0

    def spectrum_summary(self) -> dict:
        return {
            "size": int(self.spectrum.size),
            "max": float(self.spectrum[0]),
            "min": float(self.spectrum[-1]),
            "fixed_rank": self.rank,
            "largest_below_one": self.gap_eigenvalue,
            "eig_tol": self.eig_tol,
        }


def measurement_channel(m: Measurement, mode: ChannelMode = "projective") -> KrausChannel:
    if mode == "projective":
        if m.kind != "projective":
            raise ModeMismatch("projective mode requested for a non-projective POVM")
        kraus = tuple(m.operators)
    elif mode == "sqrt":
        kraus = tuple(mk.psd_sqrt(E) for E in m.operators)
    else:
        raise ValueError(f"unknown channel mode {mode!r}")
    return KrausChannel(kraus)


def superoperator_of(c: KrausChannel) -> Superoperator:
    """``sum_a K_a (x) K_a^T`` for Hermitian Kraus operators."""
    for K in c.kraus:
        asym = mk.hermiticity_residual(K)
        if asym > KRAUS_TOL * max(1.0, mk.frobenius_norm(K)):
            raise NonHermitianKraus(f"Kraus operator is not Hermitian (||K - K^H||_F = {asym:.3e})")
    return Superoperator(sum(np.kron(K, K.T) for K in c.kraus))


def average_superoperator(channels: Sequence[KrausChannel]) -> Superoperator:
    if not channels:
        raise EmptyList("need at least one channel")
    d = channels[0].dim
    if any(c.dim != d for c in channels):
        raise DimensionMismatch("channels act on spaces of different dimension")
    return Superoperator(sum(superoperator_of(c).matrix for c in channels) / len(channels))


def fixed_point_projector(s: Superoperator, eig_tol: float = DEFAULT_EIG_TOL) -> ErasureProjector:
    """Spectral projector onto the eigenvalue-1 space of a Hermitian superoperator.

    Eigenvalues ``>= 1 - eig_tol`` are counted as 1.

    Raises
    ------
    SpectrumOutOfRange
        If any eigenvalue lies outside ``[-eig_tol, 1 + eig_tol]``.
    """
    dec = mk.hermitian_eig(s.matrix)
    w = dec.eigenvalues
    if w[0] > 1.0 + eig_tol:
        raise SpectrumOutOfRange(float(w[0]))
    if w[-1] < -eig_tol:
        raise SpectrumOutOfRange(float(w[-1]))
    V = dec.eigenvectors[:, w >= 1.0 - eig_tol]
    P = mk.hermitian_part(V @ V.conj().T)
    return ErasureProjector(projector=P, spectrum=w, eig_tol=eig_tol)


def apply_erasure(p: ErasureProjector, M) -> np.ndarray:
    M = mk.as_cmatrix(M)
    if M.shape[0] ** 2 != p.projector.shape[0] or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{M.shape} matrix does not fit a {p.projector.shape} projector")
    return mk.devectorize(p.projector @ mk.vectorize(M), M.shape[0])


@dataclass(frozen=True, eq=False)
class Eraser:
    """Everything built from one party's measurement settings."""

    channels: tuple[KrausChannel, ...]
    superoperators: tuple[Superoperator, ...]
    average: Superoperator
    projector: ErasureProjector

    def invariance_residual(self) -> float:
        """``max_x || P Omega_x - P ||_F``."""
        P = self.projector.projector
        return max(mk.frobenius_norm(P @ s.matrix - P) for s in self.superoperators)


def build_eraser(
    measurements: Sequence[Measurement],
    mode: ChannelMode = "projective",
    eig_tol: float = DEFAULT_EIG_TOL,
) -> Eraser:
    channels = tuple(measurement_channel(m, mode) for m in measurements)
    if not channels:
        raise EmptyList("need at least one measurement setting")
    supers = tuple(superoperator_of(c) for c in channels)
    avg = Superoperator(sum(s.matrix for s in supers) / len(supers))
    return Eraser(channels, supers, avg, fixed_point_projector(avg, eig_tol))
