"""Commuting model -> quansal model -> tensor-product model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matkernel as mk
from .eraser import DEFAULT_EIG_TOL, ChannelMode, Eraser, apply_erasure, build_eraser
from .models import (
    CommutingModel,
    Measurement,
    QuansalModel,
    TensorModel,
    _require_valid,
    partial_trace_a,
    validate_commuting,
    validate_quansal,
    validate_tensor,
)

ERASED_PSD_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class PostMeasurementFamily:
    """Unnormalized Lüders-updated states ``rho_xa[x][a]``."""

    rho_xa: tuple[tuple[np.ndarray, ...], ...]

    def trace_sums(self) -> list[float]:
        return [float(sum(np.trace(r).real for r in row)) for row in self.rho_xa]


def post_measurement_states(m: CommutingModel, mode: ChannelMode = "projective", validate: bool = True) -> PostMeasurementFamily:
    if validate:
        _require_valid(validate_commuting(m), "commuting model")
    if mode == "projective":
        kraus = [list(meas.operators) for meas in m.alice]
    else:
        kraus = [[mk.psd_sqrt(E) for E in meas] for meas in m.alice]
    return PostMeasurementFamily(
        tuple(tuple(mk.hermitian_part(K @ m.rho @ K) for K in row) for row in kraus)
    )


def quansalize(
    m: CommutingModel,
    mode: ChannelMode = "projective",
    eig_tol: float = DEFAULT_EIG_TOL,
    eraser: Eraser | None = None,
    validate: bool = True,
) -> QuansalModel:
    """Erase the record of Alice's setting from the post-measurement states.

    ``sigma^x_a = Omega_inf(K rho K)`` where ``Omega_inf`` projects onto the
    fixed points of the uniform average of Alice's measurement channels.
    Bob's measurements are carried over unchanged.
    """
    if validate:
        _require_valid(validate_commuting(m), "commuting model")
    if eraser is None:
        eraser = build_eraser(m.alice, mode, eig_tol)
    post = post_measurement_states(m, mode, validate=False)
    family = tuple(
        tuple(mk.clamp_psd(apply_erasure(eraser.projector, r), ERASED_PSD_TOL) for r in row)
        for row in post.rho_xa
    )
    return QuansalModel(family, m.bob)


def tensorize(q: QuansalModel, rank_tol: float = mk.DEFAULT_RANK_TOL, validate: bool = True) -> TensorModel:
    """Tensor-product model on ``H (x) H`` with the same behavior as ``q``.

    Alice's effects are ``[s^{-1/2} s^x_a s^{-1/2}]^T`` with the pseudo-inverse
    square root of the common sum ``s``; the missing ``id - Pi^T`` (kernel of
    ``s``) is added to outcome 0 of each setting.  The shared state is the
    purification ``sum_j |j> (x) s^{1/2}|j>``.
    """
    if validate:
        _require_valid(validate_quansal(q), "quansal model")
    d = q.dim_b
    sigma = mk.hermitian_part(q.sigma)
    inv_sqrt, support = mk.psd_pinv_sqrt(sigma, rank_tol=rank_tol)
    deficiency = mk.hermitian_part(np.eye(d) - support.T)
    alice = []
    for row in q.sigma_family:
        ops = [mk.hermitian_part(mk.transpose_in_basis(inv_sqrt @ s @ inv_sqrt)) for s in row]
        ops[0] = ops[0] + deficiency
        alice.append(Measurement(tuple(ops), "povm"))
    root = mk.psd_sqrt(sigma)
    # phi[j*d + k] = <k| s^{1/2} |j>
    phi = root.T.reshape(-1)
    rho_ab = np.outer(phi, phi.conj())
    return TensorModel(d, d, rho_ab, tuple(alice), q.bob)


def quansal_of_tensor(m: TensorModel, validate: bool = True) -> QuansalModel:
    """``sigma^x_a = tr_A(rho_AB (E^x_a (x) id))``; the sums equal Bob's reduced state."""
    if validate:
        _require_valid(validate_tensor(m), "tensor model")
    da, db = m.dim_a, m.dim_b
    r4 = m.rho_ab.reshape(da, db, da, db)
    family = tuple(
        tuple(mk.hermitian_part(np.einsum("ijkl,ki->jl", r4, E)) for E in meas) for meas in m.alice
    )
    rho_b = partial_trace_a(m.rho_ab, da, db)
    return QuansalModel(family, m.bob, sigma=rho_b)


def commuting_to_tensor(
    m: CommutingModel,
    mode: ChannelMode = "projective",
    eig_tol: float = DEFAULT_EIG_TOL,
    rank_tol: float = mk.DEFAULT_RANK_TOL,
    validate: bool = True,
) -> TensorModel:
    return tensorize(quansalize(m, mode, eig_tol, validate=validate), rank_tol, validate=validate)

