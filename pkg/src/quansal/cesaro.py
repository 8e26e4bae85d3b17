"""Cesàro-averaged erasure for two dichotomic Alice settings.

Settings are labelled 1 and 2 here (indices 0 and 1 in the tables).  With
``U_x = E^x[0] - E^x[1]`` and ``W = U_1 U_2`` the conjugation maps are
``Lambda_x(M) = U_x M U_x`` and ``(Lambda_1 o Lambda_2)(M) = W M W^H``.  The
averages

    Gamma_1^(N) = 1/(N+1) sum_{k=0}^N (Lambda_1 o Lambda_2)^k
    Gamma_2^(N) = Gamma_1^(N) o Lambda_1

satisfy, for every operator ``rho`` (``Omega_x`` being the Lüders channels),

    Gamma_1(Omega_1(rho)) + w W^{N+1} rho W^{-(N+1)} = Gamma_2(Omega_2(rho)) + w rho,
    w = 1 / (2 (N+1)).

The factor 2 comes from ``Omega_x(rho) = (U_x rho U_x + rho) / 2``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import matkernel as mk
from .errors import DimensionMismatch, NotProjective, ScenarioMismatch
from .models import (
    Behavior,
    CommutingModel,
    Measurement,
    QuansalModel,
    Scenario,
    _check_distributions,
    behavior_of_commuting,
    behavior_of_quansal,
    bob_marginals,
    mix_behaviors,
    product_behavior,
    quansality_residual,
    uniform_distributions,
)

PROJECTIVE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DichotomicPair:
    u1: np.ndarray
    u2: np.ndarray

    @property
    def dim(self) -> int:
        return self.u1.shape[0]

    @property
    def w(self) -> np.ndarray:
        """``U_1 U_2``, so that ``Lambda_1 o Lambda_2 (M) = W M W^H``."""
        return self.u1 @ self.u2

    def lambda1(self, M: np.ndarray) -> np.ndarray:
        return self.u1 @ M @ self.u1

    def lambda2(self, M: np.ndarray) -> np.ndarray:
        return self.u2 @ M @ self.u2

    def composed_power(self, M: np.ndarray, k: int) -> np.ndarray:
        """``(Lambda_1 o Lambda_2)^k (M)``."""
        W = self.w
        for _ in range(k):
            M = W @ M @ W.conj().T
        return M

    def residuals(self) -> dict[str, float]:
        eye = np.eye(self.dim)
        return {
            "hermiticity": max(mk.hermiticity_residual(U) for U in (self.u1, self.u2)),
            "involution": max(mk.frobenius_norm(U @ U - eye) for U in (self.u1, self.u2)),
        }


def dichotomic_observables(m: CommutingModel) -> DichotomicPair:
    """``U_x = E^x[0] - E^x[1]`` for a model whose Alice has two projective two-outcome settings."""
    if m.scenario.outcomes_a != (2, 2):
        raise ScenarioMismatch(f"need Alice outcomes (2, 2), got {m.scenario.outcomes_a}")
    for meas in m.alice:
        for E in meas:
            if mk.frobenius_norm(E @ E - E) > PROJECTIVE_TOL:
                raise NotProjective("Alice's measurement operators must be projectors")
    u1, u2 = (mk.hermitian_part(meas[0] - meas[1]) for meas in m.alice)
    return DichotomicPair(u1, u2)


def _check_dim(p: DichotomicPair, M: np.ndarray) -> np.ndarray:
    M = mk.as_cmatrix(M)
    if M.shape != (p.dim, p.dim):
        raise DimensionMismatch(f"operator of shape {M.shape} on a {p.dim}-dimensional pair")
    return M


def gamma1(p: DichotomicPair, n: int, M) -> np.ndarray:
    """Cesàro mean ``1/(n+1) sum_{k=0}^n W^k M W^{-k}``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    M = _check_dim(p, M)
    W = p.w
    Wh = W.conj().T
    acc = np.zeros_like(M)
    X = M
    for _ in range(n + 1):
        acc += X
        X = W @ X @ Wh
    return acc / (n + 1)


def gamma2(p: DichotomicPair, n: int, M) -> np.ndarray:
    return gamma1(p, n, p.lambda1(_check_dim(p, M)))


def _luders(u: np.ndarray, M: np.ndarray) -> np.ndarray:
    return (u @ M @ u + M) / 2


def identity_weight(n: int) -> float:
    return 1.0 / (2 * (n + 1))


def cesaro_identity_residual(p: DichotomicPair, n: int, rho, weight: float | None = None) -> float:
    """Frobenius norm of
    ``Gamma_1(Omega_1 rho) + w W^{n+1}rho - Gamma_2(Omega_2 rho) - w rho``.

    ``weight`` defaults to ``1/(2(n+1))``, the only value for which the
    identity holds for all ``rho``.
    """
    rho = _check_dim(p, rho)
    w = identity_weight(n) if weight is None else weight
    lhs = gamma1(p, n, _luders(p.u1, rho)) + w * p.composed_power(rho, n + 1)
    rhs = gamma2(p, n, _luders(p.u2, rho)) + w * rho
    return mk.frobenius_norm(lhs - rhs)


@dataclass(frozen=True, eq=False)
class CesaroApproximant:
    n: int
    sigma_family: tuple[tuple[np.ndarray, ...], ...]
    reference_qa: tuple[np.ndarray, ...]
    bob: tuple[Measurement, ...]
    behavior_n: Behavior

    def quansal_model(self) -> QuansalModel:
        return QuansalModel(self.sigma_family, self.bob)

    def quansality_residual(self) -> float:
        return quansality_residual(self.sigma_family)

    def trace_residual(self) -> float:
        return max(abs(complex(np.trace(sum(row))) - 1.0) for row in self.sigma_family)


def _alice_reference(qa, s: Scenario) -> list[np.ndarray]:
    if qa is None:
        return uniform_distributions(s.outcomes_a)
    return _check_distributions(qa, s.outcomes_a, "Alice", 1e-9)


def approximant(m: CommutingModel, qa=None, n: int = 0) -> CesaroApproximant:
    """Quansal states whose behavior is ``(n+1)/(n+2) P + 1/(n+2) q p``.

    ``sigma^1_a = c Gamma_1(rho^1_a) + q(a|1)/(n+2) * (W^{n+1} rho + rho)/2``
    ``sigma^2_a = c Gamma_2(rho^2_a) + q(a|2)/(n+2) * rho``
    with ``c = (n+1)/(n+2)`` and ``rho^x_a = E^x_a rho E^x_a``.  The sums over
    ``a`` agree by the Cesàro identity, and each sum has unit trace.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    pair = dichotomic_observables(m)
    q = _alice_reference(qa, m.scenario)
    rho = m.rho
    c = (n + 1) / (n + 2)
    tail1 = (pair.composed_power(rho, n + 1) + rho) / (2 * (n + 2))
    tail2 = rho / (n + 2)
    maps = (lambda M: gamma1(pair, n, M), lambda M: gamma2(pair, n, M))
    family = []
    for x, (meas, gamma, tail) in enumerate(zip(m.alice, maps, (tail1, tail2))):
        row = []
        for a, E in enumerate(meas):
            s = c * gamma(E @ rho @ E) + q[x][a] * tail
            row.append(mk.hermitian_part(s))
        family.append(tuple(row))
    family = tuple(family)
    behavior = behavior_of_quansal(QuansalModel(family, m.bob))
    return CesaroApproximant(n, family, tuple(q), m.bob, behavior)


def approx_behavior(p_behavior: Behavior, qa=None, pb=None, n: int = 0) -> Behavior:
    """``P_N = (N+1)/(N+2) P + 1/(N+2) q(a|x) p(b|y)``; ``pb`` defaults to Bob's marginals of P."""
    s = p_behavior.scenario
    q = _alice_reference(qa, s)
    pb = bob_marginals(p_behavior) if pb is None else pb
    return mix_behaviors(p_behavior, product_behavior(q, pb, s), (n + 1) / (n + 2))


def noise_rate_23(n: int, exact: bool = False):
    """``(1 + 3/(n+1)) / (7 + 3/(n+1)) = (n+4)/(7n+10)``; tends to 1/7."""
    if n < 0:
        raise ValueError("n must be >= 0")
    value = Fraction(n + 4, 7 * n + 10)
    return value if exact else float(value)


def noisy_behavior_23(p: Behavior, qa=None, pb=None, n: int = 0) -> Behavior:
    """``(1 - p_N) P + p_N q p`` for an Alice with one 2-outcome and one 3-outcome setting."""
    s = p.scenario
    if sorted(s.outcomes_a) != [2, 3]:
        raise ScenarioMismatch(f"need Alice settings with 2 and 3 outcomes, got {s.outcomes_a}")
    q = _alice_reference(qa, s)
    pb = bob_marginals(p) if pb is None else pb
    return mix_behaviors(p, product_behavior(q, pb, s), 1.0 - noise_rate_23(n))


# ----------------------------------------------------------------------------
# sweep


@dataclass(frozen=True)
class SweepRow:
    n: int
    quansality_residual: float
    identity_residual: float
    distance: float  # ||P_N - P||_inf, P_N evaluated from the approximant states
    scaled_distance: float  # (N+2) * distance
    closed_form_residual: float  # ||P_N(states) - P_N(formula)||_inf


SWEEP_COLUMNS = (
    "N",
    "quansality_residual",
    "cesaro_identity_residual",
    "dist_inf",
    "scaled_dist_inf",
    "closed_form_residual",
)


def _sweep_row(m: CommutingModel, p: Behavior, q, n: int) -> SweepRow:
    app = approximant(m, q, n)
    pair = dichotomic_observables(m)
    dist = app.behavior_n.max_abs_diff(p)
    closed = approx_behavior(p, q, None, n)
    return SweepRow(
        n=n,
        quansality_residual=app.quansality_residual(),
        identity_residual=cesaro_identity_residual(pair, n, m.rho),
        distance=dist,
        scaled_distance=(n + 2) * dist,
        closed_form_residual=app.behavior_n.max_abs_diff(closed),
    )


def cesaro_sweep(m: CommutingModel, n_list: Sequence[int], qa=None, workers: int = 1) -> list[SweepRow]:
    """One row per N; rows are computed independently so ``workers`` never changes the values."""
    p = behavior_of_commuting(m)
    q = _alice_reference(qa, m.scenario)
    if workers <= 1:
        return [_sweep_row(m, p, q, n) for n in n_list]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda n: _sweep_row(m, p, q, n), n_list))
