"""Seeded model generators and a naive behavior oracle.

Generator algorithm (fixed; fixtures should be exchanged as JSON, not
re-derived from the RNG in other environments):

* RNG: ``numpy.random.default_rng(seed)`` (PCG64).
* complex Gaussian matrix: ``standard_normal(shape) + 1j * standard_normal(shape)``,
  real part drawn first.
* state: ``G G^H / tr(G G^H)`` with a square complex Gaussian ``G``.
* projective measurement with ``k`` outcomes on ``C^d``: QR of a complex
  Gaussian ``d x d`` matrix with the phases of ``diag(R)`` folded into ``Q``;
  the columns of ``Q`` are split into ``k`` contiguous groups by
  ``numpy.array_split`` and each group gives one projector (groups may be
  empty when ``k > d``).
* POVM with ``k`` outcomes: ``G_a = A_a A_a^H`` for complex Gaussian
  ``A_a`` and ``E_a = S^{-1/2} G_a S^{-1/2}`` with ``S = sum_a G_a``.
* draw order per tensor block: state, Alice settings in order, Bob settings
  in order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from . import matkernel as mk
from .models import (
    Behavior,
    CommutingModel,
    Measurement,
    Scenario,
    TensorModel,
    _real_prob,
    _require_valid,
    behavior_from_function,
    embed,
    validate_commuting,
    validate_tensor,
)

GeneratorKind = Literal["tensor_embedded", "block_sum", "chsh", "random_povm"]


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return re + 1j * im


def random_state(rng: np.random.Generator, d: int) -> np.ndarray:
    G = _complex_gaussian(rng, (d, d))
    rho = G @ G.conj().T
    return mk.hermitian_part(rho / np.trace(rho).real)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    Q, R = np.linalg.qr(_complex_gaussian(rng, (d, d)))
    diag = np.diag(R)
    return Q * (diag / np.abs(diag))


def random_projective(rng: np.random.Generator, d: int, k: int) -> Measurement:
    U = random_unitary(rng, d)
    ops = []
    for group in np.array_split(np.arange(d), k):
        V = U[:, group]
        ops.append(mk.hermitian_part(V @ V.conj().T))
    return Measurement(tuple(ops), "projective")


def random_povm(rng: np.random.Generator, d: int, k: int) -> Measurement:
    grams = []
    for _ in range(k):
        A = _complex_gaussian(rng, (d, d))
        grams.append(A @ A.conj().T)
    inv_sqrt, _ = mk.psd_pinv_sqrt(sum(grams))
    return Measurement(tuple(mk.hermitian_part(inv_sqrt @ G @ inv_sqrt) for G in grams), "povm")


def _random_tensor(rng, dim_a: int, dim_b: int, scenario: Scenario, povm: bool) -> TensorModel:
    draw = random_povm if povm else random_projective
    rho = random_state(rng, dim_a * dim_b)
    alice = tuple(draw(rng, dim_a, k) for k in scenario.outcomes_a)
    bob = tuple(draw(rng, dim_b, k) for k in scenario.outcomes_b)
    return TensorModel(dim_a, dim_b, rho, alice, bob)


def gen_tensor(dim_a: int, dim_b: int, scenario: Scenario, seed: int, povm: bool = False) -> TensorModel:
    if dim_a < 1 or dim_b < 1:
        raise ValueError("dimensions must be >= 1")
    return _random_tensor(np.random.default_rng(seed), dim_a, dim_b, scenario, povm)


def gen_tensor_embedded(dim_a: int, dim_b: int, scenario: Scenario, seed: int, povm: bool = False) -> CommutingModel:
    """Random tensor model written as ``E (x) id``, ``id (x) F`` on one space."""
    return embed(gen_tensor(dim_a, dim_b, scenario, seed, povm))


def block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.complex128)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i : i + k, i : i + k] = b
        i += k
    return out


def gen_block_sum(
    blocks: Sequence[tuple[int, int]],
    weights: Sequence[float],
    scenario: Scenario,
    seed: int,
    povm: bool = False,
) -> CommutingModel:
    """Direct sum of embedded tensor blocks with state ``sum_i w_i rho_i``.

    The result commutes globally but is not a single tensor product of the
    stored factors.  Zero weights are allowed and give a rank-deficient state.
    """
    if len(blocks) != len(weights) or not blocks:
        raise ValueError("need one weight per block and at least one block")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be a probability vector")
    rng = np.random.default_rng(seed)
    parts = [embed(_random_tensor(rng, da, db, scenario, povm)) for da, db in blocks]
    rho = block_diag([wi * p.rho for wi, p in zip(w, parts)])

    def stack(attr: str):
        out = []
        for x in range(len(getattr(parts[0], attr))):
            ms = [getattr(p, attr)[x] for p in parts]
            ops = tuple(block_diag([m[a] for m in ms]) for a in range(ms[0].outcomes))
            out.append(Measurement(ops, ms[0].kind))
        return tuple(out)

    return CommutingModel(rho, stack("alice"), stack("bob"))


def gen_chsh() -> TensorModel:
    """Maximally entangled two-qubit state with the optimal CHSH settings.

    Alice measures Z and X, Bob measures (Z+X)/sqrt2 and (Z-X)/sqrt2; outcome
    index 0 is the +1 eigenspace.
    """
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    xop = np.array([[0, 1], [1, 0]], dtype=complex)
    eye = np.eye(2)

    def dichotomic(obs):
        return Measurement(((eye + obs) / 2, (eye - obs) / 2), "projective")

    phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    rho = np.outer(phi, phi.conj())
    alice = (dichotomic(z), dichotomic(xop))
    bob = (dichotomic((z + xop) / np.sqrt(2)), dichotomic((z - xop) / np.sqrt(2)))
    return TensorModel(2, 2, rho, alice, bob)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: GeneratorKind
    outcomes_a: tuple[int, ...] = (2, 2)
    outcomes_b: tuple[int, ...] = (2, 2)
    blocks: tuple[tuple[int, int], ...] = ((2, 2),)
    weights: tuple[float, ...] = (1.0,)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("tensor_embedded", "block_sum", "chsh", "random_povm"):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if any(d < 1 for blk in self.blocks for d in blk):
            raise ValueError("dimensions must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def scenario(self) -> Scenario:
        return Scenario(self.outcomes_a, self.outcomes_b)


def generate(spec: GeneratorSpec):
    if spec.kind == "chsh":
        return gen_chsh()
    if spec.kind == "block_sum":
        return gen_block_sum(spec.blocks, spec.weights, spec.scenario, spec.seed)
    da, db = spec.blocks[0]
    return gen_tensor_embedded(da, db, spec.scenario, spec.seed, povm=spec.kind == "random_povm")


# ----------------------------------------------------------------------------
# oracle


def _naive_trace3(rho: np.ndarray, E: np.ndarray, F: np.ndarray) -> complex:
    # tr(rho E F) = sum_{i,j,k} rho[i,j] E[j,k] F[k,i]
    n = rho.shape[0]
    total = 0j
    for i in range(n):
        col = F[:, i]
        for j in range(n):
            r = rho[i, j]
            if r != 0:
                total += r * np.dot(E[j, :], col)
    return total


def _naive_tensor_trace(rho: np.ndarray, E: np.ndarray, F: np.ndarray, da: int, db: int) -> complex:
    # tr(rho (E x F)) = sum rho[(i,j),(k,l)] E[k,i] F[l,j]
    total = 0j
    for i in range(da):
        for j in range(db):
            row = rho[i * db + j]
            for k in range(da):
                e = E[k, i]
                if e != 0:
                    total += e * np.dot(row[k * db : (k + 1) * db], F[:, j])
    return total


def brute_force_behavior(m) -> Behavior:
    """Behavior by explicit index loops, sharing no code with the model evaluators."""
    if isinstance(m, CommutingModel):
        _require_valid(validate_commuting(m), "commuting model")

        def entry(E, F):
            return _naive_trace3(m.rho, E, F)

    elif isinstance(m, TensorModel):
        _require_valid(validate_tensor(m), "tensor model")

        def entry(E, F):
            return _naive_tensor_trace(m.rho_ab, E, F, m.dim_a, m.dim_b)

    else:
        raise TypeError(f"no oracle for {type(m).__name__}")

    def cell(x, y):
        out = np.empty((m.alice[x].outcomes, m.bob[y].outcomes))
        for a, E in enumerate(m.alice[x]):
            for b, F in enumerate(m.bob[y]):
                out[a, b] = _real_prob(complex(entry(E, F)), f"(x={x},y={y},a={a},b={b})")
        return out

    return behavior_from_function(m.scenario, cell)
