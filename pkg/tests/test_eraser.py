import numpy as np
import pytest

from quansal import matkernel as mk
from quansal.eraser import (
    KrausChannel,
    Superoperator,
    apply_erasure,
    average_superoperator,
    build_eraser,
    fixed_point_projector,
    measurement_channel,
    superoperator_of,
)
from quansal.errors import (
    DimensionMismatch,
    EmptyList,
    ModeMismatch,
    NonHermitianKraus,
    SpectrumOutOfRange,
)
from quansal.models import Measurement, Scenario
from quansal.scenarios import gen_block_sum, gen_tensor_embedded, random_povm, random_projective

from conftest import complex_gaussian, random_density, random_psd

Z = Measurement((np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))
_plus = np.full((2, 2), 0.5)
X = Measurement((_plus, np.eye(2) - _plus))


def superoperator_by_matrix_units(channel, d):
    """Column (i,j) is vec(channel(|i><j|))."""
    S = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d))
            unit[i, j] = 1
            S[:, i * d + j] = channel.apply(unit).reshape(-1)
    return S


def rank1_povm(rng, d, k):
    vs = [complex_gaussian(rng, (d, 1)) for _ in range(k)]
    S = sum(v @ v.conj().T for v in vs)
    R, _ = mk.psd_pinv_sqrt(S)
    return Measurement(tuple(R @ v @ v.conj().T @ R for v in vs), "povm")


def test_z_channel_kraus():
    c = measurement_channel(Z)
    np.testing.assert_array_equal(c.kraus[0], np.diag([1, 0]))
    np.testing.assert_array_equal(c.kraus[1], np.diag([0, 1]))


def test_trivial_povm_sqrt_is_identity_channel(rng):
    m = Measurement((np.eye(2) / 2, np.eye(2) / 2), "povm")
    c = measurement_channel(m, "sqrt")
    for K in c.kraus:
        np.testing.assert_allclose(K, np.eye(2) / np.sqrt(2), atol=1e-15)
    rho = random_density(rng, 2)
    np.testing.assert_allclose(c.apply(rho), rho, atol=1e-15)
    np.testing.assert_allclose(superoperator_of(c).matrix, np.eye(4), atol=1e-15)


def test_projective_mode_rejects_povm(rng):
    with pytest.raises(ModeMismatch):
        measurement_channel(random_povm(rng, 3, 2), "projective")


def test_rank1_povm_sqrt_trace_preserving(rng):
    c = measurement_channel(rank1_povm(rng, 3, 5), "sqrt")
    assert c.trace_preservation_residual() < 1e-11
    for _ in range(5):
        rho = random_density(rng, 3)
        assert abs(np.trace(c.apply(rho)) - 1) < 1e-11


def test_identity_superoperator():
    c = KrausChannel((np.eye(3),))
    np.testing.assert_array_equal(superoperator_of(c).matrix, np.eye(9))


def test_z_superoperator_matches_matrix_units():
    c = measurement_channel(Z)
    S = superoperator_of(c).matrix
    np.testing.assert_allclose(S, superoperator_by_matrix_units(c, 2), atol=1e-15)
    np.testing.assert_allclose(S, np.diag([1, 0, 0, 1]), atol=1e-15)


def test_random_projective_superoperator_action(rng):
    c = measurement_channel(random_projective(rng, 4, 3))
    S = superoperator_of(c)
    for _ in range(5):
        M = complex_gaussian(rng, (4, 4))
        direct = sum(K @ M @ K for K in c.kraus)
        assert np.linalg.norm(S.apply(M) - direct) < 1e-12


def test_non_hermitian_kraus_rejected():
    with pytest.raises(NonHermitianKraus):
        superoperator_of(KrausChannel((np.array([[0, 1], [0, 0]]), np.array([[1, 0], [0, 0]]))))


def test_average_single_channel():
    c = measurement_channel(X)
    np.testing.assert_array_equal(average_superoperator([c]).matrix, superoperator_of(c).matrix)
    with pytest.raises(EmptyList):
        average_superoperator([])
    with pytest.raises(DimensionMismatch):
        average_superoperator([c, KrausChannel((np.eye(3),))])


def test_zx_average_fixed_space_is_identity():
    avg = average_superoperator([measurement_channel(Z), measurement_channel(X)])
    assert np.linalg.norm(avg.matrix - avg.matrix.conj().T) < 1e-15
    P = fixed_point_projector(avg)
    assert P.rank == 1
    v = np.eye(2).reshape(-1) / np.sqrt(2)
    np.testing.assert_allclose(P.projector, np.outer(v, v), atol=1e-12)


def test_shared_eigenbasis_fixed_space_is_diagonal(rng):
    d = 4
    U, _ = np.linalg.qr(complex_gaussian(rng, (d, d)))
    cols = [U[:, [i]] @ U[:, [i]].conj().T for i in range(d)]
    m1 = Measurement((cols[0] + cols[1], cols[2] + cols[3]))
    m2 = Measurement((cols[0], cols[1] + cols[2], cols[3]))
    m3 = Measurement(tuple(cols))
    P = fixed_point_projector(average_superoperator([measurement_channel(m) for m in (m1, m2, m3)]))
    assert P.rank == d
    # every operator diagonal in the shared basis is fixed, and nothing else survives
    for c in cols:
        np.testing.assert_allclose(apply_erasure(P, c), c, atol=1e-12)
    off = U[:, [0]] @ U[:, [1]].conj().T
    assert np.linalg.norm(apply_erasure(P, off)) < 1e-12


def test_identity_projector_and_z_projector():
    P = fixed_point_projector(Superoperator(np.eye(4, dtype=complex)))
    np.testing.assert_array_equal(P.projector, np.eye(4))
    Pz = fixed_point_projector(superoperator_of(measurement_channel(Z)))
    np.testing.assert_allclose(Pz.projector, np.diag([1, 0, 0, 1]), atol=1e-15)
    assert Pz.rank == 2


def test_spectrum_out_of_range():
    with pytest.raises(SpectrumOutOfRange) as info:
        fixed_point_projector(Superoperator(np.diag([1.5, 0.2, 0.0, 0.0]).astype(complex)))
    assert info.value.eigenvalue == pytest.approx(1.5)
    with pytest.raises(SpectrumOutOfRange):
        fixed_point_projector(Superoperator(np.diag([1.0, -0.1, 0.0, 0.0]).astype(complex)))


def test_apply_erasure_examples(rng):
    Pz = fixed_point_projector(superoperator_of(measurement_channel(Z)))
    np.testing.assert_allclose(apply_erasure(Pz, np.full((2, 2), 0.5)), np.diag([0.5, 0.5]), atol=1e-15)
    fixed = np.diag([0.3, 0.7])
    np.testing.assert_allclose(apply_erasure(Pz, fixed), fixed, atol=1e-15)
    Pzx = fixed_point_projector(average_superoperator([measurement_channel(Z), measurement_channel(X)]))
    for _ in range(3):
        np.testing.assert_allclose(apply_erasure(Pzx, random_density(rng, 2)), np.eye(2) / 2, atol=1e-12)
    with pytest.raises(DimensionMismatch):
        apply_erasure(Pzx, np.eye(3))


def _erasers():
    yield build_eraser(gen_tensor_embedded(2, 2, Scenario.uniform(2, 2, 2, 2), 0).alice)
    yield build_eraser(gen_tensor_embedded(2, 3, Scenario.uniform(3, 3, 2, 2), 1).alice)
    yield build_eraser(gen_tensor_embedded(2, 2, Scenario.uniform(3, 2, 2, 2), 2, povm=True).alice, "sqrt")
    yield build_eraser(gen_block_sum([(2, 2), (3, 2)], [0.5, 0.5], Scenario.uniform(2, 3, 2, 2), 3).alice)


@pytest.mark.parametrize("eraser", list(_erasers()))
def test_eraser_invariants(eraser, rng):
    S = eraser.average.matrix
    P = eraser.projector.projector
    d = eraser.projector.dim
    w = eraser.projector.spectrum
    assert np.linalg.norm(S - S.conj().T) < 1e-10
    assert w.min() >= -1e-9 and w.max() <= 1 + 1e-9
    assert np.linalg.norm(P @ P - P) < 1e-9 and np.linalg.norm(P - P.conj().T) < 1e-9
    assert eraser.invariance_residual() <= 1e-8
    for _ in range(3):
        M = complex_gaussian(rng, (d, d))
        erased = apply_erasure(eraser.projector, M)
        assert abs(np.trace(erased) - np.trace(M)) < 1e-9
        for c in eraser.channels:
            assert np.linalg.norm(apply_erasure(eraser.projector, c.apply(M)) - erased) < 1e-8
        psd = random_psd(rng, d)
        assert np.linalg.eigvalsh(mk.hermitian_part(apply_erasure(eraser.projector, psd))).min() >= -1e-8


@pytest.mark.parametrize("eraser", list(_erasers()))
def test_power_convergence(eraser):
    """||S^N - P||_F decreases monotonically and is bounded by lambda_2^N dim^2."""
    S = eraser.average.matrix
    P = eraser.projector.projector
    lam2 = eraser.projector.gap_eigenvalue
    dim2 = S.shape[0]
    power = np.eye(dim2, dtype=complex)
    prev = np.inf
    for n in range(1, 51):
        power = power @ S
        dist = np.linalg.norm(power - P)
        assert dist <= prev + 1e-12
        assert dist <= lam2**n * dim2 + 1e-9
        prev = dist
